use serde::{Deserialize, Serialize};

use super::GeometryError;

/// A point in mesh space. Coordinates are centimetres once divided by the
/// owning mesh's `units_per_cm`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn sub(&self, o: &Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn add(&self, o: &Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn scale(&self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn cross(&self, o: &Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn dot(&self, o: &Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

/// Three vertex indices into the owning section's vertex list. The order
/// is the winding; reversing it flips the face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triangle(pub [usize; 3]);

impl Triangle {
    pub const fn new(a: usize, b: usize, c: usize) -> Self {
        Self([a, b, c])
    }

    pub fn flipped(&self) -> Self {
        Triangle([self.0[0], self.0[2], self.0[1]])
    }

    /// Directed edges in winding order.
    pub fn edges(&self) -> [(usize, usize); 3] {
        let [a, b, c] = self.0;
        [(a, b), (b, c), (c, a)]
    }
}

/// A named sub-object (wheel, frame, saddle, ...) with its own vertex list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSection {
    pub name: String,
    pub vertices: Vec<Point3>,
    pub triangles: Vec<Triangle>,
}

impl MeshSection {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            vertices: Vec::new(),
            triangles: Vec::new(),
        }
    }

    pub fn corners(&self, t: &Triangle) -> (Point3, Point3, Point3) {
        (
            self.vertices[t.0[0]],
            self.vertices[t.0[1]],
            self.vertices[t.0[2]],
        )
    }

    /// Appends another closed part, shifting its indices past the current
    /// vertex list.
    pub fn append(&mut self, vertices: &[Point3], triangles: &[Triangle]) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(vertices);
        self.triangles.extend(
            triangles
                .iter()
                .map(|t| Triangle([t.0[0] + base, t.0[1] + base, t.0[2] + base])),
        );
    }
}

/// A sectioned triangle mesh. Watertightness is never stored; ask
/// [`super::validate_watertight`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub id: String,
    pub sections: Vec<MeshSection>,
    pub units_per_cm: f64,
}

impl Mesh {
    /// Builds a mesh after checking index ranges, finiteness and
    /// non-degenerate faces.
    pub fn new(id: impl Into<String>, sections: Vec<MeshSection>) -> Result<Self, GeometryError> {
        let mesh = Mesh {
            id: id.into(),
            sections,
            units_per_cm: 1.0,
        };
        mesh.check()?;
        Ok(mesh)
    }

    pub fn with_units_per_cm(mut self, units_per_cm: f64) -> Result<Self, GeometryError> {
        if !(units_per_cm.is_finite() && units_per_cm > 0.0) {
            return Err(GeometryError::NonPositiveScale(units_per_cm));
        }
        self.units_per_cm = units_per_cm;
        Ok(self)
    }

    fn check(&self) -> Result<(), GeometryError> {
        if self.sections.iter().all(|s| s.triangles.is_empty()) {
            return Err(GeometryError::EmptyMesh);
        }
        for section in &self.sections {
            if let Some(p) = section.vertices.iter().find(|p| !p.is_finite()) {
                return Err(GeometryError::NonFiniteVertex {
                    section: section.name.clone(),
                    point: *p,
                });
            }
            for (i, t) in section.triangles.iter().enumerate() {
                let n = section.vertices.len();
                if let Some(&bad) = t.0.iter().find(|&&v| v >= n) {
                    return Err(GeometryError::IndexOutOfRange {
                        line: None,
                        index: bad,
                        len: n,
                    });
                }
                if is_degenerate(section, t) {
                    return Err(GeometryError::DegenerateTriangle {
                        section: section.name.clone(),
                        triangle: i,
                        line: None,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn triangle_count(&self) -> usize {
        self.sections.iter().map(|s| s.triangles.len()).sum()
    }

    pub fn vertex_count(&self) -> usize {
        self.sections.iter().map(|s| s.vertices.len()).sum()
    }

    /// Every triangle's corners, in section then triangle order.
    pub fn triangles(&self) -> impl Iterator<Item = (Point3, Point3, Point3)> + '_ {
        self.sections
            .iter()
            .flat_map(|s| s.triangles.iter().map(move |t| s.corners(t)))
    }

    /// The same mesh with every triangle's winding reversed.
    pub fn reversed(&self) -> Mesh {
        let mut out = self.clone();
        for s in &mut out.sections {
            for t in &mut s.triangles {
                *t = t.flipped();
            }
        }
        out
    }

    pub fn translated(&self, offset: Point3) -> Mesh {
        let mut out = self.clone();
        for s in &mut out.sections {
            for v in &mut s.vertices {
                *v = v.add(&offset);
            }
        }
        out
    }
}

/// Identical indices or exactly collinear corners.
pub(crate) fn is_degenerate(section: &MeshSection, t: &Triangle) -> bool {
    let [a, b, c] = t.0;
    if a == b || b == c || a == c {
        return true;
    }
    let (p, q, r) = section.corners(t);
    let n = q.sub(&p).cross(&r.sub(&p));
    n.dot(&n) == 0.0
}

/// Summary counts and axis-aligned size of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub triangles: usize,
    pub vertices: usize,
    /// max − min per axis, centimetres.
    pub extent: [f64; 3],
    pub watertight: bool,
}
