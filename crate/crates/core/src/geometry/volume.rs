use super::mesh::{Mesh, MeshStats, Point3};
use super::watertight::validate_watertight;
use super::GeometryError;

const CM3_PER_DM3: f64 = 1000.0;

/// Signed volume (cm³) of the tetrahedron spanned by the origin and the
/// triangle `a, b, c`: `a · (b × c) / 6`.
///
/// Expanded, this is
/// `(x1·y2·z3 − x1·y3·z2 − x2·y1·z3 + x3·y1·z2 + x2·y3·z1 − x3·y2·z1) / 6`.
/// Positive when the triangle winds counter-clockwise seen from outside
/// a solid that contains the origin.
pub fn signed_triangle_volume(a: Point3, b: Point3, c: Point3) -> f64 {
    a.dot(&b.cross(&c)) / 6.0
}

/// Per-section signed volume sums in mesh units³, before the absolute
/// value is taken. Section order and triangle order are preserved.
///
/// Each section is measured about its first vertex instead of the origin.
/// For closed shells the result is the same, and large translations do not
/// cost precision.
pub fn section_signed_volumes(mesh: &Mesh) -> Vec<f64> {
    mesh.sections
        .iter()
        .map(|s| {
            let Some(&origin) = s.vertices.first() else {
                return 0.0;
            };
            s.triangles
                .iter()
                .map(|t| {
                    let (a, b, c) = s.corners(t);
                    signed_triangle_volume(a.sub(&origin), b.sub(&origin), c.sub(&origin))
                })
                .sum()
        })
        .collect()
}

/// Signed total in cm³ (section sums added in order, unit scale applied).
pub fn signed_volume_cm3(mesh: &Mesh) -> f64 {
    let raw: f64 = section_signed_volumes(mesh).into_iter().sum();
    raw / mesh.units_per_cm.powi(3)
}

/// Enclosed volume in dm³.
///
/// Sums signed triangle volumes over every section, so inward-facing
/// shells (cavities) subtract, then takes the absolute value once. Fails
/// with [`GeometryError::NotWatertight`] unless the mesh is closed and
/// consistently oriented.
pub fn mesh_volume(mesh: &Mesh) -> Result<f64, GeometryError> {
    let report = validate_watertight(mesh);
    if !report.watertight {
        return Err(GeometryError::NotWatertight(Box::new(report)));
    }
    Ok(signed_volume_cm3(mesh).abs() / CM3_PER_DM3)
}

/// Multiplies every vertex by `s`.
pub fn scale_mesh(mesh: &Mesh, s: f64) -> Result<Mesh, GeometryError> {
    if !(s.is_finite() && s > 0.0) {
        return Err(GeometryError::NonPositiveScale(s));
    }
    let mut out = mesh.clone();
    if s != 1.0 {
        for section in &mut out.sections {
            for v in &mut section.vertices {
                *v = v.scale(s);
            }
        }
    }
    Ok(out)
}

pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in mesh.sections.iter().flat_map(|s| &s.vertices) {
        for (axis, value) in [v.x, v.y, v.z].into_iter().enumerate() {
            lo[axis] = lo[axis].min(value);
            hi[axis] = hi[axis].max(value);
        }
    }
    let mut extent = [0.0; 3];
    for axis in 0..3 {
        if hi[axis] >= lo[axis] {
            extent[axis] = (hi[axis] - lo[axis]) / mesh.units_per_cm;
        }
    }
    MeshStats {
        triangles: mesh.triangle_count(),
        vertices: mesh.vertex_count(),
        extent,
        watertight: validate_watertight(mesh).watertight,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;
    use crate::geometry::mesh::MeshSection;

    /// The six distinct terms, written out term by term.
    fn expanded(a: Point3, b: Point3, c: Point3) -> f64 {
        let (x1, y1, z1) = (a.x, a.y, a.z);
        let (x2, y2, z2) = (b.x, b.y, b.z);
        let (x3, y3, z3) = (c.x, c.y, c.z);
        (x1 * y2 * z3 - x1 * y3 * z2 - x2 * y1 * z3 + x3 * y1 * z2 + x2 * y3 * z1 - x3 * y2 * z1)
            / 6.0
    }

    #[test]
    fn unit_simplex() {
        let a = Point3::new(1.0, 0.0, 0.0);
        let b = Point3::new(0.0, 1.0, 0.0);
        let c = Point3::new(0.0, 0.0, 1.0);
        assert_eq!(signed_triangle_volume(a, b, c), 1.0 / 6.0);
        assert_eq!(signed_triangle_volume(a, c, b), -1.0 / 6.0);
        assert_eq!(signed_triangle_volume(a, a, c), 0.0);
    }

    #[test]
    fn matches_term_expansion() {
        let pts = [
            Point3::new(1.5, -2.0, 0.25),
            Point3::new(-3.0, 4.5, 2.0),
            Point3::new(0.5, 0.75, -6.0),
        ];
        let v = signed_triangle_volume(pts[0], pts[1], pts[2]);
        assert!((v - expanded(pts[0], pts[1], pts[2])).abs() < 1e-12);
    }

    #[test]
    fn cube_volumes() {
        let cube = fixtures::unit_cube();
        assert!((mesh_volume(&cube).unwrap() - 0.001).abs() < 1e-12);
        assert!((mesh_volume(&fixtures::cube_with_cavity()).unwrap() - 0.875).abs() < 1e-12);
        assert!((mesh_volume(&fixtures::two_cubes()).unwrap() - 0.002).abs() < 1e-15);
    }

    #[test]
    fn reversed_cube_has_same_volume() {
        let cube = fixtures::unit_cube();
        assert_eq!(
            signed_volume_cm3(&cube.reversed()),
            -signed_volume_cm3(&cube)
        );
        assert_eq!(
            mesh_volume(&cube.reversed()).unwrap(),
            mesh_volume(&cube).unwrap()
        );
    }

    #[test]
    fn open_mesh_is_an_error() {
        match mesh_volume(&fixtures::holed_cube()) {
            Err(GeometryError::NotWatertight(report)) => assert_eq!(report.open_edges.len(), 4),
            other => panic!("expected NotWatertight, got {other:?}"),
        }
    }

    #[test]
    fn scaling() {
        let cube = fixtures::unit_cube();
        let v2 = mesh_volume(&scale_mesh(&cube, 2.0).unwrap()).unwrap();
        assert!((v2 - 0.008).abs() < 1e-15);
        let v10 = mesh_volume(&scale_mesh(&cube, 10.0).unwrap()).unwrap();
        assert!((v10 - 1.0).abs() < 1e-12);
        assert_eq!(scale_mesh(&cube, 1.0).unwrap(), cube);
        assert!(matches!(
            scale_mesh(&cube, 0.0),
            Err(GeometryError::NonPositiveScale(_))
        ));
        assert!(matches!(
            scale_mesh(&cube, -1.0),
            Err(GeometryError::NonPositiveScale(_))
        ));
    }

    #[test]
    fn units_per_cm_rescales() {
        // A cube 10 units on a side at 10 units/cm is 1 cm³.
        let cube = scale_mesh(&fixtures::unit_cube(), 10.0)
            .unwrap()
            .with_units_per_cm(10.0)
            .unwrap();
        assert!((mesh_volume(&cube).unwrap() - 0.001).abs() < 1e-15);
        assert_eq!(mesh_stats(&cube).extent, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn stats() {
        let cube = fixtures::unit_cube();
        let s = mesh_stats(&cube);
        assert_eq!((s.triangles, s.vertices), (12, 8));
        assert_eq!(s.extent, [1.0, 1.0, 1.0]);
        assert!(s.watertight);

        let mut with_empty = cube.clone();
        with_empty.sections.push(MeshSection::new("empty"));
        let s2 = mesh_stats(&with_empty);
        assert_eq!((s2.triangles, s2.vertices), (12, 8));
        assert!(s2.watertight);
    }
}
