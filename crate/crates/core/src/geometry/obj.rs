//! Reader and writer for the triangulated OBJ subset used for class meshes.
//!
//! Accepted directives: `v x y z`, `f i j k` (1-based, no slashes),
//! `o name` / `g name` (start a section), `#` comments and blank lines.
//! Anything else is a [`GeometryError::MalformedLine`].

use std::collections::HashMap;
use std::fmt::Write as _;

use super::mesh::{is_degenerate, Mesh, MeshSection, Point3, Triangle};
use super::GeometryError;

/// Parses OBJ-subset text into a [`Mesh`].
///
/// A vertex belongs to the section it is declared in. A face that refers
/// to a vertex declared in another section gets its own copy of that
/// vertex. Sections that end up without faces are discarded.
pub fn parse_obj(id: &str, bytes: &[u8]) -> Result<Mesh, GeometryError> {
    let text = std::str::from_utf8(bytes).map_err(|e| GeometryError::MalformedLine {
        line: 0,
        message: format!("content is not UTF-8: {e}"),
    })?;

    let mut sections = vec![MeshSection::new("default")];
    // Declared vertex -> (section, local index).
    let mut declared: Vec<(usize, usize)> = Vec::new();
    // Per section: declared vertex -> local copy.
    let mut imported: Vec<HashMap<usize, usize>> = vec![HashMap::new()];

    for (n, raw) in text.split('\n').enumerate() {
        let line_no = n + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let mut tokens = line.split_whitespace();
        let Some(directive) = tokens.next() else {
            continue;
        };
        if directive.starts_with('#') {
            continue;
        }
        let malformed = |message: String| GeometryError::MalformedLine {
            line: line_no,
            message,
        };
        match directive {
            "v" => {
                let coords: Vec<&str> = tokens.collect();
                if coords.len() != 3 {
                    return Err(malformed(format!(
                        "vertex needs 3 coordinates, found {}",
                        coords.len()
                    )));
                }
                let mut xyz = [0.0; 3];
                for (slot, tok) in xyz.iter_mut().zip(&coords) {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| malformed(format!("bad coordinate {tok:?}")))?;
                    if !v.is_finite() {
                        return Err(malformed(format!("non-finite coordinate {tok:?}")));
                    }
                    *slot = v;
                }
                let current = sections.len() - 1;
                let section = &mut sections[current];
                declared.push((current, section.vertices.len()));
                section.vertices.push(Point3::from(xyz));
            }
            "f" => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() > 3 {
                    return Err(GeometryError::NonTriangleFace {
                        line: line_no,
                        vertices: refs.len(),
                    });
                }
                if refs.len() < 3 {
                    return Err(malformed(format!(
                        "face needs 3 vertex indices, found {}",
                        refs.len()
                    )));
                }
                let current = sections.len() - 1;
                let mut local = [0usize; 3];
                for (slot, tok) in local.iter_mut().zip(&refs) {
                    let idx: usize = tok
                        .parse()
                        .map_err(|_| malformed(format!("bad vertex index {tok:?}")))?;
                    if idx == 0 || idx > declared.len() {
                        return Err(GeometryError::IndexOutOfRange {
                            line: Some(line_no),
                            index: idx,
                            len: declared.len(),
                        });
                    }
                    let global = idx - 1;
                    let (owner, owner_local) = declared[global];
                    *slot = if owner == current {
                        owner_local
                    } else {
                        let p = sections[owner].vertices[owner_local];
                        let section = &mut sections[current];
                        *imported[current].entry(global).or_insert_with(|| {
                            section.vertices.push(p);
                            section.vertices.len() - 1
                        })
                    };
                }
                let tri = Triangle(local);
                let section = &mut sections[current];
                if is_degenerate(section, &tri) {
                    return Err(GeometryError::DegenerateTriangle {
                        section: section.name.clone(),
                        triangle: section.triangles.len(),
                        line: Some(line_no),
                    });
                }
                section.triangles.push(tri);
            }
            "o" | "g" => {
                let name = line.trim()[1..].trim();
                let name = if name.is_empty() {
                    format!("section{}", sections.len())
                } else {
                    name.to_string()
                };
                sections.push(MeshSection::new(name));
                imported.push(HashMap::new());
            }
            other => return Err(malformed(format!("unsupported directive {other:?}"))),
        }
    }

    sections.retain(|s| !s.triangles.is_empty());
    if sections.is_empty() {
        return Err(GeometryError::EmptyMesh);
    }
    Ok(Mesh {
        id: id.to_string(),
        sections,
        units_per_cm: 1.0,
    })
}

/// Serializes a mesh to the OBJ subset; `parse_obj` reads it back exactly.
pub fn write_obj(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", mesh.id);
    let mut base = 0usize;
    for section in &mesh.sections {
        let _ = writeln!(out, "o {}", section.name);
        for v in &section.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &section.triangles {
            let [a, b, c] = t.0;
            let _ = writeln!(out, "f {} {} {}", a + base + 1, b + base + 1, c + base + 1);
        }
        base += section.vertices.len();
    }
    out
}
