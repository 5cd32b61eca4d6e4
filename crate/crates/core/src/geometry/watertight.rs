use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mesh::Mesh;

/// An undirected edge that is not shared by exactly two oppositely wound
/// triangles. `a < b` are section-local vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDefect {
    pub section: String,
    pub a: usize,
    pub b: usize,
    /// Number of triangles that use the edge.
    pub uses: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WatertightReport {
    pub watertight: bool,
    /// Edges used by a single triangle.
    pub open_edges: Vec<EdgeDefect>,
    /// Edges used twice, both times in the same direction.
    pub inconsistent_edges: Vec<EdgeDefect>,
    /// Edges used by three or more triangles.
    pub non_manifold_edges: Vec<EdgeDefect>,
}

impl WatertightReport {
    pub fn defect_count(&self) -> usize {
        self.open_edges.len() + self.inconsistent_edges.len() + self.non_manifold_edges.len()
    }
}

/// Checks, per section, that every edge is used by exactly two triangles
/// that traverse it in opposite directions.
pub fn validate_watertight(mesh: &Mesh) -> WatertightReport {
    let mut report = WatertightReport::default();
    for section in &mesh.sections {
        // (lo, hi) -> (uses lo->hi, uses hi->lo)
        let mut edges: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for t in &section.triangles {
            for (from, to) in t.edges() {
                let entry = edges.entry((from.min(to), from.max(to))).or_default();
                if from < to {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        for ((a, b), (fwd, back)) in edges {
            let uses = fwd + back;
            let defect = || EdgeDefect {
                section: section.name.clone(),
                a,
                b,
                uses,
            };
            match uses {
                1 => report.open_edges.push(defect()),
                2 if fwd != 1 => report.inconsistent_edges.push(defect()),
                2 => {}
                _ => report.non_manifold_edges.push(defect()),
            }
        }
    }
    report.watertight = report.defect_count() == 0;
    report
}
