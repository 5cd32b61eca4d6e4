//! Sectioned triangle meshes: parsing, closure checks, scaling and
//! signed-volume measurement.

pub mod fixtures;
mod mesh;
mod obj;
mod registry;
mod volume;
mod watertight;

use thiserror::Error;

pub use mesh::{Mesh, MeshSection, MeshStats, Point3, Triangle};
pub use obj::{parse_obj, write_obj};
pub use registry::{MeshRegistry, RegistryEntry};
pub use volume::{
    mesh_stats, mesh_volume, scale_mesh, section_signed_volumes, signed_triangle_volume,
    signed_volume_cm3,
};
pub use watertight::{validate_watertight, EdgeDefect, WatertightReport};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: face has {vertices} vertices, only triangles are accepted")]
    NonTriangleFace { line: usize, vertices: usize },
    #[error("{}vertex index {index} out of range (1..={len})", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    IndexOutOfRange {
        line: Option<usize>,
        index: usize,
        len: usize,
    },
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("section {section:?}: triangle {triangle} has zero area{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    DegenerateTriangle {
        section: String,
        triangle: usize,
        line: Option<usize>,
    },
    #[error("section {section:?}: non-finite vertex {point:?}")]
    NonFiniteVertex { section: String, point: Point3 },
    #[error("mesh is not watertight: {} open, {} inconsistent, {} non-manifold edges",
        .0.open_edges.len(), .0.inconsistent_edges.len(), .0.non_manifold_edges.len())]
    NotWatertight(Box<WatertightReport>),
    #[error("scale must be a positive finite number, got {0}")]
    NonPositiveScale(f64),
    #[error("mesh registry: {0}")]
    Registry(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
