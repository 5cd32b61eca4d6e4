use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use super::obj::parse_obj;
use super::volume::scale_mesh;
use super::GeometryError;

fn one() -> f64 {
    1.0
}

/// One class entry of the registry file: `{"mesh": path, "scale": s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct RegistryEntry {
    pub mesh: PathBuf,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "one")]
    pub units_per_cm: f64,
}

/// Class name → canonical mesh file. Relative paths resolve against the
/// directory holding the registry file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshRegistry {
    pub entries: BTreeMap<String, RegistryEntry>,
    pub base_dir: PathBuf,
}

impl MeshRegistry {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, GeometryError> {
        let entries: BTreeMap<String, RegistryEntry> =
            serde_json::from_str(text).map_err(|e| GeometryError::Registry(e.to_string()))?;
        for (class, entry) in &entries {
            for (what, v) in [("scale", entry.scale), ("unitsPerCm", entry.units_per_cm)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(GeometryError::Registry(format!(
                        "class {class:?}: {what} must be positive, got {v}"
                    )));
                }
            }
        }
        Ok(Self {
            entries,
            base_dir: base_dir.into(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path).map_err(|source| GeometryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base)
    }

    pub fn get(&self, class: &str) -> Option<&RegistryEntry> {
        self.entries.get(class)
    }

    pub fn mesh_path(&self, class: &str) -> Option<PathBuf> {
        self.get(class).map(|e| self.base_dir.join(&e.mesh))
    }

    /// Reads and parses the class mesh, applying the registry scale and
    /// unit factor. `None` when the class is not registered.
    pub fn load_mesh(&self, class: &str) -> Option<Result<Mesh, GeometryError>> {
        let entry = self.get(class)?;
        let path = self.base_dir.join(&entry.mesh);
        Some((|| {
            let bytes = std::fs::read(&path).map_err(|source| GeometryError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| class.to_string());
            let mesh = parse_obj(&id, &bytes)?.with_units_per_cm(entry.units_per_cm)?;
            scale_mesh(&mesh, entry.scale)
        })())
    }
}
