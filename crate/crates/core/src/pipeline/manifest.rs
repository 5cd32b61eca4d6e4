use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DetectorBackend, PipelineError};

/// One image and the file holding its detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub detections: PathBuf,
    pub backend: DetectorBackend,
}

/// Batch description for `run`. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config: PathBuf,
    pub output: PathBuf,
    #[serde(default)]
    pub entries: Vec<ManifestEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunManifest {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, PipelineError> {
        let mut m: RunManifest = serde_json::from_str(text)
            .map_err(|e| PipelineError::Config(format!("manifest: {e}")))?;
        m.base_dir = base_dir.into();
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_json(
            &text,
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        )
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    /// Every referenced input file, in entry order.
    pub fn inputs(&self) -> Vec<PathBuf> {
        self.entries
            .iter()
            .flat_map(|e| [self.resolve(&e.image), self.resolve(&e.detections)])
            .collect()
    }

    /// Checks that all referenced inputs exist.
    pub fn check_inputs(&self) -> Result<(), PipelineError> {
        for p in self.inputs() {
            if !p.is_file() {
                return Err(PipelineError::io(&p, "no such file"));
            }
        }
        Ok(())
    }
}
