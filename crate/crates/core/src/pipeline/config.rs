use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::detection::{DEFAULT_NMS_IOU, DEFAULT_OBJECTNESS_THRESHOLD};
use crate::material::ChannelOrder;

/// Where texture classes come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextureBackend {
    /// Trained bag-of-words model (`materialModel`).
    #[default]
    Model,
    /// The `material` field of each annotated object.
    Oracle,
}

impl TextureBackend {
    pub fn name(&self) -> &'static str {
        match self {
            TextureBackend::Model => "model",
            TextureBackend::Oracle => "oracle",
        }
    }
}

fn default_objectness() -> f64 {
    DEFAULT_OBJECTNESS_THRESHOLD
}

fn default_nms() -> f64 {
    DEFAULT_NMS_IOU
}

/// Texture class → density table material used when a config does not
/// list its own mapping.
pub fn default_texture_map() -> BTreeMap<String, String> {
    [
        ("wood", "wood"),
        ("metal", "steel-avg"),
        ("plastic", "plastic"),
        ("fabric", "fabric"),
        ("skin", "skin"),
        ("hair", "hair"),
        ("other", "other"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

/// Pipeline configuration file. Relative paths resolve against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PipelineConfig {
    pub class_list: Vec<String>,
    pub mesh_registry: PathBuf,
    /// Density CSV; the built-in table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_db: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material_model: Option<PathBuf>,
    #[serde(default)]
    pub texture_backend: TextureBackend,
    #[serde(default = "default_texture_map")]
    pub texture_to_material: BTreeMap<String, String>,
    #[serde(default = "default_objectness")]
    pub objectness_threshold: f64,
    #[serde(default = "default_nms")]
    pub nms_iou_threshold: f64,
    #[serde(default)]
    pub per_class_scale: BTreeMap<String, f64>,
    /// Weight densities by the whole texture distribution instead of using
    /// the dominant texture only.
    #[serde(default)]
    pub composite_density: bool,
    #[serde(default)]
    pub channel_order: ChannelOrder,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
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

    pub fn scale_for(&self, class: &str) -> f64 {
        self.per_class_scale.get(class).copied().unwrap_or(1.0)
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.class_list.is_empty() {
            return bad("classList is empty".into());
        }
        if !(0.0..=1.0).contains(&self.objectness_threshold) {
            return bad(format!(
                "objectnessThreshold {} outside [0, 1]",
                self.objectness_threshold
            ));
        }
        if !(self.nms_iou_threshold > 0.0 && self.nms_iou_threshold < 1.0) {
            return bad(format!(
                "nmsIouThreshold {} outside (0, 1)",
                self.nms_iou_threshold
            ));
        }
        for (class, s) in &self.per_class_scale {
            if !(s.is_finite() && *s > 0.0) {
                return bad(format!(
                    "perClassScale[{class:?}] must be positive, got {s}"
                ));
            }
        }
        if self.texture_backend == TextureBackend::Model && self.material_model.is_none() {
            return bad("textureBackend \"model\" needs materialModel".into());
        }
        Ok(())
    }
}
