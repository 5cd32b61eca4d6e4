use serde::{Deserialize, Serialize};

use crate::detection::Rect;
use crate::material::MaterialDistribution;

/// Which backends and asset files produced an object's numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub detector: String,
    pub texture: String,
    pub mesh_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_sha256: Option<String>,
    pub density_db_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObjectReport {
    #[serde(rename = "class")]
    pub class_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub confidence: f64,
    pub bbox: Rect,
    pub materials: MaterialDistribution,
    /// Dominant texture class.
    pub dominant_material: String,
    /// Density-table material the texture class mapped to.
    pub density_material: String,
    pub mesh_id: String,
    #[serde(rename = "volume_dm3")]
    pub volume: f64,
    #[serde(rename = "density_kg_dm3")]
    pub density: f64,
    #[serde(rename = "mass_kg")]
    pub mass: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Totals {
    #[serde(rename = "volume_dm3")]
    pub volume: f64,
    #[serde(rename = "mass_kg")]
    pub mass: f64,
}

/// A detection that could not be turned into an object report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectError {
    /// Position in the post-NMS detection order.
    pub object: usize,
    #[serde(rename = "class")]
    pub class_name: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SceneReport {
    pub image: String,
    pub objects: Vec<ObjectReport>,
    pub totals: Totals,
    pub errors: Vec<ObjectError>,
}

impl SceneReport {
    /// Builds the report, summing totals over `objects` in order.
    pub fn new(
        image: impl Into<String>,
        objects: Vec<ObjectReport>,
        errors: Vec<ObjectError>,
    ) -> Self {
        let totals = Totals {
            volume: objects.iter().map(|o| o.volume).sum(),
            mass: objects.iter().map(|o| o.mass).sum(),
        };
        Self {
            image: image.into(),
            objects,
            totals,
            errors,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
