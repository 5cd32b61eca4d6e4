use serde::{Deserialize, Serialize};

use super::{percent_error, DensityError};

const REFERENCE_CSV: &str = include_str!("../../data/reference_objects.csv");

/// A reference scene object with its published error figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceObject {
    pub object: String,
    pub material: String,
    pub literary: f64,
    pub measured: f64,
    pub published_error: f64,
}

/// Literary vs measured density for one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorRow {
    pub object_name: String,
    pub material_type: String,
    pub literary_density: f64,
    pub measured_density: f64,
    pub percent_error: f64,
}

impl ErrorRow {
    pub fn new(
        object_name: impl Into<String>,
        material_type: impl Into<String>,
        literary: f64,
        measured: f64,
    ) -> Result<Self, DensityError> {
        Ok(Self {
            object_name: object_name.into(),
            material_type: material_type.into(),
            literary_density: literary,
            measured_density: measured,
            percent_error: percent_error(literary, measured)?,
        })
    }
}

impl ReferenceObject {
    pub fn error_row(&self) -> ErrorRow {
        ErrorRow::new(&self.object, &self.material, self.literary, self.measured)
            .expect("reference densities are positive")
    }
}

/// The fifteen reference objects shipped in `data/reference_objects.csv`.
pub fn reference_objects() -> Vec<ReferenceObject> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(REFERENCE_CSV.as_bytes())
        .deserialize()
        .map(|r| r.expect("reference table parses"))
        .collect()
}
