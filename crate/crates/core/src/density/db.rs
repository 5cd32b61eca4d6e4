use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DensityError;

const BUILTIN_CSV: &str = include_str!("../../data/densities.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub material: String,
    /// kg/dm³
    pub density: f64,
    pub source: String,
}

/// Material densities keyed by lowercase name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DensityDatabase {
    pub records: BTreeMap<String, DensityRecord>,
}

fn key(name: &str) -> String {
    name.trim().to_lowercase()
}

#[derive(Deserialize)]
struct Row {
    material: String,
    density_kg_per_dm3: f64,
    #[serde(default)]
    source: String,
}

impl DensityDatabase {
    /// The shipped table (`data/densities.csv`).
    pub fn builtin() -> Self {
        Self::from_csv(BUILTIN_CSV).expect("builtin density table parses")
    }

    /// Parses `material,density_kg_per_dm3,source` CSV; `#` lines are
    /// comments. Names must be unique ignoring case and densities positive.
    pub fn from_csv(text: &str) -> Result<Self, DensityError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let err = |line: u64, message: String| DensityError::Csv { line, message };

        let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
        let expected = ["material", "density_kg_per_dm3", "source"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(err(
                reader.position().line(),
                format!("header must be {}", expected.join(",")),
            ));
        }

        let mut records = BTreeMap::new();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                err(line, e.to_string())
            })?;
            let k = key(&row.material);
            if k.is_empty() {
                return Err(err(0, "empty material name".into()));
            }
            if !(row.density_kg_per_dm3.is_finite() && row.density_kg_per_dm3 > 0.0) {
                return Err(err(
                    0,
                    format!(
                        "{k}: density must be positive, got {}",
                        row.density_kg_per_dm3
                    ),
                ));
            }
            if records.contains_key(&k) {
                return Err(err(0, format!("duplicate material {k:?}")));
            }
            records.insert(
                k.clone(),
                DensityRecord {
                    material: k,
                    density: row.density_kg_per_dm3,
                    source: row.source,
                },
            );
        }
        Ok(Self { records })
    }

    pub fn get(&self, material: &str) -> Option<&DensityRecord> {
        self.records.get(&key(material))
    }

    /// Density in kg/dm³, matching names case-insensitively after trimming.
    pub fn lookup(&self, material: &str) -> Result<f64, DensityError> {
        self.get(material)
            .map(|r| r.density)
            .ok_or_else(|| DensityError::UnknownMaterial(material.to_string()))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
