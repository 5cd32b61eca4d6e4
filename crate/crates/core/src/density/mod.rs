//! Material densities, composite densities and density error scoring.

mod db;
mod reference;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::material::MaterialDistribution;

pub use db::{DensityDatabase, DensityRecord};
pub use reference::{reference_objects, ErrorRow, ReferenceObject};

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("unknown material {0:?}")]
    UnknownMaterial(String),
    #[error("composition profile has no components")]
    EmptyProfile,
    #[error("composition profile: {0}")]
    InvalidProfile(String),
    #[error("literary density must be positive, got {0}")]
    NonPositiveLiterary(f64),
    #[error("material distribution is empty")]
    EmptyDistribution,
    #[error("density table line {line}: {message}")]
    Csv { line: u64, message: String },
}

/// One constituent of a composition profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub material: String,
    pub fraction: f64,
}

/// Weighted material mix of an object, e.g. a phone's internals.
/// Fractions may sum to less than 1 (partial listings).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionProfile {
    pub name: String,
    pub components: Vec<Component>,
}

impl CompositionProfile {
    pub fn from_json(text: &str) -> Result<Self, DensityError> {
        let p: CompositionProfile =
            serde_json::from_str(text).map_err(|e| DensityError::InvalidProfile(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if self.components.is_empty() {
            return Err(DensityError::EmptyProfile);
        }
        for c in &self.components {
            if !(c.fraction > 0.0 && c.fraction <= 1.0) {
                return Err(DensityError::InvalidProfile(format!(
                    "{}: fraction {} outside (0, 1]",
                    c.material, c.fraction
                )));
            }
        }
        let total: f64 = self.components.iter().map(|c| c.fraction).sum();
        if total > 1.0 + 1e-9 {
            return Err(DensityError::InvalidProfile(format!(
                "fractions sum to {total} > 1"
            )));
        }
        Ok(())
    }
}

/// `Σ fᵢ·ρᵢ / Σ fᵢ`: the fraction-weighted mean density, renormalized so a
/// profile that lists only part of the object still averages correctly.
pub fn composite_density(
    db: &DensityDatabase,
    profile: &CompositionProfile,
) -> Result<f64, DensityError> {
    profile.validate()?;
    let mut weighted = 0.0;
    let mut total = 0.0;
    for c in &profile.components {
        weighted += c.fraction * db.lookup(&c.material)?;
        total += c.fraction;
    }
    Ok(weighted / total)
}

/// `100 · |measured − literary| / literary`.
pub fn percent_error(literary: f64, measured: f64) -> Result<f64, DensityError> {
    if !(literary > 0.0) {
        return Err(DensityError::NonPositiveLiterary(literary));
    }
    Ok(100.0 * (measured - literary).abs() / literary)
}

/// Highest-confidence material; ties go to the alphabetically first name.
pub fn dominant_material(dist: &MaterialDistribution) -> Result<&str, DensityError> {
    let mut best: Option<(&str, f64)> = None;
    // BTreeMap iterates alphabetically, so a strict `>` keeps the first.
    for (name, &p) in &dist.0 {
        if best.is_none_or(|(_, b)| p > b) {
            best = Some((name, p));
        }
    }
    best.map(|(n, _)| n).ok_or(DensityError::EmptyDistribution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn dist(entries: &[(&str, f64)]) -> MaterialDistribution {
        MaterialDistribution(entries.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    #[test]
    fn phone_and_cat_profiles() {
        let db = DensityDatabase::builtin();
        let phone =
            CompositionProfile::from_json(include_str!("../../data/profiles/phone.json")).unwrap();
        // 0.25·1.1 + 0.23·1.2 + 0.20·7.8 + 0.14·2.7 + 0.07·9.0 + 0.06·11.3
        //   = 3.797 over a total fraction of 0.95.
        let rho = composite_density(&db, &phone).unwrap();
        assert!((rho - 3.797 / 0.95).abs() < 1e-12);
        assert!((rho - 4.0).abs() <= 0.05);

        let cat =
            CompositionProfile::from_json(include_str!("../../data/profiles/cat.json")).unwrap();
        let rho = composite_density(&db, &cat).unwrap();
        assert!((rho - 1.06).abs() < 1e-12);
    }

    #[test]
    fn single_component_is_exact() {
        let db = DensityDatabase::builtin();
        let p = CompositionProfile {
            name: "x".into(),
            components: vec![Component {
                material: "copper".into(),
                fraction: 0.3,
            }],
        };
        assert_eq!(composite_density(&db, &p).unwrap(), 9.0);
    }

    #[test]
    fn profile_errors() {
        let db = DensityDatabase::builtin();
        let empty = CompositionProfile {
            name: "x".into(),
            components: vec![],
        };
        assert!(matches!(
            composite_density(&db, &empty),
            Err(DensityError::EmptyProfile)
        ));
        let unknown = CompositionProfile {
            name: "x".into(),
            components: vec![Component {
                material: "unobtainium".into(),
                fraction: 0.5,
            }],
        };
        assert!(matches!(
            composite_density(&db, &unknown),
            Err(DensityError::UnknownMaterial(_))
        ));
        let over = r#"{"name":"x","components":[{"material":"iron","fraction":0.7},
            {"material":"lead","fraction":0.4}]}"#;
        assert!(CompositionProfile::from_json(over).is_err());
        let zero = r#"{"name":"x","components":[{"material":"iron","fraction":0}]}"#;
        assert!(CompositionProfile::from_json(zero).is_err());
    }

    #[test]
    fn percent_error_examples() {
        assert!((percent_error(4.0, 1.2).unwrap() - 70.0).abs() < 1e-12);
        assert!((percent_error(2.1, 0.7).unwrap() - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(percent_error(3.3, 3.3).unwrap(), 0.0);
        assert!(matches!(
            percent_error(0.0, 1.0),
            Err(DensityError::NonPositiveLiterary(_))
        ));
    }

    #[test]
    fn dominant_material_rules() {
        let phone = dist(&[
            ("plastic", 0.94),
            ("glass", 0.04),
            ("metal", 0.01),
            ("other", 0.01),
        ]);
        assert_eq!(dominant_material(&phone).unwrap(), "plastic");
        assert_eq!(
            dominant_material(&dist(&[("b", 0.5), ("a", 0.5)])).unwrap(),
            "a"
        );
        assert_eq!(dominant_material(&dist(&[("wood", 1.0)])).unwrap(), "wood");
        assert!(matches!(
            dominant_material(&MaterialDistribution(BTreeMap::new())),
            Err(DensityError::EmptyDistribution)
        ));
    }
}
