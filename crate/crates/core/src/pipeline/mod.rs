//! End-to-end scene processing: detections → crops → texture → density,
//! class mesh → volume, then mass = density × volume.

mod config;
mod manifest;
mod report;

use std::collections::BTreeMap;
use std::path::Path;

use image::RgbImage;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::density::{dominant_material, DensityDatabase, DensityError};
use crate::detection::{
    crop_and_resize, decode_all, filter_objectness, load_oracle_detections, nms, to_detections,
    Detection, DetectionError, RawPredictionFile,
};
use crate::geometry::{mesh_volume, scale_mesh, write_obj, GeometryError, Mesh, MeshRegistry};
use crate::material::{
    classify_material_ordered, MaterialDistribution, MaterialError, MaterialModel,
};

pub use config::{default_texture_map, PipelineConfig, TextureBackend};
pub use manifest::{ManifestEntry, RunManifest};
pub use report::{ObjectError, ObjectReport, Provenance, SceneReport, Totals};

/// Density used for objects whose texture is unknown.
pub const OTHER_DENSITY: f64 = 1.0;
pub const OTHER_MATERIAL: &str = "other";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("class {0:?} has no registered mesh")]
    UnregisteredClass(String),
    #[error("class {class:?}: mesh unavailable: {message}")]
    MeshUnavailable { class: String, message: String },
    #[error("oracle texture backend needs a \"material\" on every object")]
    MissingOracleMaterial,
    #[error("mass needs positive volume and density, got {volume} dm3 and {density} kg/dm3")]
    NonPositiveInput { volume: f64, density: f64 },
    #[error("object {index}: {source}")]
    Object {
        index: usize,
        #[source]
        source: Box<PipelineError>,
    },
}

impl PipelineError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `density · volume` in kg, for positive inputs (dm³ and kg/dm³).
pub fn object_mass(volume: f64, density: f64) -> Result<f64, PipelineError> {
    if !(volume > 0.0 && density > 0.0 && volume.is_finite() && density.is_finite()) {
        return Err(PipelineError::NonPositiveInput { volume, density });
    }
    Ok(density * volume)
}

/// The registered mesh for `class`, scaled by `scale` on top of the
/// registry's own scale.
pub fn assign_mesh(
    class: &str,
    registry: &MeshRegistry,
    scale: f64,
) -> Result<Mesh, PipelineError> {
    let mesh = registry
        .load_mesh(class)
        .ok_or_else(|| PipelineError::UnregisteredClass(class.to_string()))??;
    Ok(scale_mesh(&mesh, scale)?)
}

/// A class mesh ready for use: scaled, measured and fingerprinted.
#[derive(Debug, Clone)]
pub struct ClassMesh {
    pub mesh: Mesh,
    pub volume: Result<f64, String>,
    pub sha256: String,
}

impl ClassMesh {
    fn new(mesh: Mesh, sha256: String) -> Self {
        let volume = mesh_volume(&mesh).map_err(|e| e.to_string());
        Self {
            mesh,
            volume,
            sha256,
        }
    }
}

/// Where a scene's detections come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorBackend {
    /// Annotation JSON.
    Oracle,
    /// Raw grid-prediction JSON.
    Tensor,
}

impl DetectorBackend {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorBackend::Oracle => "oracle",
            DetectorBackend::Tensor => "tensor",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "oracle" => Some(Self::Oracle),
            "tensor" => Some(Self::Tensor),
            _ => None,
        }
    }
}

/// Loaded, read-only pipeline assets.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
    pub db: DensityDatabase,
    db_sha256: String,
    pub model: Option<MaterialModel>,
    model_sha256: Option<String>,
    meshes: BTreeMap<String, Result<ClassMesh, String>>,
}

impl Pipeline {
    /// Reads the registry, density table and material model named by the
    /// config. Class meshes that fail to load are remembered as errors and
    /// reported per object.
    pub fn load(config: PipelineConfig) -> Result<Self, PipelineError> {
        let registry = MeshRegistry::load(&config.resolve(&config.mesh_registry))?;

        let (db, db_sha256) = match &config.density_db {
            Some(p) => {
                let path = config.resolve(p);
                let text =
                    std::fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
                (
                    DensityDatabase::from_csv(&text)?,
                    sha256_hex(text.as_bytes()),
                )
            }
            None => (DensityDatabase::builtin(), builtin_db_sha()),
        };

        let (model, model_sha256) = match (&config.material_model, config.texture_backend) {
            (Some(p), TextureBackend::Model) => {
                let path = config.resolve(p);
                let text =
                    std::fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
                (
                    Some(MaterialModel::from_json(&text)?),
                    Some(sha256_hex(text.as_bytes())),
                )
            }
            _ => (None, None),
        };

        let mut meshes = BTreeMap::new();
        for class in &config.class_list {
            let Some(path) = registry.mesh_path(class) else {
                continue;
            };
            let loaded = (|| -> Result<ClassMesh, PipelineError> {
                let bytes = std::fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
                let mesh = assign_mesh(class, &registry, config.scale_for(class))?;
                Ok(ClassMesh::new(mesh, sha256_hex(&bytes)))
            })();
            meshes.insert(class.clone(), loaded.map_err(|e| e.to_string()));
        }

        Ok(Self {
            config,
            db,
            db_sha256,
            model,
            model_sha256,
            meshes,
        })
    }

    /// Builds a pipeline from in-memory assets. Mesh fingerprints hash the
    /// OBJ serialization.
    pub fn from_parts(
        config: PipelineConfig,
        db: DensityDatabase,
        model: Option<MaterialModel>,
        meshes: BTreeMap<String, Mesh>,
    ) -> Result<Self, PipelineError> {
        if config.texture_backend == TextureBackend::Model && model.is_none() {
            return Err(PipelineError::Config(
                "model backend without a model".into(),
            ));
        }
        let model_sha256 = model.as_ref().map(|m| sha256_hex(m.to_json().as_bytes()));
        let meshes = meshes
            .into_iter()
            .map(|(class, mesh)| {
                let scaled = scale_mesh(&mesh, config.scale_for(&class))
                    .map(|m| ClassMesh::new(m, sha256_hex(write_obj(&mesh).as_bytes())))
                    .map_err(|e| e.to_string());
                (class, scaled)
            })
            .collect();
        Ok(Self {
            config,
            db_sha256: String::new(),
            db,
            model,
            model_sha256,
            meshes,
        })
    }

    pub fn class_mesh(&self, class: &str) -> Result<&ClassMesh, PipelineError> {
        match self.meshes.get(class) {
            None => Err(PipelineError::UnregisteredClass(class.to_string())),
            Some(Err(message)) => Err(PipelineError::MeshUnavailable {
                class: class.to_string(),
                message: message.clone(),
            }),
            Some(Ok(m)) => Ok(m),
        }
    }

    /// Detections for an image, before NMS. Tensor predictions are decoded
    /// and filtered by objectness first.
    pub fn detections(
        &self,
        backend: DetectorBackend,
        content: &str,
        image_w: u32,
        image_h: u32,
    ) -> Result<Vec<Detection>, PipelineError> {
        Ok(match backend {
            DetectorBackend::Oracle => {
                load_oracle_detections(content, image_w, image_h, Some(&self.config.class_list))?
            }
            DetectorBackend::Tensor => {
                let file: RawPredictionFile = serde_json::from_str(content)
                    .map_err(|e| DetectionError::SchemaError(e.to_string()))?;
                let boxes =
                    filter_objectness(decode_all(&file)?, self.config.objectness_threshold)?;
                to_detections(&boxes, image_w, image_h)
            }
        })
    }

    /// Texture class → (density table material, kg/dm³). Unmapped textures
    /// and a missing `other` record fall back to 1.0 kg/dm³.
    pub fn density_for_texture(&self, texture: &str) -> Result<(String, f64), PipelineError> {
        let target = self
            .config
            .texture_to_material
            .get(texture)
            .map(String::as_str)
            .unwrap_or(OTHER_MATERIAL);
        match self.db.lookup(target) {
            Ok(rho) => Ok((target.to_string(), rho)),
            Err(_) if target == OTHER_MATERIAL => Ok((OTHER_MATERIAL.to_string(), OTHER_DENSITY)),
            Err(e) => Err(e.into()),
        }
    }

    fn texture(
        &self,
        crop: &RgbImage,
        det: &Detection,
    ) -> Result<MaterialDistribution, PipelineError> {
        match self.config.texture_backend {
            TextureBackend::Oracle => det
                .material
                .as_deref()
                .map(MaterialDistribution::certain)
                .ok_or(PipelineError::MissingOracleMaterial),
            TextureBackend::Model => {
                let model = self.model.as_ref().ok_or(MaterialError::UntrainedModel)?;
                Ok(classify_material_ordered(
                    crop,
                    model,
                    self.config.channel_order,
                )?)
            }
        }
    }

    pub fn process_object(
        &self,
        image: &RgbImage,
        det: &Detection,
        detector: DetectorBackend,
    ) -> Result<ObjectReport, PipelineError> {
        let crop = crop_and_resize(image, &det.rect)?;
        let materials = self.texture(&crop, det)?;
        let dominant = dominant_material(&materials)?.to_string();

        // Solid objects: one density for the whole mesh volume.
        let (density_material, density) = if self.config.composite_density {
            let mut rho = 0.0;
            for (texture, p) in &materials.0 {
                rho += p * self.density_for_texture(texture)?.1;
            }
            ("composite".to_string(), rho)
        } else {
            self.density_for_texture(&dominant)?
        };

        let class_mesh = self.class_mesh(&det.class_name)?;
        let volume =
            class_mesh
                .volume
                .clone()
                .map_err(|message| PipelineError::MeshUnavailable {
                    class: det.class_name.clone(),
                    message,
                })?;
        let mass = object_mass(volume, density)?;

        Ok(ObjectReport {
            class_name: det.class_name.clone(),
            name: det.name.clone(),
            confidence: det.confidence,
            bbox: det.rect,
            materials,
            dominant_material: dominant,
            density_material,
            mesh_id: class_mesh.mesh.id.clone(),
            volume,
            density,
            mass,
            provenance: Provenance {
                detector: detector.name().to_string(),
                texture: self.config.texture_backend.name().to_string(),
                mesh_sha256: class_mesh.sha256.clone(),
                model_sha256: self.model_sha256.clone(),
                density_db_sha256: self.db_sha256.clone(),
            },
        })
    }

    /// Runs NMS, then every remaining detection through the object stages
    /// in descending confidence order. Failing objects are listed under
    /// `errors` and left out of the totals.
    pub fn process_scene(
        &self,
        image_id: &str,
        image: &RgbImage,
        detections: &[Detection],
        detector: DetectorBackend,
    ) -> Result<SceneReport, PipelineError> {
        let kept = nms(detections, self.config.nms_iou_threshold)?;
        let mut objects = Vec::new();
        let mut errors = Vec::new();
        for (index, det) in kept.iter().enumerate() {
            match self.process_object(image, det, detector) {
                Ok(report) => objects.push(report),
                Err(e) => errors.push(ObjectError {
                    object: index,
                    class_name: det.class_name.clone(),
                    message: PipelineError::Object {
                        index,
                        source: Box::new(e),
                    }
                    .to_string(),
                }),
            }
        }
        Ok(SceneReport::new(image_id, objects, errors))
    }
}

fn builtin_db_sha() -> String {
    sha256_hex(include_str!("../../data/densities.csv").as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::Rect;
    use crate::geometry::fixtures;

    fn oracle_config() -> PipelineConfig {
        PipelineConfig::from_json(
            r#"{"classList":["cube","chair","ghost"],"meshRegistry":"unused.json",
                "textureBackend":"oracle"}"#,
            ".",
        )
        .unwrap()
    }

    fn pipeline(config: PipelineConfig) -> Pipeline {
        let meshes = BTreeMap::from([
            ("cube".to_string(), fixtures::unit_cube()),
            ("chair".to_string(), fixtures::class_meshes()[2].1.clone()),
            ("holed".to_string(), fixtures::holed_cube()),
        ]);
        Pipeline::from_parts(config, DensityDatabase::builtin(), None, meshes).unwrap()
    }

    fn det(class: &str, material: Option<&str>, x: f64, conf: f64) -> Detection {
        let mut d = Detection::new(Rect::new(x, 0.0, 20.0, 20.0), class, conf);
        d.material = material.map(str::to_string);
        d
    }

    fn image() -> RgbImage {
        RgbImage::from_pixel(200, 50, image::Rgb([90, 90, 90]))
    }

    #[test]
    fn mass_arithmetic() {
        assert_eq!(object_mass(2.5, 8.0).unwrap(), 20.0);
        assert_eq!(object_mass(0.3, 1.0).unwrap(), 0.3);
        assert!((object_mass(0.001, 7.8).unwrap() - 0.0078).abs() < 1e-15);
        assert!(matches!(
            object_mass(0.0, 1.0),
            Err(PipelineError::NonPositiveInput { .. })
        ));
        assert!(object_mass(1.0, -1.0).is_err());
    }

    #[test]
    fn iron_cube() {
        let mut cfg = oracle_config();
        cfg.texture_to_material.insert("iron".into(), "iron".into());
        let p = pipeline(cfg);
        let report = p
            .process_scene(
                "img",
                &image(),
                &[det("cube", Some("iron"), 0.0, 1.0)],
                DetectorBackend::Oracle,
            )
            .unwrap();
        let o = &report.objects[0];
        assert!((o.volume - 0.001).abs() < 1e-15);
        assert_eq!(o.density, 7.8);
        assert!((o.mass - 0.0078).abs() < 1e-15);
    }

    #[test]
    fn metal_chair_mass_is_eight_times_volume() {
        let p = pipeline(oracle_config());
        let report = p
            .process_scene(
                "img",
                &image(),
                &[det("chair", Some("metal"), 0.0, 0.9)],
                DetectorBackend::Oracle,
            )
            .unwrap();
        let o = &report.objects[0];
        let v = mesh_volume(&fixtures::class_meshes()[2].1).unwrap();
        assert_eq!(o.density, 8.0);
        assert_eq!(o.density_material, "steel-avg");
        assert!((o.mass - 8.0 * v).abs() <= 1e-12 * o.mass);
    }

    #[test]
    fn empty_scene() {
        let p = pipeline(oracle_config());
        let r = p
            .process_scene("img", &image(), &[], DetectorBackend::Oracle)
            .unwrap();
        assert!(r.objects.is_empty() && r.errors.is_empty());
        assert_eq!(r.totals, Totals::default());
    }

    #[test]
    fn totals_and_order() {
        let p = pipeline(oracle_config());
        let dets = [
            det("cube", Some("wood"), 0.0, 0.6),
            det("chair", Some("fabric"), 50.0, 0.9),
        ];
        let r = p
            .process_scene("img", &image(), &dets, DetectorBackend::Oracle)
            .unwrap();
        assert_eq!(r.objects.len(), 2);
        assert_eq!(r.objects[0].class_name, "chair");
        assert_eq!(r.totals.mass, r.objects[0].mass + r.objects[1].mass);
        assert_eq!(r.totals.volume, r.objects[0].volume + r.objects[1].volume);
    }

    #[test]
    fn per_object_errors_do_not_abort() {
        let mut cfg = oracle_config();
        cfg.class_list.push("holed".into());
        cfg.texture_to_material
            .insert("glass".into(), "glass".into());
        let p = pipeline(cfg);
        let dets = [
            det("cube", Some("wood"), 0.0, 0.9),
            det("ghost", Some("wood"), 30.0, 0.8),
            det("holed", Some("wood"), 60.0, 0.7),
            det("cube", None, 90.0, 0.6),
            det("cube", Some("glass"), 120.0, 0.5),
        ];
        let r = p
            .process_scene("img", &image(), &dets, DetectorBackend::Oracle)
            .unwrap();
        assert_eq!(r.objects.len(), 1);
        let objs: Vec<usize> = r.errors.iter().map(|e| e.object).collect();
        assert_eq!(objs, vec![1, 2, 3, 4]);
        assert!(r.errors[0].message.contains("no registered mesh"));
        assert!(r.errors[1].message.contains("not watertight"));
        assert!(r.errors[3].message.contains("unknown material"));
        assert_eq!(r.totals.mass, r.objects[0].mass);
    }

    #[test]
    fn unknown_texture_is_other() {
        let p = pipeline(oracle_config());
        assert_eq!(
            p.density_for_texture("foliage").unwrap(),
            ("other".into(), 1.0)
        );
        assert_eq!(
            p.density_for_texture("other").unwrap(),
            ("other".into(), 1.0)
        );
        assert_eq!(p.density_for_texture("wood").unwrap(), ("wood".into(), 0.7));
    }

    #[test]
    fn composite_flag_weights_textures() {
        let mut cfg = oracle_config();
        cfg.composite_density = true;
        let p = pipeline(cfg);
        let o = p
            .process_object(
                &image(),
                &det("cube", Some("fabric"), 0.0, 1.0),
                DetectorBackend::Oracle,
            )
            .unwrap();
        assert_eq!(o.density, 1.6);
        assert_eq!(o.density_material, "composite");
    }

    #[test]
    fn scaled_class_mesh() {
        let mut cfg = oracle_config();
        cfg.per_class_scale.insert("cube".into(), 2.0);
        let p = pipeline(cfg);
        let v = p.class_mesh("cube").unwrap().volume.clone().unwrap();
        assert!((v - 0.008).abs() < 1e-15);
    }
}
