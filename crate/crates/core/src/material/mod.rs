//! Texture classification: mean-subtracted colour/gradient features
//! quantized into k-means visual words, scored with naive Bayes.

mod features;
mod kmeans;
mod model;
pub mod rng;
pub mod synthetic;

use thiserror::Error;

pub use features::{
    extract_features, preprocess_crop, ChannelMeans, ChannelOrder, FeatureVector, Raster,
    COLOR_BINS, FEATURE_LEN, ORIENTATION_BINS,
};
pub use kmeans::{
    assign_word, initial_indices, kmeans_fit, lloyd, objective, squared_distance,
    ClusterAssignment, Codebook, KMeansFit, KMeansParams, DEFAULT_K, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use model::{
    classify_material, classify_material_ordered, posterior_for_word, train_material_model,
    LabelledCrop, MaterialDistribution, MaterialModel, FMD_CLASSES,
};

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("crop must be 224x224, got {width}x{height}")]
    BadDimensions { width: u32, height: u32 },
    #[error("k must be at least 1, got {0}")]
    InvalidK(usize),
    #[error("need {needed} distinct feature vectors, have {got}")]
    TooFewVectors { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("class {0:?} has no training crops")]
    EmptyClass(String),
    #[error("training label {0:?} is not a declared class")]
    UnknownLabel(String),
    #[error("material model is not trained")]
    UntrainedModel,
    #[error("material model file: {0}")]
    ModelFormat(String),
}
