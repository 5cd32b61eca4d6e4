use std::collections::BTreeMap;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::features::{extract_features, preprocess_crop, ChannelMeans, ChannelOrder};
use super::kmeans::{assign_word, kmeans_fit, Codebook, KMeansParams};
use super::MaterialError;

/// Texture classes of the Flickr Material Database plus a catch-all.
pub const FMD_CLASSES: [&str; 11] = [
    "fabric", "foliage", "glass", "leather", "metal", "plastic", "water", "paper", "wood", "stone",
    "other",
];

/// Material name → confidence; entries sum to 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MaterialDistribution(pub BTreeMap<String, f64>);

impl MaterialDistribution {
    /// All mass on one material.
    pub fn certain(material: impl Into<String>) -> Self {
        Self(BTreeMap::from([(material.into(), 1.0)]))
    }

    pub fn get(&self, material: &str) -> f64 {
        self.0.get(material).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Trained bag-of-visual-words texture model.
///
/// Serialized as
/// `{"classes", "k", "seed", "channelMeans", "centroids", "wordFreq"}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MaterialModel {
    pub classes: Vec<String>,
    pub k: usize,
    pub seed: u64,
    pub channel_means: ChannelMeans,
    pub centroids: Vec<Vec<f64>>,
    /// Per class, add-one smoothed `P(word | class)`.
    pub word_freq: BTreeMap<String, Vec<f64>>,
}

impl MaterialModel {
    pub fn codebook(&self) -> Codebook {
        Codebook {
            k: self.k,
            centroids: self.centroids.clone(),
            seed: self.seed,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, MaterialError> {
        let model: MaterialModel =
            serde_json::from_str(text).map_err(|e| MaterialError::ModelFormat(e.to_string()))?;
        model.check()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    fn check(&self) -> Result<(), MaterialError> {
        let bad = |m: String| Err(MaterialError::ModelFormat(m));
        if self.centroids.len() != self.k {
            return bad(format!(
                "k = {} but {} centroids",
                self.k,
                self.centroids.len()
            ));
        }
        for class in &self.classes {
            match self.word_freq.get(class) {
                Some(f) if f.len() == self.k => {}
                Some(f) => return bad(format!("class {class:?} has {} word frequencies", f.len())),
                None => return bad(format!("class {class:?} has no word frequencies")),
            }
        }
        Ok(())
    }

    fn is_trained(&self) -> bool {
        !self.classes.is_empty() && self.k > 0 && self.centroids.len() == self.k
    }
}

/// Labelled 224×224 training crop.
#[derive(Debug, Clone)]
pub struct LabelledCrop {
    pub crop: RgbImage,
    pub label: String,
}

/// Trains the texture model.
///
/// Channel means come from the whole corpus; features from every crop are
/// clustered into `params.k` words; each class keeps add-one smoothed word
/// counts. Every entry of `classes` needs at least one crop, and every
/// crop label must be one of `classes`.
pub fn train_material_model(
    corpus: &[LabelledCrop],
    classes: &[String],
    params: KMeansParams,
) -> Result<MaterialModel, MaterialError> {
    if classes.is_empty() {
        return Err(MaterialError::EmptyClass("<no classes declared>".into()));
    }
    for c in classes {
        if !corpus.iter().any(|s| &s.label == c) {
            return Err(MaterialError::EmptyClass(c.clone()));
        }
    }
    if let Some(s) = corpus.iter().find(|s| !classes.contains(&s.label)) {
        return Err(MaterialError::UnknownLabel(s.label.clone()));
    }

    let means = ChannelMeans::over(corpus.iter().map(|s| &s.crop));
    let features = corpus
        .iter()
        .map(|s| Ok(extract_features(&preprocess_crop(&s.crop, &means, ChannelOrder::Rgb)?).0))
        .collect::<Result<Vec<_>, MaterialError>>()?;
    let fit = kmeans_fit(&features, params)?;

    let k = params.k;
    let mut word_freq = BTreeMap::new();
    for class in classes {
        let mut counts = vec![1.0; k];
        let mut total = k as f64;
        for (sample, &word) in corpus.iter().zip(&fit.assignment.labels) {
            if &sample.label == class {
                counts[word] += 1.0;
                total += 1.0;
            }
        }
        word_freq.insert(
            class.clone(),
            counts.into_iter().map(|c| c / total).collect(),
        );
    }

    Ok(MaterialModel {
        classes: classes.to_vec(),
        k,
        seed: params.seed,
        channel_means: means,
        centroids: fit.codebook.centroids,
        word_freq,
    })
}

/// Posterior over classes for the crop's visual word, uniform prior.
pub fn classify_material(
    crop: &RgbImage,
    model: &MaterialModel,
) -> Result<MaterialDistribution, MaterialError> {
    classify_material_ordered(crop, model, ChannelOrder::Rgb)
}

pub fn classify_material_ordered(
    crop: &RgbImage,
    model: &MaterialModel,
    order: ChannelOrder,
) -> Result<MaterialDistribution, MaterialError> {
    if !model.is_trained() {
        return Err(MaterialError::UntrainedModel);
    }
    let raster = preprocess_crop(crop, &model.channel_means, order)?;
    let features = extract_features(&raster);
    let word = assign_word(&features.0, &model.codebook())?;
    posterior_for_word(model, word)
}

/// `P(class | word) ∝ P(word | class)`, normalized.
pub fn posterior_for_word(
    model: &MaterialModel,
    word: usize,
) -> Result<MaterialDistribution, MaterialError> {
    let likelihoods: Vec<(String, f64)> = model
        .classes
        .iter()
        .map(|c| {
            let f = model
                .word_freq
                .get(c)
                .and_then(|f| f.get(word))
                .copied()
                .ok_or(MaterialError::UntrainedModel)?;
            Ok((c.clone(), f))
        })
        .collect::<Result<_, MaterialError>>()?;
    let total: f64 = likelihoods.iter().map(|(_, f)| f).sum();
    Ok(MaterialDistribution(
        likelihoods
            .into_iter()
            .map(|(c, f)| (c, f / total))
            .collect(),
    ))
}
