use std::f64::consts::TAU;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::MaterialError;
use crate::detection::CROP_SIZE;

pub const COLOR_BINS_PER_CHANNEL: usize = 16;
pub const COLOR_BINS: usize = 3 * COLOR_BINS_PER_CHANNEL;
pub const ORIENTATION_BINS: usize = 18;
pub const FEATURE_LEN: usize = COLOR_BINS + ORIENTATION_BINS;

/// Per-channel means in RGB order, computed over a training corpus.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct ChannelMeans(pub [f64; 3]);

impl From<[f64; 3]> for ChannelMeans {
    fn from(v: [f64; 3]) -> Self {
        Self(v)
    }
}

impl From<ChannelMeans> for [f64; 3] {
    fn from(m: ChannelMeans) -> Self {
        m.0
    }
}

impl ChannelMeans {
    /// Mean of every pixel of every image, per channel.
    pub fn over<'a>(images: impl IntoIterator<Item = &'a RgbImage>) -> Self {
        let mut sum = [0u64; 3];
        let mut count = 0u64;
        for img in images {
            for p in img.pixels() {
                for c in 0..3 {
                    sum[c] += p.0[c] as u64;
                }
            }
            count += img.width() as u64 * img.height() as u64;
        }
        if count == 0 {
            return Self::default();
        }
        Self(sum.map(|s| s as f64 / count as f64))
    }
}

/// Byte order of the three channels in an input raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChannelOrder {
    #[default]
    Rgb,
    Bgr,
}

/// Mean-subtracted RGB raster, values in `[-255, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f64; 3]>,
}

impl Raster {
    pub fn at(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }
}

/// Reorders to RGB when the source is BGR, then subtracts the channel
/// means.
pub fn preprocess_crop(
    crop: &RgbImage,
    means: &ChannelMeans,
    order: ChannelOrder,
) -> Result<Raster, MaterialError> {
    if crop.dimensions() != (CROP_SIZE, CROP_SIZE) {
        return Err(MaterialError::BadDimensions {
            width: crop.width(),
            height: crop.height(),
        });
    }
    let data = crop
        .pixels()
        .map(|p| {
            let [a, b, c] = p.0.map(f64::from);
            let rgb = match order {
                ChannelOrder::Rgb => [a, b, c],
                ChannelOrder::Bgr => [c, b, a],
            };
            [
                rgb[0] - means.0[0],
                rgb[1] - means.0[1],
                rgb[2] - means.0[2],
            ]
        })
        .collect();
    Ok(Raster {
        width: CROP_SIZE as usize,
        height: CROP_SIZE as usize,
        data,
    })
}

/// Fixed-length texture descriptor: 48 colour bins then 18 orientation
/// bins, each block summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn color(&self) -> &[f64] {
        &self.0[..COLOR_BINS]
    }

    pub fn orientation(&self) -> &[f64] {
        &self.0[COLOR_BINS..]
    }
}

/// Linear interpolation between the two nearest bin centres: returns
/// `(bin, weight)` pairs whose weights sum to 1. Values beyond the outer
/// centres go entirely to the outer bin.
fn color_bin_weights(v: f64) -> [(usize, f64); 2] {
    let n = COLOR_BINS_PER_CHANNEL;
    let pos = ((v + 255.0) / 510.0).clamp(0.0, 1.0) * n as f64 - 0.5;
    if pos <= 0.0 {
        return [(0, 1.0), (0, 0.0)];
    }
    if pos >= (n - 1) as f64 {
        return [(n - 1, 1.0), (n - 1, 0.0)];
    }
    let lo = pos.floor();
    let frac = pos - lo;
    [(lo as usize, 1.0 - frac), (lo as usize + 1, frac)]
}

/// Angle in `[0, 2π)` to one of 18 equal sectors, sector 0 starting at +x.
fn orientation_bin(gx: f64, gy: f64) -> usize {
    let mut a = gy.atan2(gx);
    if a < 0.0 {
        a += TAU;
    }
    ((a * ORIENTATION_BINS as f64 / TAU) as usize).min(ORIENTATION_BINS - 1)
}

/// Colour histogram plus magnitude-weighted gradient-orientation
/// histogram.
///
/// Colour: each channel value is shifted from `[-255, 255]` to `[0, 1]` and
/// split between the two nearest of 16 bins per channel. Orientation:
/// central differences on the channel-average image over interior pixels
/// (y grows downwards), angle `atan2(gy, gx)` binned into 20° sectors. A
/// crop with no gradient gets a uniform orientation block.
pub fn extract_features(raster: &Raster) -> FeatureVector {
    let mut f = vec![0.0; FEATURE_LEN];

    for px in &raster.data {
        for (c, v) in px.iter().enumerate() {
            for (bin, w) in color_bin_weights(*v) {
                f[c * COLOR_BINS_PER_CHANNEL + bin] += w;
            }
        }
    }
    let total = (raster.data.len() * 3) as f64;
    if total > 0.0 {
        f[..COLOR_BINS].iter_mut().for_each(|v| *v /= total);
    }

    let gray: Vec<f64> = raster
        .data
        .iter()
        .map(|p| (p[0] + p[1] + p[2]) / 3.0)
        .collect();
    let (w, h) = (raster.width, raster.height);
    let orient = &mut f[COLOR_BINS..];
    let mut mass = 0.0;
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let gx = (gray[y * w + x + 1] - gray[y * w + x - 1]) / 2.0;
            let gy = (gray[(y + 1) * w + x] - gray[(y - 1) * w + x]) / 2.0;
            let m = gx.hypot(gy);
            if m > 0.0 {
                orient[orientation_bin(gx, gy)] += m;
                mass += m;
            }
        }
    }
    if mass > 0.0 {
        orient.iter_mut().for_each(|v| *v /= mass);
    } else {
        orient.fill(1.0 / ORIENTATION_BINS as f64);
    }
    FeatureVector(f)
}
