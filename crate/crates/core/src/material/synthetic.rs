//! Striped solid-colour textures for training and evaluation without a
//! photo dataset.

use image::{Rgb, RgbImage};

use super::model::LabelledCrop;
use super::rng::SplitMix64;
use crate::detection::CROP_SIZE;

/// Four classes with disjoint hue ranges (degrees).
pub const DEFAULT_HUE_CLASSES: [(&str, [f64; 2]); 4] = [
    ("metal", [0.0, 60.0]),
    ("wood", [90.0, 150.0]),
    ("plastic", [180.0, 240.0]),
    ("fabric", [270.0, 330.0]),
];

/// HSV (h in degrees, s and v in [0, 1]) to 8-bit RGB.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h = h.rem_euclid(360.0) / 60.0;
    let c = v * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|ch| ((ch + m) * 255.0).round().clamp(0.0, 255.0) as u8)
}

fn uniform(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

/// One 224×224 crop: a solid base colour with hue drawn from `hue`, crossed
/// by darker stripes of random period and direction.
pub fn striped_texture(rng: &mut SplitMix64, hue: [f64; 2]) -> RgbImage {
    let h = uniform(rng, hue[0], hue[1]);
    let s = uniform(rng, 0.8, 1.0);
    let v = uniform(rng, 0.85, 1.0);
    let base = Rgb(hsv_to_rgb(h, s, v));
    let stripe = Rgb(hsv_to_rgb(h, s, v * uniform(rng, 0.5, 0.75)));
    let period = 8 + rng.below(25) as u32;
    let width = 2 + rng.below((period / 2) as usize) as u32;
    let direction = rng.below(3);
    RgbImage::from_fn(CROP_SIZE, CROP_SIZE, |x, y| {
        let t = match direction {
            0 => x,
            1 => y,
            _ => x + y,
        };
        if t % period < width {
            stripe
        } else {
            base
        }
    })
}

/// `per_class` crops for every `(label, hue range)`, interleaved by class.
pub fn striped_corpus(
    classes: &[(&str, [f64; 2])],
    per_class: usize,
    seed: u64,
) -> Vec<LabelledCrop> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(classes.len() * per_class);
    for _ in 0..per_class {
        for (label, hue) in classes {
            out.push(LabelledCrop {
                crop: striped_texture(&mut rng, *hue),
                label: label.to_string(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hsv_primaries() {
        assert_eq!(hsv_to_rgb(0.0, 1.0, 1.0), [255, 0, 0]);
        assert_eq!(hsv_to_rgb(120.0, 1.0, 1.0), [0, 255, 0]);
        assert_eq!(hsv_to_rgb(240.0, 1.0, 1.0), [0, 0, 255]);
        assert_eq!(hsv_to_rgb(77.0, 0.0, 0.5), [128, 128, 128]);
    }

    #[test]
    fn corpus_shape() {
        let c = striped_corpus(&DEFAULT_HUE_CLASSES, 3, 1);
        assert_eq!(c.len(), 12);
        assert!(c.iter().all(|s| s.crop.dimensions() == (224, 224)));
        assert_eq!(c[1].label, "wood");
        // Two colours per crop.
        let distinct: std::collections::HashSet<_> = c[0].crop.pixels().map(|p| p.0).collect();
        assert_eq!(distinct.len(), 2);
    }
}
