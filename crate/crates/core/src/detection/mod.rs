//! Pixel-space detections from grid predictions or oracle annotations.

mod annotation;
mod crop;
mod decode;
mod nms;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use annotation::{load_oracle_detections, AnnotatedObject, Annotation};
pub use crop::{crop_and_resize, CROP_SIZE};
pub use decode::{
    decode_all, decode_box, filter_objectness, sigmoid, softmax, to_detections, GridSpec,
    RawPrediction, RawPredictionFile, DEFAULT_OBJECTNESS_THRESHOLD,
};
pub use nms::{iou, nms, DEFAULT_NMS_IOU};

#[derive(Debug, Error)]
pub enum DetectionError {
    #[error("cell ({cx}, {cy}) outside the {cols}x{rows} grid")]
    InvalidCell {
        cx: i64,
        cy: i64,
        cols: u32,
        rows: u32,
    },
    #[error("anchor {index} out of range ({count} anchors)")]
    InvalidAnchor { index: usize, count: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("prediction has {got} class scores, expected {expected}")]
    ClassCountMismatch { got: usize, expected: usize },
    #[error("threshold {0} outside its valid range")]
    InvalidThreshold(f64),
    #[error("rectangle has non-positive area: {0:?}")]
    NonPositiveArea(Rect),
    #[error("annotation schema: {0}")]
    SchemaError(String),
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("box {0:?} does not intersect the image")]
    EmptyCrop(Rect),
}

/// Axis-aligned rectangle in pixels, `(left, top, width, height)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", from = "[f64; 4]")]
pub struct Rect {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub const fn new(left: f64, top: f64, width: f64, height: f64) -> Self {
        Self {
            left,
            top,
            width,
            height,
        }
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let l = self.left.max(other.left);
        let t = self.top.max(other.top);
        let r = self.right().min(other.right());
        let b = self.bottom().min(other.bottom());
        (r > l && b > t).then(|| Rect::new(l, t, r - l, b - t))
    }

    /// Intersection with `[0, w] × [0, h]`.
    pub fn clip(&self, w: f64, h: f64) -> Option<Rect> {
        self.intersect(&Rect::new(0.0, 0.0, w, h))
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.left, r.top, r.width, r.height]
    }
}

impl From<[f64; 4]> for Rect {
    fn from(v: [f64; 4]) -> Self {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

/// A class-labelled box with confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "bbox")]
    pub rect: Rect,
    #[serde(rename = "class")]
    pub class_name: String,
    pub confidence: f64,
    /// Free-form object label carried through from annotations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Ground-truth texture class, only set by oracle annotations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
}

impl Detection {
    pub fn new(rect: Rect, class_name: impl Into<String>, confidence: f64) -> Self {
        Self {
            rect,
            class_name: class_name.into(),
            confidence,
            name: None,
            material: None,
        }
    }
}
