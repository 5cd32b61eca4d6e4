use serde::{Deserialize, Serialize};

use super::{Detection, DetectionError, Rect};

pub const DEFAULT_OBJECTNESS_THRESHOLD: f64 = 0.5;

/// Prediction grid: an `imageW × imageH` image cut into square cells with
/// per-slot anchor priors `(p_w, p_h)` in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridSpec {
    pub image_w: u32,
    pub image_h: u32,
    pub cell_size: u32,
    pub anchors: Vec<[f64; 2]>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), DetectionError> {
        let bad = |m: String| Err(DetectionError::InvalidGrid(m));
        if self.cell_size == 0 || self.image_w == 0 || self.image_h == 0 {
            return bad("image size and cell size must be positive".into());
        }
        if self.image_w % self.cell_size != 0 || self.image_h % self.cell_size != 0 {
            return bad(format!(
                "{}x{} is not divisible by cell size {}",
                self.image_w, self.image_h, self.cell_size
            ));
        }
        if self.anchors.is_empty() {
            return bad("no anchors".into());
        }
        if let Some(a) = self
            .anchors
            .iter()
            .find(|a| !(a[0].is_finite() && a[1].is_finite() && a[0] > 0.0 && a[1] > 0.0))
        {
            return bad(format!("anchor {a:?} must be positive"));
        }
        Ok(())
    }

    /// `(columns, rows)`.
    pub fn cells(&self) -> (u32, u32) {
        (self.image_w / self.cell_size, self.image_h / self.cell_size)
    }
}

/// One grid slot's raw outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPrediction {
    pub cx: i64,
    pub cy: i64,
    pub anchor: usize,
    pub tx: f64,
    pub ty: f64,
    pub tw: f64,
    pub th: f64,
    pub obj: f64,
    pub scores: Vec<f64>,
}

/// The raw-prediction file: grid, class names and slot outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPredictionFile {
    pub grid: GridSpec,
    pub classes: Vec<String>,
    pub predictions: Vec<RawPrediction>,
}

/// Center-size box decoded from one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecodedBox {
    pub center_x: f64,
    pub center_y: f64,
    pub width: f64,
    pub height: f64,
    pub score: f64,
    pub class_id: usize,
    pub class_name: String,
}

impl DecodedBox {
    pub fn rect(&self) -> Rect {
        Rect::from_center(self.center_x, self.center_y, self.width, self.height)
    }
}

pub fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Numerically stable softmax.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Cell-relative offset to pixel center, kept strictly inside the cell even
/// when the sigmoid saturates.
fn cell_center(t: f64, cell: i64, size: f64) -> f64 {
    let lo = cell as f64 * size;
    let hi = (cell + 1) as f64 * size;
    ((sigmoid(t) + cell as f64) * size).clamp(lo.next_up(), hi.next_down())
}

/// Decodes a grid prediction:
/// `b_x = (σ(t_x) + c_x)·cell`, `b_y = (σ(t_y) + c_y)·cell`,
/// `b_w = p_w·e^{t_w}`, `b_h = p_h·e^{t_h}`.
///
/// The class is the argmax of the scores (lowest index on ties) and the
/// box score is `σ(obj) · softmax(scores)[class]`.
pub fn decode_box(
    raw: &RawPrediction,
    grid: &GridSpec,
    classes: &[String],
) -> Result<DecodedBox, DetectionError> {
    let (cols, rows) = grid.cells();
    if raw.cx < 0 || raw.cy < 0 || raw.cx >= cols as i64 || raw.cy >= rows as i64 {
        return Err(DetectionError::InvalidCell {
            cx: raw.cx,
            cy: raw.cy,
            cols,
            rows,
        });
    }
    let [pw, ph] = *grid
        .anchors
        .get(raw.anchor)
        .ok_or(DetectionError::InvalidAnchor {
            index: raw.anchor,
            count: grid.anchors.len(),
        })?;
    if raw.scores.len() != classes.len() || raw.scores.is_empty() {
        return Err(DetectionError::ClassCountMismatch {
            got: raw.scores.len(),
            expected: classes.len(),
        });
    }
    let finite = [raw.tx, raw.ty, raw.tw, raw.th, raw.obj]
        .iter()
        .chain(&raw.scores)
        .all(|v| v.is_finite());
    if !finite {
        return Err(DetectionError::SchemaError(
            "prediction contains non-finite values".into(),
        ));
    }

    let size = grid.cell_size as f64;
    let mut class_id = 0;
    for (i, s) in raw.scores.iter().enumerate() {
        if *s > raw.scores[class_id] {
            class_id = i;
        }
    }
    let probs = softmax(&raw.scores);
    Ok(DecodedBox {
        center_x: cell_center(raw.tx, raw.cx, size),
        center_y: cell_center(raw.ty, raw.cy, size),
        width: (pw * raw.tw.exp()).clamp(f64::MIN_POSITIVE, f64::MAX),
        height: (ph * raw.th.exp()).clamp(f64::MIN_POSITIVE, f64::MAX),
        score: sigmoid(raw.obj) * probs[class_id],
        class_id,
        class_name: classes[class_id].clone(),
    })
}

pub fn decode_all(file: &RawPredictionFile) -> Result<Vec<DecodedBox>, DetectionError> {
    file.grid.validate()?;
    file.predictions
        .iter()
        .map(|p| decode_box(p, &file.grid, &file.classes))
        .collect()
}

/// Keeps boxes with `score >= threshold`, preserving order.
pub fn filter_objectness(
    boxes: Vec<DecodedBox>,
    threshold: f64,
) -> Result<Vec<DecodedBox>, DetectionError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(DetectionError::InvalidThreshold(threshold));
    }
    Ok(boxes.into_iter().filter(|b| b.score >= threshold).collect())
}

/// Corner-form detections clipped to the image; boxes entirely outside
/// are dropped.
pub fn to_detections(boxes: &[DecodedBox], image_w: u32, image_h: u32) -> Vec<Detection> {
    boxes
        .iter()
        .filter_map(|b| {
            let rect = b.rect().clip(image_w as f64, image_h as f64)?;
            Some(Detection::new(rect, b.class_name.clone(), b.score))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec {
            image_w: 608,
            image_h: 608,
            cell_size: 32,
            anchors: vec![[64.0, 48.0], [16.0, 16.0]],
        }
    }

    fn raw(cx: i64, cy: i64) -> RawPrediction {
        RawPrediction {
            cx,
            cy,
            anchor: 0,
            tx: 0.0,
            ty: 0.0,
            tw: 0.0,
            th: 0.0,
            obj: 0.0,
            scores: vec![1.0, 1.0],
        }
    }

    fn classes() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn grid_is_19_by_19() {
        assert_eq!(grid().cells(), (19, 19));
        grid().validate().unwrap();
    }

    #[test]
    fn zero_offsets_give_cell_centers() {
        let b = decode_box(&raw(3, 3), &grid(), &classes()).unwrap();
        assert_eq!(b.center_x, 112.0);
        assert_eq!(b.center_y, 112.0);
        assert_eq!(b.width, 64.0);
        assert_eq!(b.height, 48.0);
        // Tie goes to class 0; σ(0)·0.5.
        assert_eq!(b.class_id, 0);
        assert_eq!(b.score, 0.25);
    }

    #[test]
    fn log_two_doubles_width() {
        let mut r = raw(0, 0);
        r.tw = std::f64::consts::LN_2;
        let b = decode_box(&r, &grid(), &classes()).unwrap();
        assert!((b.width - 128.0).abs() < 1e-12);
    }

    #[test]
    fn saturated_offsets_stay_inside_cell() {
        for t in [-1e3, -40.0, 40.0, 1e3] {
            let mut r = raw(18, 0);
            r.tx = t;
            r.ty = t;
            let b = decode_box(&r, &grid(), &classes()).unwrap();
            assert!(b.center_x > 18.0 * 32.0 && b.center_x < 19.0 * 32.0);
            assert!(b.center_y > 0.0 && b.center_y < 32.0);
        }
    }

    #[test]
    fn invalid_cell_and_anchor() {
        assert!(matches!(
            decode_box(&raw(19, 0), &grid(), &classes()),
            Err(DetectionError::InvalidCell { .. })
        ));
        assert!(matches!(
            decode_box(&raw(-1, 0), &grid(), &classes()),
            Err(DetectionError::InvalidCell { .. })
        ));
        let mut r = raw(0, 0);
        r.anchor = 2;
        assert!(matches!(
            decode_box(&r, &grid(), &classes()),
            Err(DetectionError::InvalidAnchor { index: 2, count: 2 })
        ));
        let mut r = raw(0, 0);
        r.scores.push(0.0);
        assert!(matches!(
            decode_box(&r, &grid(), &classes()),
            Err(DetectionError::ClassCountMismatch { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        let mut g = grid();
        g.image_w = 600;
        assert!(g.validate().is_err());
        let mut g = grid();
        g.anchors.clear();
        assert!(g.validate().is_err());
        let mut g = grid();
        g.anchors[1] = [0.0, 3.0];
        assert!(g.validate().is_err());
    }

    fn scored(score: f64) -> DecodedBox {
        DecodedBox {
            center_x: 10.0,
            center_y: 10.0,
            width: 4.0,
            height: 4.0,
            score,
            class_id: 0,
            class_name: "a".into(),
        }
    }

    #[test]
    fn objectness_filter() {
        let kept = filter_objectness(vec![scored(0.9), scored(0.3)], 0.5).unwrap();
        assert_eq!(kept, vec![scored(0.9)]);
        let all = vec![scored(0.0), scored(0.4)];
        assert_eq!(filter_objectness(all.clone(), 0.0).unwrap(), all);
        let top = filter_objectness(vec![scored(1.0), scored(0.999)], 1.0).unwrap();
        assert_eq!(top, vec![scored(1.0)]);
        assert!(filter_objectness(vec![], 1.5).is_err());
    }

    #[test]
    fn detections_are_clipped() {
        let mut b = scored(0.8);
        b.center_x = 1.0;
        let d = to_detections(&[b], 100, 100);
        assert_eq!(d[0].rect, Rect::new(0.0, 8.0, 3.0, 4.0));
        let mut outside = scored(0.8);
        outside.center_x = -50.0;
        assert!(to_detections(&[outside], 100, 100).is_empty());
    }
}
