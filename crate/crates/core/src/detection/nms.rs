use super::{Detection, DetectionError, Rect};

pub const DEFAULT_NMS_IOU: f64 = 0.45;

/// Intersection over union; 0 for disjoint rectangles.
pub fn iou(a: &Rect, b: &Rect) -> Result<f64, DetectionError> {
    for r in [a, b] {
        if !(r.width > 0.0 && r.height > 0.0) {
            return Err(DetectionError::NonPositiveArea(*r));
        }
    }
    Ok(overlap(a, b))
}

fn overlap(a: &Rect, b: &Rect) -> f64 {
    match a.intersect(b) {
        Some(i) => {
            let inter = i.area();
            inter / (a.area() + b.area() - inter)
        }
        None => 0.0,
    }
}

/// Greedy per-class non-maximum suppression.
///
/// Detections are visited by descending confidence (earlier input first on
/// ties). A detection is kept unless an already kept detection of the same
/// class overlaps it with IoU ≥ `iou_threshold`. The result is in visiting
/// order.
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>, DetectionError> {
    if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
        return Err(DetectionError::InvalidThreshold(iou_threshold));
    }
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&i, &j| dets[j].confidence.total_cmp(&dets[i].confidence));

    let mut kept: Vec<&Detection> = Vec::new();
    for i in order {
        let d = &dets[i];
        let suppressed = kept
            .iter()
            .any(|k| k.class_name == d.class_name && overlap(&k.rect, &d.rect) >= iou_threshold);
        if !suppressed {
            kept.push(d);
        }
    }
    Ok(kept.into_iter().cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_examples() {
        let a = Rect::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &Rect::new(5.0, 5.0, 1.0, 1.0)).unwrap(), 0.0);
        // Touching edges share no area.
        assert_eq!(iou(&a, &Rect::new(2.0, 0.0, 2.0, 2.0)).unwrap(), 0.0);
        let v = iou(&a, &Rect::new(1.0, 1.0, 2.0, 2.0)).unwrap();
        assert!((v - 1.0 / 7.0).abs() < 1e-15);
        assert!(matches!(
            iou(&a, &Rect::new(0.0, 0.0, 0.0, 1.0)),
            Err(DetectionError::NonPositiveArea(_))
        ));
    }

    #[test]
    fn suppresses_same_class_overlap() {
        // 10x10 vs 10x8 inside it: IoU 0.8.
        let a = Detection::new(Rect::new(0.0, 0.0, 10.0, 10.0), "car", 0.7);
        let b = Detection::new(Rect::new(0.0, 0.0, 10.0, 8.0), "car", 0.9);
        assert!((iou(&a.rect, &b.rect).unwrap() - 0.8).abs() < 1e-12);
        let out = nms(&[a.clone(), b.clone()], 0.5).unwrap();
        assert_eq!(out, vec![b.clone()]);

        let mut other = a.clone();
        other.class_name = "dog".into();
        let out = nms(&[other.clone(), b.clone()], 0.5).unwrap();
        assert_eq!(out, vec![b, other]);
    }

    #[test]
    fn ties_keep_input_order() {
        let a = Detection::new(Rect::new(0.0, 0.0, 10.0, 10.0), "x", 0.5);
        let b = Detection::new(Rect::new(0.0, 0.0, 10.0, 10.0), "x", 0.5);
        let mut b2 = b.clone();
        b2.name = Some("second".into());
        let out = nms(&[a.clone(), b2], 0.5).unwrap();
        assert_eq!(out, vec![a]);
    }

    #[test]
    fn threshold_range() {
        assert!(nms(&[], 0.0).is_err());
        assert!(nms(&[], 1.0).is_err());
        assert!(nms(&[], 0.45).unwrap().is_empty());
    }
}
