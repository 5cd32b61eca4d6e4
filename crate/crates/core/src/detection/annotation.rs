use serde::{Deserialize, Serialize};

use super::{Detection, DetectionError, Rect};

/// Ground-truth annotation file for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub objects: Vec<AnnotatedObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedObject {
    pub class: String,
    /// `[left, top, width, height]` in pixels.
    pub bbox: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Texture class used by the oracle texture backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
}

impl Annotation {
    pub fn parse(json: &str) -> Result<Self, DetectionError> {
        serde_json::from_str(json).map_err(|e| DetectionError::SchemaError(e.to_string()))
    }
}

/// Reads an annotation file as detections clipped to `image_w × image_h`.
///
/// Missing confidences default to 1.0. When `classes` is given, every
/// object class must appear in it. Boxes that fall completely outside the
/// image are dropped.
pub fn load_oracle_detections(
    json: &str,
    image_w: u32,
    image_h: u32,
    classes: Option<&[String]>,
) -> Result<Vec<Detection>, DetectionError> {
    let ann = Annotation::parse(json)?;
    let mut out = Vec::with_capacity(ann.objects.len());
    for (i, obj) in ann.objects.into_iter().enumerate() {
        if let Some(known) = classes {
            if !known.iter().any(|c| c == &obj.class) {
                return Err(DetectionError::UnknownClass(obj.class));
            }
        }
        let rect = Rect::from(obj.bbox);
        let finite = obj.bbox.iter().all(|v| v.is_finite());
        if !finite || rect.width <= 0.0 || rect.height <= 0.0 {
            return Err(DetectionError::SchemaError(format!(
                "object {i}: bbox {:?} needs positive width and height",
                obj.bbox
            )));
        }
        let confidence = obj.confidence.unwrap_or(1.0);
        if !(0.0..=1.0).contains(&confidence) {
            return Err(DetectionError::SchemaError(format!(
                "object {i}: confidence {confidence} outside [0, 1]"
            )));
        }
        let Some(rect) = rect.clip(image_w as f64, image_h as f64) else {
            continue;
        };
        out.push(Detection {
            rect,
            class_name: obj.class,
            confidence,
            name: obj.name,
            material: obj.material,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes() -> Vec<String> {
        vec!["bicycle".into(), "chair".into()]
    }

    #[test]
    fn single_object_defaults_confidence() {
        let json = r#"{"image":"a.ppm","width":200,"height":100,
            "objects":[{"class":"bicycle","bbox":[10,20,100,60]}]}"#;
        let d = load_oracle_detections(json, 200, 100, Some(&classes())).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].confidence, 1.0);
        assert_eq!(d[0].rect, Rect::new(10.0, 20.0, 100.0, 60.0));
        assert_eq!(d[0].class_name, "bicycle");
    }

    #[test]
    fn boxes_are_clipped() {
        let json = r#"{"image":"a.ppm","width":200,"height":100,
            "objects":[{"class":"chair","bbox":[150,-10,100,60],"confidence":0.5},
                       {"class":"chair","bbox":[300,10,10,10]}]}"#;
        let d = load_oracle_detections(json, 200, 100, Some(&classes())).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].rect, Rect::new(150.0, 0.0, 50.0, 50.0));
        assert_eq!(d[0].confidence, 0.5);
    }

    #[test]
    fn empty_objects() {
        let json = r#"{"image":"a.ppm","width":10,"height":10,"objects":[]}"#;
        assert!(load_oracle_detections(json, 10, 10, None)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn schema_and_class_errors() {
        let unknown = r#"{"image":"a","width":10,"height":10,
            "objects":[{"class":"zebra","bbox":[0,0,1,1]}]}"#;
        assert!(matches!(
            load_oracle_detections(unknown, 10, 10, Some(&classes())),
            Err(DetectionError::UnknownClass(c)) if c == "zebra"
        ));
        assert_eq!(
            load_oracle_detections(unknown, 10, 10, None).unwrap().len(),
            1
        );

        for bad in [
            r#"{"image":"a","width":10,"height":10}"#,
            r#"{"image":"a","width":10,"height":10,"objects":[{"class":"chair","bbox":[0,0,1]}]}"#,
            r#"{"image":"a","width":10,"height":10,"objects":[{"class":"chair","bbox":[0,0,0,1]}]}"#,
            r#"{"image":"a","width":10,"height":10,"objects":[{"class":"chair","bbox":[0,0,1,1],"confidence":2}]}"#,
            r#"{"image":"a","width":10,"height":10,"objects":[{"class":"chair","bbox":[0,0,1,1],"colour":1}]}"#,
            "not json",
        ] {
            assert!(
                matches!(
                    load_oracle_detections(bad, 10, 10, Some(&classes())),
                    Err(DetectionError::SchemaError(_))
                ),
                "{bad}"
            );
        }
    }
}
