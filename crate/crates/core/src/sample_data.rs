//! The sample file set checked in under `fixtures/`: meshes, a mesh
//! registry, an oracle-texture config, painted scenes with annotations and
//! a run manifest. Everything is generated deterministically so the
//! checked-in copy can be compared against this module.

use std::collections::BTreeMap;

use image::{Rgb, RgbImage};
use serde_json::json;

use crate::detection::{AnnotatedObject, Annotation};
use crate::geometry::{fixtures, write_obj, Mesh};
use crate::imageio::encode_ppm;
use crate::material::rng::SplitMix64;
use crate::material::synthetic::{striped_texture, DEFAULT_HUE_CLASSES};

pub const TABLE_SCENE_SIZE: (u32, u32) = (640, 480);
pub const STREET_SCENE_SIZE: (u32, u32) = (320, 256);

/// Reference scene objects: (name, class, texture class).
pub const REFERENCE_SCENE: [(&str, &str, &str); 15] = [
    ("Phone", "phone", "plastic"),
    ("Chair 1", "chair", "wood"),
    ("Chair 2", "chair", "plastic"),
    ("Chair 3", "chair", "metal"),
    ("Chair 4", "chair", "metal"),
    ("Table 1", "table", "metal"),
    ("Hydrant", "hydrant", "metal"),
    ("Bicycle 1", "bicycle", "metal"),
    ("Bicycle 2", "bicycle", "metal"),
    ("Bench 1", "bench", "metal"),
    ("Bench 2", "bench", "wood"),
    ("Dog", "dog", "other"),
    ("Person", "person", "plastic"),
    ("Backpack", "backpack", "fabric"),
    ("Car", "car", "plastic"),
];

const BACKGROUND: Rgb<u8> = Rgb([128, 128, 128]);

fn json_bytes(v: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("fixture json");
    s.push('\n');
    s.into_bytes()
}

fn reference_meshes() -> Vec<(&'static str, Mesh)> {
    vec![
        ("cube", fixtures::unit_cube()),
        ("holed_cube", fixtures::holed_cube()),
        ("flipped_cube", fixtures::cube_with_flipped_triangle()),
        ("cavity", fixtures::cube_with_cavity()),
        ("two_cubes", fixtures::two_cubes()),
    ]
}

/// Paints `rect` with a striped texture of the texture class's hue; the
/// "other" class is plain grey.
fn paint(img: &mut RgbImage, rect: [u32; 4], texture: &str, rng: &mut SplitMix64) {
    let hue = DEFAULT_HUE_CLASSES
        .iter()
        .find(|(name, _)| *name == texture)
        .map(|(_, h)| *h);
    let tile = hue.map(|h| striped_texture(rng, h));
    let [l, t, w, h] = rect;
    for y in t..t + h {
        for x in l..l + w {
            let px = match &tile {
                Some(tile) => *tile.get_pixel((x - l) % tile.width(), (y - t) % tile.height()),
                None => Rgb([150, 140, 135]),
            };
            img.put_pixel(x, y, px);
        }
    }
}

/// The fifteen-object reference scene: image and oracle annotation.
pub fn reference_scene() -> (RgbImage, Annotation) {
    let (w, h) = TABLE_SCENE_SIZE;
    let mut img = RgbImage::from_pixel(w, h, BACKGROUND);
    let mut rng = SplitMix64::new(7);
    let mut objects = Vec::new();
    for (i, (name, class, texture)) in REFERENCE_SCENE.iter().enumerate() {
        let (col, row) = (i as u32 % 5, i as u32 / 5);
        let rect = [col * 128 + 8, row * 160 + 8, 112, 144];
        paint(&mut img, rect, texture, &mut rng);
        objects.push(AnnotatedObject {
            class: class.to_string(),
            bbox: rect.map(f64::from),
            confidence: Some(0.99 - 0.01 * i as f64),
            name: Some(name.to_string()),
            material: Some(texture.to_string()),
        });
    }
    let ann = Annotation {
        image: "table3.ppm".into(),
        width: w,
        height: h,
        objects,
    };
    (img, ann)
}

/// A small scene with two overlapping chairs (one is suppressed by NMS) and
/// a metal table, as an oracle annotation.
pub fn pair_scene() -> (RgbImage, Annotation) {
    let mut img = RgbImage::from_pixel(200, 120, BACKGROUND);
    let mut rng = SplitMix64::new(11);
    paint(&mut img, [10, 10, 80, 100], "wood", &mut rng);
    paint(&mut img, [110, 30, 80, 60], "metal", &mut rng);
    let obj = |class: &str, bbox: [f64; 4], conf: f64, material: &str| AnnotatedObject {
        class: class.into(),
        bbox,
        confidence: Some(conf),
        name: None,
        material: Some(material.into()),
    };
    let ann = Annotation {
        image: "pair.ppm".into(),
        width: 200,
        height: 120,
        objects: vec![
            obj("chair", [10.0, 10.0, 80.0, 100.0], 0.9, "wood"),
            obj("chair", [14.0, 12.0, 80.0, 100.0], 0.7, "wood"),
            obj("table", [110.0, 30.0, 80.0, 60.0], 0.8, "metal"),
        ],
    };
    (img, ann)
}

/// Raw grid predictions for the street scene: a confident chair with a
/// weaker duplicate, a car, and a table below the objectness threshold.
pub fn street_predictions() -> serde_json::Value {
    let (w, h) = STREET_SCENE_SIZE;
    json!({
        "grid": {"imageW": w, "imageH": h, "cellSize": 32, "anchors": [[64.0, 64.0], [128.0, 96.0]]},
        "classes": ["chair", "table", "car"],
        "predictions": [
            {"cx": 2, "cy": 3, "anchor": 0, "tx": 0.0, "ty": 0.0, "tw": 0.0, "th": 0.0, "obj": 3.0, "scores": [4.0, 0.0, 0.0]},
            {"cx": 2, "cy": 3, "anchor": 0, "tx": 0.2, "ty": 0.1, "tw": 0.1, "th": 0.0, "obj": 1.5, "scores": [3.0, 0.5, 0.0]},
            {"cx": 6, "cy": 4, "anchor": 1, "tx": 0.0, "ty": 0.0, "tw": 0.2, "th": 0.0, "obj": 2.5, "scores": [0.0, 0.0, 5.0]},
            {"cx": 8, "cy": 1, "anchor": 0, "tx": 0.0, "ty": 0.0, "tw": 0.0, "th": 0.0, "obj": -3.0, "scores": [0.0, 5.0, 0.0]}
        ]
    })
}

pub fn street_scene() -> RgbImage {
    let (w, h) = STREET_SCENE_SIZE;
    let mut img = RgbImage::from_pixel(w, h, BACKGROUND);
    let mut rng = SplitMix64::new(13);
    paint(&mut img, [48, 80, 64, 64], "wood", &mut rng);
    paint(&mut img, [144, 96, 140, 96], "plastic", &mut rng);
    img
}

/// Every sample file, keyed by path relative to the fixture root.
pub fn sample_files() -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut registry = serde_json::Map::new();
    let mut classes = Vec::new();

    for (name, mesh) in reference_meshes() {
        files.insert(format!("meshes/{name}.obj"), write_obj(&mesh).into_bytes());
    }
    registry.insert("cube".into(), json!({"mesh": "meshes/cube.obj"}));
    classes.push("cube".to_string());
    for (class, mesh) in fixtures::class_meshes() {
        files.insert(format!("meshes/{class}.obj"), write_obj(&mesh).into_bytes());
        registry.insert(class.into(), json!({"mesh": format!("meshes/{class}.obj")}));
        classes.push(class.to_string());
    }
    files.insert("registry.json".into(), json_bytes(&registry));

    files.insert(
        "config.json".into(),
        json_bytes(&json!({
            "classList": classes,
            "meshRegistry": "registry.json",
            "textureBackend": "oracle",
            "textureToMaterial": crate::pipeline::default_texture_map(),
            "objectnessThreshold": 0.5,
            "nmsIouThreshold": 0.45,
        })),
    );

    let (img, ann) = reference_scene();
    files.insert("scenes/table3.ppm".into(), encode_ppm(&img));
    files.insert("scenes/table3.json".into(), json_bytes(&ann));
    let (img, ann) = pair_scene();
    files.insert("scenes/pair.ppm".into(), encode_ppm(&img));
    files.insert("scenes/pair.json".into(), json_bytes(&ann));
    files.insert("scenes/street.ppm".into(), encode_ppm(&street_scene()));
    files.insert(
        "scenes/street.tensor.json".into(),
        json_bytes(&street_predictions()),
    );

    files.insert(
        "manifest.json".into(),
        json_bytes(&json!({
            "config": "config.json",
            "output": "out",
            "entries": [
                {"image": "scenes/table3.ppm", "detections": "scenes/table3.json", "backend": "oracle"},
                {"image": "scenes/pair.ppm", "detections": "scenes/pair.json", "backend": "oracle"},
            ]
        })),
    );
    files
}
