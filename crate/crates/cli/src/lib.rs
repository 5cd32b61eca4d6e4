//! `densify` command-line driver. [`run`] parses arguments, dispatches to a
//! command and maps failures to stable exit codes.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use densify_core::density::dominant_material;
use densify_core::density::DensityDatabase;
use densify_core::detection::{
    crop_and_resize, decode_all, filter_objectness, load_oracle_detections, nms, to_detections,
    Detection, RawPredictionFile, Rect, DEFAULT_NMS_IOU, DEFAULT_OBJECTNESS_THRESHOLD,
};
use densify_core::geometry::{
    mesh_stats, mesh_volume, parse_obj, scale_mesh, validate_watertight, GeometryError, Mesh,
};
use densify_core::imageio::read_rgb;
use densify_core::material::{
    classify_material, train_material_model, KMeansParams, LabelledCrop, MaterialError,
    MaterialModel, DEFAULT_K, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use densify_core::pipeline::{
    sha256_hex, DetectorBackend, Pipeline, PipelineConfig, RunManifest, SceneReport, OTHER_MATERIAL,
};
use densify_core::RgbImage;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CliError {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }

    fn validation(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            error: error.into(),
        }
    }
}

type CmdResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "densify",
    version,
    about = "Estimate object volume, density and mass from images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Backend {
    Oracle,
    Tensor,
}

impl From<Backend> for DetectorBackend {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Oracle => DetectorBackend::Oracle,
            Backend::Tensor => DetectorBackend::Tensor,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Triangle/vertex counts, extent and watertightness of an OBJ mesh.
    MeshInfo { mesh: PathBuf },
    /// Enclosed volume of an OBJ mesh in dm³.
    Volume {
        mesh: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Train a texture model from `<corpus>/<label>/*.{ppm,png}`.
    Train {
        corpus: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Texture distribution for an image region.
    Classify {
        image: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Region as `left,top,width,height`; the whole image by default.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        bbox: Option<Vec<f64>>,
    },
    /// Detections after thresholding and NMS.
    Detect {
        image: PathBuf,
        detections: PathBuf,
        #[arg(long, value_enum, default_value_t = Backend::Oracle)]
        backend: Backend,
        #[arg(long, default_value_t = DEFAULT_OBJECTNESS_THRESHOLD)]
        objectness: f64,
        #[arg(long, default_value_t = DEFAULT_NMS_IOU)]
        iou: f64,
    },
    /// Run the full pipeline over a manifest.
    Run {
        manifest: PathBuf,
        /// Overrides the manifest's config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the manifest's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Density table checks.
    Db {
        #[command(subcommand)]
        command: DbCommand,
    },
}

#[derive(Debug, Subcommand)]
enum DbCommand {
    /// Validate a density CSV (the built-in table by default) and, with
    /// `--config`, the config's texture mapping against it.
    Check {
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Runs the CLI with `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {:#}", e.error);
            e.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::MeshInfo { mesh } => cmd_mesh_info(&mesh, out),
        Command::Volume { mesh, scale } => cmd_volume(&mesh, scale, out),
        Command::Train {
            corpus,
            k,
            seed,
            max_iter,
            out: model_path,
        } => cmd_train(
            &corpus,
            KMeansParams {
                k,
                seed,
                max_iter,
                tol: DEFAULT_TOL,
            },
            &model_path,
            out,
        ),
        Command::Classify { image, model, bbox } => cmd_classify(&image, &model, bbox, out),
        Command::Detect {
            image,
            detections,
            backend,
            objectness,
            iou,
        } => cmd_detect(&image, &detections, backend.into(), objectness, iou, out),
        Command::Run {
            manifest,
            config,
            output,
            threads,
        } => cmd_run(
            &manifest,
            config.as_deref(),
            output.as_deref(),
            threads,
            out,
        ),
        Command::Db {
            command: DbCommand::Check { db, config },
        } => cmd_db_check(db.as_deref(), config.as_deref(), out),
    }
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> CmdResult {
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    writeln!(out, "{text}").map_err(CliError::input)
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::input)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::input)
}

fn read_image(path: &Path) -> Result<RgbImage, CliError> {
    read_rgb(path)
        .with_context(|| format!("reading image {}", path.display()))
        .map_err(CliError::input)
}

fn load_mesh(path: &Path) -> Result<Mesh, CliError> {
    let bytes = read(path)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_obj(&id, &bytes)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(CliError::input)
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_mesh_info(path: &Path, out: &mut dyn Write) -> CmdResult {
    let mesh = load_mesh(path)?;
    let stats = mesh_stats(&mesh);
    if stats.watertight {
        return print_json(out, &stats);
    }
    let report = validate_watertight(&mesh);
    print_json(out, &json!({ "stats": stats, "defects": report }))?;
    Err(CliError::validation(GeometryError::NotWatertight(
        Box::new(report),
    )))
}

fn cmd_volume(path: &Path, scale: f64, out: &mut dyn Write) -> CmdResult {
    let mesh = load_mesh(path)?;
    let mesh = scale_mesh(&mesh, scale).map_err(CliError::input)?;
    let volume = mesh_volume(&mesh).map_err(|e| match e {
        GeometryError::NotWatertight(_) => CliError::validation(e),
        e => CliError::input(e),
    })?;
    print_json(
        out,
        &json!({ "mesh": mesh.id, "scale": scale, "volume_dm3": volume }),
    )
}

const IMAGE_EXTENSIONS: [&str; 3] = ["ppm", "png", "pnm"];

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut entries = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))
        .map_err(CliError::input)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::input)?;
    entries.sort();
    Ok(entries)
}

/// Labelled crops from `<dir>/<label>/<image>`, resized to the crop size.
pub fn load_corpus(dir: &Path) -> Result<(Vec<LabelledCrop>, Vec<String>), CliError> {
    let mut corpus = Vec::new();
    let mut classes = Vec::new();
    for class_dir in sorted_entries(dir)? {
        if !class_dir.is_dir() {
            continue;
        }
        let label = class_dir
            .file_name()
            .expect("directory name")
            .to_string_lossy()
            .into_owned();
        for file in sorted_entries(&class_dir)? {
            let ext = file.extension().map(|e| e.to_string_lossy().to_lowercase());
            if !ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
                continue;
            }
            let img = read_image(&file)?;
            let whole = Rect::new(0.0, 0.0, img.width() as f64, img.height() as f64);
            let crop = crop_and_resize(&img, &whole).map_err(CliError::input)?;
            corpus.push(LabelledCrop {
                crop,
                label: label.clone(),
            });
        }
        if !classes.contains(&label) {
            classes.push(label);
        }
    }
    Ok((corpus, classes))
}

fn dominant_of(model: &MaterialModel, crop: &RgbImage) -> Result<String, MaterialError> {
    let dist = classify_material(crop, model)?;
    Ok(dominant_material(&dist)
        .map(str::to_string)
        .unwrap_or_else(|_| OTHER_MATERIAL.to_string()))
}

fn cmd_train(
    corpus_dir: &Path,
    params: KMeansParams,
    model_path: &Path,
    out: &mut dyn Write,
) -> CmdResult {
    let (corpus, classes) = load_corpus(corpus_dir)?;
    let model = train_material_model(&corpus, &classes, params).map_err(CliError::input)?;
    let mut correct = 0usize;
    for s in &corpus {
        if dominant_of(&model, &s.crop).map_err(CliError::input)? == s.label {
            correct += 1;
        }
    }
    let text = model.to_json();
    write_atomic(model_path, text.as_bytes()).map_err(CliError::input)?;
    print_json(
        out,
        &json!({
            "model": model_path.display().to_string(),
            "sha256": sha256_hex(text.as_bytes()),
            "classes": classes,
            "crops": corpus.len(),
            "k": params.k,
            "seed": params.seed,
            "selfAccuracy": correct as f64 / corpus.len() as f64,
        }),
    )
}

fn cmd_classify(
    image: &Path,
    model: &Path,
    bbox: Option<Vec<f64>>,
    out: &mut dyn Write,
) -> CmdResult {
    let model = MaterialModel::from_json(&read_text(model)?).map_err(CliError::input)?;
    let img = read_image(image)?;
    let rect = match bbox {
        Some(b) => Rect::new(b[0], b[1], b[2], b[3]),
        None => Rect::new(0.0, 0.0, img.width() as f64, img.height() as f64),
    };
    let crop = crop_and_resize(&img, &rect).map_err(CliError::input)?;
    let dist = classify_material(&crop, &model).map_err(CliError::input)?;
    let dominant = dominant_material(&dist)
        .map_err(CliError::input)?
        .to_string();
    print_json(
        out,
        &json!({ "materials": dist, "dominantMaterial": dominant }),
    )
}

fn cmd_detect(
    image: &Path,
    detections: &Path,
    backend: DetectorBackend,
    objectness: f64,
    iou: f64,
    out: &mut dyn Write,
) -> CmdResult {
    let img = read_image(image)?;
    let text = read_text(detections)?;
    let (w, h) = img.dimensions();
    let raw: Vec<Detection> = match backend {
        DetectorBackend::Oracle => {
            load_oracle_detections(&text, w, h, None).map_err(CliError::input)?
        }
        DetectorBackend::Tensor => {
            let file: RawPredictionFile = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", detections.display()))
                .map_err(CliError::input)?;
            let boxes = decode_all(&file).map_err(CliError::input)?;
            let boxes = filter_objectness(boxes, objectness).map_err(CliError::input)?;
            to_detections(&boxes, w, h)
        }
    };
    let kept = nms(&raw, iou).map_err(CliError::input)?;
    print_json(
        out,
        &json!({
            "image": image.display().to_string(),
            "backend": backend.name(),
            "detections": kept,
        }),
    )
}

/// One row of the run summary.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub image: String,
    pub object: usize,
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dominant_material: String,
    pub density_material: String,
    #[serde(rename = "density_kg_dm3")]
    pub density: f64,
    #[serde(rename = "volume_dm3")]
    pub volume: f64,
    #[serde(rename = "mass_kg")]
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSummary {
    pub scenes: usize,
    pub objects: Vec<SummaryRow>,
    pub errors: usize,
    #[serde(rename = "volume_dm3")]
    pub volume: f64,
    #[serde(rename = "mass_kg")]
    pub mass: f64,
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Output file name for an entry's image.
pub fn report_file_name(image: &Path) -> String {
    let stem = image
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    format!("{stem}.report.json")
}

fn process_entry(
    pipeline: &Pipeline,
    manifest: &RunManifest,
    index: usize,
) -> anyhow::Result<SceneReport> {
    let entry = &manifest.entries[index];
    let image_path = manifest.resolve(&entry.image);
    let img =
        read_rgb(&image_path).with_context(|| format!("reading image {}", image_path.display()))?;
    let det_path = manifest.resolve(&entry.detections);
    let text = std::fs::read_to_string(&det_path)
        .with_context(|| format!("reading {}", det_path.display()))?;
    let (w, h) = img.dimensions();
    let detections = pipeline
        .detections(entry.backend, &text, w, h)
        .with_context(|| format!("detections {}", det_path.display()))?;
    let image_id = entry.image.to_string_lossy().replace('\\', "/");
    Ok(pipeline.process_scene(&image_id, &img, &detections, entry.backend)?)
}

fn cmd_run(
    manifest_path: &Path,
    config: Option<&Path>,
    output: Option<&Path>,
    threads: usize,
    out: &mut dyn Write,
) -> CmdResult {
    let manifest = RunManifest::load(manifest_path).map_err(CliError::input)?;
    manifest.check_inputs().map_err(CliError::input)?;
    let config_path = config
        .map(Path::to_path_buf)
        .unwrap_or_else(|| manifest.resolve(&manifest.config));
    let output_dir = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| manifest.resolve(&manifest.output));
    let config = PipelineConfig::load(&config_path).map_err(CliError::input)?;
    let pipeline = Pipeline::load(config).map_err(CliError::input)?;

    let mut names = BTreeSet::new();
    for e in &manifest.entries {
        let name = report_file_name(&e.image);
        if name == SUMMARY_FILE || !names.insert(name.clone()) {
            return Err(CliError::input(anyhow::anyhow!(
                "two entries would write {name}"
            )));
        }
    }
    std::fs::create_dir_all(&output_dir)
        .with_context(|| format!("creating {}", output_dir.display()))
        .map_err(CliError::input)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(CliError::input)?;
    let results: Vec<anyhow::Result<SceneReport>> = pool.install(|| {
        use rayon::prelude::*;
        (0..manifest.entries.len())
            .into_par_iter()
            .map(|i| {
                let report = process_entry(&pipeline, &manifest, i)?;
                let path = output_dir.join(report_file_name(&manifest.entries[i].image));
                write_atomic(&path, report.to_json().as_bytes())?;
                Ok(report)
            })
            .collect()
    });

    let mut summary = RunSummary {
        scenes: 0,
        objects: Vec::new(),
        errors: 0,
        volume: 0.0,
        mass: 0.0,
    };
    let mut failed = Vec::new();
    for (entry, result) in manifest.entries.iter().zip(results) {
        let report = match result {
            Ok(r) => r,
            Err(e) => {
                failed.push(format!("{}: {e:#}", entry.image.display()));
                continue;
            }
        };
        summary.scenes += 1;
        summary.errors += report.errors.len();
        summary.volume += report.totals.volume;
        summary.mass += report.totals.mass;
        for (i, o) in report.objects.iter().enumerate() {
            summary.objects.push(SummaryRow {
                image: report.image.clone(),
                object: i,
                class: o.class_name.clone(),
                name: o.name.clone(),
                dominant_material: o.dominant_material.clone(),
                density_material: o.density_material.clone(),
                density: o.density,
                volume: o.volume,
                mass: o.mass,
            });
        }
    }
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    write_atomic(&output_dir.join(SUMMARY_FILE), text.as_bytes()).map_err(CliError::input)?;
    write_table(out, &summary).map_err(CliError::input)?;

    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::input(anyhow::anyhow!(
            "{} scene(s) failed:\n{}",
            failed.len(),
            failed.join("\n")
        )))
    }
}

fn write_table(out: &mut dyn Write, s: &RunSummary) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<24} {:<10} {:<14} {:<10} {:>9} {:>12} {:>12}",
        "image", "class", "name", "material", "density", "volume_dm3", "mass_kg"
    )?;
    for r in &s.objects {
        writeln!(
            out,
            "{:<24} {:<10} {:<14} {:<10} {:>9.3} {:>12.4} {:>12.4}",
            r.image,
            r.class,
            r.name.as_deref().unwrap_or("-"),
            r.dominant_material,
            r.density,
            r.volume,
            r.mass
        )?;
    }
    writeln!(
        out,
        "{} scene(s), {} object(s), {} error(s), total volume {:.4} dm3, total mass {:.4} kg",
        s.scenes,
        s.objects.len(),
        s.errors,
        s.volume,
        s.mass
    )
}

fn cmd_db_check(db: Option<&Path>, config: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let (db, sha) = match db {
        Some(p) => {
            let text = read_text(p)?;
            let db = DensityDatabase::from_csv(&text)
                .with_context(|| format!("checking {}", p.display()))
                .map_err(CliError::validation)?;
            (db, sha256_hex(text.as_bytes()))
        }
        None => (DensityDatabase::builtin(), String::new()),
    };
    let mut unmapped = Vec::new();
    if let Some(p) = config {
        let cfg = PipelineConfig::load(p).map_err(CliError::input)?;
        for (texture, material) in &cfg.texture_to_material {
            if material != OTHER_MATERIAL && db.get(material).is_none() {
                unmapped.push(format!("{texture} -> {material}"));
            }
        }
    }
    let mut summary = json!({
        "materials": db.len(),
        "names": db.records.keys().collect::<Vec<_>>(),
    });
    if !sha.is_empty() {
        summary["sha256"] = json!(sha);
    }
    if !unmapped.is_empty() {
        summary["unmapped"] = json!(unmapped);
        print_json(out, &summary)?;
        return Err(CliError::validation(anyhow::anyhow!(
            "texture classes map to materials missing from the table: {}",
            unmapped.join(", ")
        )));
    }
    print_json(out, &summary)
}
