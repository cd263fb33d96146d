//! Command-line front end. Every subcommand is a thin adapter over a library
//! operation and prints that operation's result as JSON.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::boxcrop::{
    expand_margin, extract_and_squeeze, make_box_triple, normalize_with_boxes, BoxTriple, FaceBox, Frame,
    DEFAULT_DELTA,
};
use crate::datakit::{
    self, adapters, evaluate_labels, prepare_lfw, read_manifest, split, write_manifest, ImageRecord, PredictionRecord,
    SplitSpec,
};
use crate::ensemble::VoteMode;
use crate::error::{Error, Result};
use crate::infer::{load_backend, ClassifierHandle, ModelManifest};
use crate::pipeline::{
    ablation, bench, run_video, AnnotationSink, BenchConfig, CropScheme, DirectorySink, ImageSequence, NullSink,
    Pipeline, SidecarDetections,
};
use crate::score::Gender;

pub const LOG_ENV: &str = "CROP_ENSEMBLE_LOG";

#[derive(Debug, Parser)]
#[command(name = "crop-ensemble", version, about = "Two-box three-crop face gender classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a manifest, assign subject-disjoint splits, optionally rescale LFW images.
    Prepare(PrepareArgs),
    /// Show the crop boxes for one face and write the three squeezed crops.
    Crop(CropArgs),
    /// Classify the faces in one image.
    Classify(ClassifyArgs),
    /// Classify every frame of an image sequence and write annotated frames.
    Video(VideoArgs),
    /// Measure throughput on synthetic frames.
    Bench(BenchArgs),
    /// Score predictions against a manifest, or run the single-crop ablation.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Soft,
    Hard,
}

impl From<ModeArg> for VoteMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Soft => VoteMode::SoftMean,
            ModeArg::Hard => VoteMode::HardMajority,
        }
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// `mock`, `mock:threshold=128,latency_us=0`, or a model manifest JSON path.
    #[arg(long, default_value = "mock")]
    model: String,
    #[arg(long, value_enum, default_value = "soft")]
    mode: ModeArg,
}

#[derive(Debug, Args)]
struct PrepareArgs {
    /// Existing JSON-lines manifests to include.
    #[arg(long)]
    manifest: Vec<PathBuf>,
    /// Adience fold files (`fold_N_data.txt`).
    #[arg(long)]
    adience_fold: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    adience_root: PathBuf,
    /// LFW list of male image file names.
    #[arg(long)]
    lfw_male: Option<PathBuf>,
    /// LFW list of female image file names.
    #[arg(long)]
    lfw_female: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    lfw_root: PathBuf,
    /// Rescale LFW images to 816x816 into this directory before splitting.
    #[arg(long)]
    lfw_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output manifest; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CropArgs {
    #[arg(long)]
    image: PathBuf,
    /// Face box corners `x_a,y_a,x_b,y_b` in image pixels.
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    r#box: FaceBox,
    /// Treat the box as already margin-expanded.
    #[arg(long)]
    no_expand: bool,
    /// Directory for left.png, middle.png and right.png.
    #[arg(long, default_value = "crops")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    image: PathBuf,
    /// Face box `x_a,y_a,x_b,y_b`; repeat for several faces. Defaults to the whole image.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    boxes: Vec<FaceBox>,
    #[command(flatten)]
    model: ModelArgs,
    /// Classify the expanded box as one crop instead of three.
    #[arg(long)]
    single_crop: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VideoArgs {
    /// Directory of numbered frames (png/jpeg).
    #[arg(long)]
    video: PathBuf,
    /// Sidecar detections: `frame_index, x_a, y_a, x_b, y_b` per line.
    #[arg(long)]
    detections: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Directory for annotated frames; none are written when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the throughput report here.
    #[arg(long)]
    fps_report: Option<PathBuf>,
    /// Write per-frame results as JSON lines.
    #[arg(long)]
    results: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    frames: usize,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    faces: usize,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 480)]
    height: u32,
    #[arg(long)]
    fps_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Predictions: JSON array or JSON lines of `{"path": ..., "label": "Man"|"Woman"}`.
    #[arg(long, required_unless_present = "ablation")]
    predictions: Option<PathBuf>,
    /// Classify the manifest images with and without the three-crop ensemble.
    #[arg(long, conflicts_with = "predictions")]
    ablation: bool,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_box(s: &str) -> std::result::Result<FaceBox, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected x_a,y_a,x_b,y_b, got {s:?}"));
    }
    let mut c = [0i32; 4];
    for (slot, p) in c.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("bad coordinate {p:?}"))?;
    }
    Ok(FaceBox::from_coords(c[0], c[1], c[2], c[3]))
}

/// Output of the `crop` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CropReport {
    pub reference_box: FaceBox,
    pub expanded: FaceBox,
    pub triple: BoxTriple,
    pub images: Vec<PathBuf>,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status: 0 on success, 2 for usage errors, 1 for failures.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
        }
    };
    if let Some(missing) = missing_input(&cli.command) {
        let _ = writeln!(stderr, "error: input {} does not exist\n", missing.display());
        let _ = writeln!(stderr, "For more information, try '--help'.");
        return 2;
    }
    match run(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn missing_input(command: &Command) -> Option<PathBuf> {
    let inputs: Vec<&Path> = match command {
        Command::Prepare(a) => a
            .manifest
            .iter()
            .chain(&a.adience_fold)
            .chain(a.lfw_male.iter())
            .chain(a.lfw_female.iter())
            .map(PathBuf::as_path)
            .collect(),
        Command::Crop(a) => vec![&a.image],
        Command::Classify(a) => vec![&a.image],
        Command::Video(a) => vec![&a.video, &a.detections],
        Command::Bench(_) => vec![],
        Command::Evaluate(a) => std::iter::once(a.manifest.as_path())
            .chain(a.predictions.as_deref())
            .collect(),
    };
    inputs.into_iter().find(|p| !p.exists()).map(Path::to_path_buf)
}

fn run(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Prepare(a) => prepare(a, stdout),
        Command::Crop(a) => {
            let report = crop(&a)?;
            emit(&report, None, stdout)
        }
        Command::Classify(a) => classify(a, stdout),
        Command::Video(a) => video(a, stdout),
        Command::Bench(a) => {
            let handle = load(&a.model.model)?;
            let config = BenchConfig {
                frames: a.frames,
                parallelism: a.parallel,
                mode: a.model.mode.into(),
                seed: a.seed,
                frame_width: a.width,
                frame_height: a.height,
                faces_per_frame: a.faces,
                ..BenchConfig::default()
            };
            let report = bench(&config, handle)?;
            emit(&report, a.fps_report.as_deref(), stdout)
        }
        Command::Evaluate(a) => evaluate(a, stdout),
    }
}

fn load(model: &str) -> Result<ClassifierHandle> {
    load_backend(&ModelManifest::from_arg(model)?)
}

/// Writes pretty JSON to stdout, and to `copy` when given.
fn emit<T: Serialize>(value: &T, copy: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    if let Some(path) = copy {
        fs::write(path, &text).map_err(|e| Error::io(path, e))?;
    }
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn prepare(a: PrepareArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut records: Vec<ImageRecord> = Vec::new();
    for path in &a.manifest {
        records.extend(read_manifest(path)?);
    }
    let mut excluded = 0;
    for fold in &a.adience_fold {
        let file = fs::File::open(fold).map_err(|e| Error::io(fold, e))?;
        let got = adapters::adience_fold(std::io::BufReader::new(file), &a.adience_root, fold)?;
        excluded += got.excluded;
        records.extend(got.records);
    }
    for (list, label) in [(&a.lfw_male, Gender::Man), (&a.lfw_female, Gender::Woman)] {
        if let Some(list) = list {
            let file = fs::File::open(list).map_err(|e| Error::io(list, e))?;
            let got = adapters::lfw_names(std::io::BufReader::new(file), label, &a.lfw_root, list)?;
            excluded += got.excluded;
            records.extend(got.records);
        }
    }
    if excluded > 0 {
        log::info!("excluded {excluded} records without an unambiguous gender label");
    }

    if let Some(dir) = &a.lfw_out {
        let report = prepare_lfw(&records, dir)?;
        for e in &report.errors {
            log::warn!("{}: {}", e.path.display(), e.message);
        }
        log::info!(
            "LFW: {} rescaled, {} already 816x816, {} errors",
            report.rescaled,
            report.pre_normalized,
            report.errors.len()
        );
        records = report.records;
    }

    let assigned = split(&records, &SplitSpec::with_seed(a.seed))?;
    match &a.out {
        Some(path) => write_manifest(path, &assigned),
        None => datakit::write_records(stdout, &assigned).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn crop(a: &CropArgs) -> Result<CropReport> {
    let frame = Frame::open(&a.image)?;
    let (reference, boxes) = normalize_with_boxes(&frame, &[a.r#box]);
    let reference_box = boxes[0];
    let expanded = if a.no_expand {
        reference_box
    } else {
        expand_margin(&reference_box, &reference)
    };
    let triple = make_box_triple(&expanded, DEFAULT_DELTA)?;
    let crops = extract_and_squeeze(&reference, &triple)?;

    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut images = Vec::new();
    for (name, image) in ["left", "middle", "right"].iter().zip(&crops.images) {
        let path = a.out.join(format!("{name}.png"));
        image.save(&path).map_err(|e| Error::image(&path, e))?;
        images.push(path);
    }
    Ok(CropReport {
        reference_box,
        expanded,
        triple,
        images,
    })
}

fn classify(a: ClassifyArgs, stdout: &mut dyn Write) -> Result<()> {
    let frame = Frame::open(&a.image)?;
    let boxes = if a.boxes.is_empty() {
        vec![FaceBox::from_coords(0, 0, frame.width() as i32 - 1, frame.height() as i32 - 1)]
    } else {
        a.boxes
    };
    let scheme = if a.single_crop {
        CropScheme::SingleCrop
    } else {
        CropScheme::TwoBoxThreeCrop
    };
    let pipeline = Pipeline::new(load(&a.model.model)?, a.model.mode.into(), 1)?.with_scheme(scheme);
    let result = pipeline.process(0, &frame, &boxes)?;
    emit(&result.faces, a.out.as_deref(), stdout)
}

fn video(a: VideoArgs, stdout: &mut dyn Write) -> Result<()> {
    let frames = ImageSequence::open(&a.video)?;
    let mut detections = SidecarDetections::from_path(&a.detections)?;
    let pipeline = Pipeline::new(load(&a.model.model)?, a.model.mode.into(), a.parallel)?;
    let mut sink: Box<dyn AnnotationSink> = match &a.out {
        Some(dir) => Box::new(DirectorySink::create(dir)?),
        None => Box::new(NullSink),
    };
    let run = run_video(frames, &mut detections, &pipeline, sink.as_mut())?;
    if let Some(path) = &a.results {
        let mut text = String::new();
        for frame in &run.frames {
            text += &serde_json::to_string(frame)?;
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    emit(&run.report, a.fps_report.as_deref(), stdout)?;
    match run.report.failure {
        Some(f) => Err(Error::Sink {
            frame: run.report.frames.saturating_sub(1),
            message: f,
        }),
        None => Ok(()),
    }
}

fn evaluate(a: EvaluateArgs, stdout: &mut dyn Write) -> Result<()> {
    let manifest = read_manifest(&a.manifest)?;
    if a.ablation {
        let handle = load(&a.model.model)?;
        let report = ablation(&manifest, &handle, a.model.mode.into(), a.parallel)?;
        return emit(&report, a.out.as_deref(), stdout);
    }
    let path = a.predictions.expect("clap requires predictions without --ablation");
    let predictions = read_predictions(&path)?;
    let (pairs, unmatched) = PredictionRecord::join(&manifest, &predictions)?;
    if unmatched > 0 {
        log::warn!("{unmatched} manifest records have no prediction and were not scored");
    }
    let report = evaluate_labels(&pairs)?;
    emit(&report, a.out.as_deref(), stdout)
}

/// Accepts a JSON array or JSON lines.
fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
