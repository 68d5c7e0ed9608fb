//! `ctext`: encode, decode, score and stress-test centripetal text maps.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 when the inputs
//! themselves are unreadable or invalid.

mod render;

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use centripetal::decoder::{DEFAULT_BINARIZE_THRESHOLD, DEFAULT_MIN_INSTANCE_AREA, DEFAULT_MIN_KERNEL_AREA};
use centripetal::encoder::generate_labels;
use centripetal::eval::DEFAULT_IOU_THRESHOLD;
use centripetal::geometry::DEFAULT_SHRINK_RATIO;
use centripetal::harness::{robustness_curve, BenchReport};
use centripetal::io::{self, AnnotationRecord, Tensor};
use centripetal::loss::{DEFAULT_LAMBDA, DEFAULT_OHEM_RATIO};
use centripetal::{
    bench_decode, decode, decode_parallel, match_and_score, synth, to_proposals, total_loss, Connectivity,
    DecodeConfig, DecodedInstance, LabelBundle, LossConfig, PerturbMode, PredictionMaps, ScalarMap,
};

#[derive(Parser, Debug)]
#[command(name = "ctext", version, about = "Centripetal text map codec")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[command(next_help_heading = "Global options")]
struct Global {
    /// Kernel shrink ratio r; offset distance is A(1 - r^2)/L
    #[arg(long, global = true, default_value_t = DEFAULT_SHRINK_RATIO)]
    shrink_ratio: f64,
    /// Kernel binarization threshold on the probability map
    #[arg(long, global = true, default_value_t = DEFAULT_BINARIZE_THRESHOLD)]
    threshold: f64,
    /// Pixel connectivity for kernel components and contours (4 or 8)
    #[arg(long, global = true, default_value_t = 8, value_parser = parse_connectivity)]
    connectivity: u8,
    /// Weight of the regression loss in the total loss
    #[arg(long, global = true, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    /// Hard negatives kept per positive pixel
    #[arg(long, global = true, default_value_t = DEFAULT_OHEM_RATIO)]
    ohem_ratio: f64,
    /// Seed for perturbations and synthetic scenes
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

fn parse_connectivity(s: &str) -> Result<u8, String> {
    let v: u8 = s.parse().map_err(|e| format!("{e}"))?;
    Connectivity::try_from(v).map(|_| v).map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Annotations to label tensors (one directory per scene)
    Encode {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        width: usize,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Prediction tensors to detections (annotation JSON lines)
    Decode {
        #[command(flatten)]
        pred: PredArgs,
        /// Detections file; standard output when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write minimum-area rectangles as JSON lines
        #[arg(long)]
        proposals: Option<PathBuf>,
        /// Render detections (green) onto the probability map
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Ground truth drawn in red on the overlay
        #[arg(long, requires = "overlay")]
        gt: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MIN_KERNEL_AREA)]
        min_kernel_area: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_INSTANCE_AREA)]
        min_instance_area: usize,
        #[arg(long, default_value_t = 0.0)]
        score_threshold: f64,
        /// Use the rayon decode path
        #[arg(long)]
        parallel: bool,
    },
    /// Prediction plus label tensors to a JSON loss report
    Loss {
        #[command(flatten)]
        pred: PredArgs,
        /// Directory written by `encode`
        #[arg(long)]
        labels: PathBuf,
        /// Write grad_prob.ctmp, grad_shift.ctmp and regression_mask.ctmp here
        #[arg(long)]
        grad_out: Option<PathBuf>,
    },
    /// Detections against ground truth, JSON report on standard output
    Eval {
        #[arg(long)]
        det: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
        iou: f64,
    },
    /// Robustness curve of decode under shift perturbations (CSV magnitude,iou)
    Perturb {
        /// Directory written by `encode`
        #[arg(long)]
        labels: PathBuf,
        /// gaussian_noise, retarget_in_kernel or retarget_uniform
        #[arg(long, default_value = "gaussian_noise")]
        mode: PerturbMode,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,4,8")]
        magnitudes: Vec<f64>,
        /// CSV file; standard output when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// Render the curve as a PNG
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Decode timing (CSV). Uses a synthetic scene unless tensors are given
    Bench {
        #[arg(long, requires = "shift")]
        prob: Option<PathBuf>,
        #[arg(long, requires = "prob")]
        shift: Option<PathBuf>,
        #[arg(long, default_value_t = 640)]
        height: usize,
        #[arg(long, default_value_t = 640)]
        width: usize,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 20)]
        repetitions: usize,
        /// Also time the parallel path with this many threads
        #[arg(long)]
        parallel: Option<usize>,
        /// CSV file; standard output when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random non-overlapping text polygons as annotation JSON lines
    Synth {
        #[arg(long)]
        height: usize,
        #[arg(long)]
        width: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct PredArgs {
    /// Probability map, H x W (f32, or u8 read as raw values)
    #[arg(long)]
    prob: PathBuf,
    /// Shift field, H x W x 2 f32
    #[arg(long)]
    shift: PathBuf,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<centripetal::Error> for CliError {
    fn from(e: centripetal::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<image::ImageError> for CliError {
    fn from(e: image::ImageError) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Data error prefixed with the file it came from.
fn at(path: &Path) -> impl Fn(centripetal::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Usage(_) => ExitCode::from(1),
                CliError::Data(_) => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let g = cli.global;
    match cli.command {
        Command::Encode { annotations, height, width, out } => encode_cmd(&g, &annotations, height, width, &out),
        Command::Decode {
            pred,
            out,
            proposals,
            overlay,
            gt,
            min_kernel_area,
            min_instance_area,
            score_threshold,
            parallel,
        } => {
            let mut cfg = decode_config(&g)?;
            cfg.min_kernel_area = min_kernel_area;
            cfg.min_instance_area = min_instance_area;
            cfg.score_threshold = score_threshold as f32;
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let maps = read_prediction(&pred)?;
            let found = if parallel { decode_parallel(&maps, &cfg)? } else { decode(&maps, &cfg)? };
            let records: Vec<AnnotationRecord> = found.iter().map(detection_record).collect();
            emit(out.as_deref(), &io::format_annotations(&records))?;
            if let Some(path) = proposals {
                fs::write(path, proposals_json(&found)?)?;
            }
            if let Some(path) = overlay {
                let mut img = render::prob_background(&maps.prob_map);
                if let Some(gt) = gt {
                    let polys: Vec<_> = io::read_annotation_file(&gt).map_err(at(&gt))?
                        .iter()
                        .map(|r| r.to_annotation(0).map(|a| a.polygon))
                        .collect::<Result<_, _>>()?;
                    render::draw_outlines(&mut img, &polys, render::GROUND_TRUTH_COLOR);
                }
                let dets: Vec<_> = found.iter().map(|d| d.contour.cast::<f64>()).collect();
                render::draw_outlines(&mut img, &dets, render::DETECTION_COLOR);
                img.save(path)?;
            }
            Ok(())
        }
        Command::Loss { pred, labels, grad_out } => {
            let cfg = LossConfig::<f64> {
                lambda: g.lambda,
                ohem_ratio: g.ohem_ratio,
                ..LossConfig::default()
            };
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let maps = read_prediction(&pred)?.cast::<f64>();
            let bundle = io::read_bundle(&labels).map_err(at(&labels))?.cast::<f64>();
            let report = total_loss(&maps, &bundle, &cfg)?;
            let summary = json!({
                "seg_loss": report.seg_loss,
                "reg_loss": report.reg_loss,
                "total": report.total,
                "lambda": cfg.lambda,
                "ohem_ratio": cfg.ohem_ratio,
                "ohem_pixels": report.ohem_mask.count(),
                "regression_pixels": report.regression_mask.count(),
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("json value"));
            if let Some(dir) = grad_out {
                fs::create_dir_all(&dir)?;
                Tensor::from(&report.grad_prob.cast::<f32>()).write(dir.join("grad_prob.ctmp"))?;
                Tensor::from(&report.grad_shift.cast::<f32>()).write(dir.join("grad_shift.ctmp"))?;
                Tensor::from(&report.regression_mask.mask).write(dir.join("regression_mask.ctmp"))?;
            }
            Ok(())
        }
        Command::Eval { det, gt, iou } => {
            if !(iou > 0.0 && iou < 1.0) {
                return Err(CliError::Usage(format!("--iou must lie in (0, 1), got {iou}")));
            }
            let dets = io::to_annotations(&io::read_annotation_file(&det).map_err(at(&det))?).map_err(at(&det))?;
            let gts = io::to_annotations(&io::read_annotation_file(&gt).map_err(at(&gt))?).map_err(at(&gt))?;
            let report = match_and_score(&dets, &gts, iou)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
        Command::Perturb { labels, mode, magnitudes, out, plot } => {
            if magnitudes.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                return Err(CliError::Usage("magnitudes must be finite and non-negative".into()));
            }
            if magnitudes.windows(2).any(|w| w[0] > w[1]) {
                return Err(CliError::Usage("magnitudes must be sorted ascending".into()));
            }
            let cfg = decode_config(&g)?;
            let bundle = io::read_bundle(&labels).map_err(at(&labels))?;
            let curve = robustness_curve(&bundle, mode, &magnitudes, g.seed, &cfg)?;
            let mut csv = String::from("magnitude,iou\n");
            for p in &curve {
                csv.push_str(&format!("{},{}\n", p.magnitude, p.iou));
            }
            emit(out.as_deref(), &csv)?;
            if let Some(path) = plot {
                render::plot_curve(&curve, &path)?;
            }
            Ok(())
        }
        Command::Bench { prob, shift, height, width, instances, repetitions, parallel, out } => {
            if repetitions == 0 {
                return Err(CliError::Usage("--repetitions must be at least 1".into()));
            }
            if parallel == Some(0) {
                return Err(CliError::Usage("--parallel needs at least one thread".into()));
            }
            let cfg = decode_config(&g)?;
            let maps = match (prob, shift) {
                (Some(prob), Some(shift)) => read_prediction(&PredArgs { prob, shift })?,
                _ => synthetic_prediction(&g, height, width, instances)?,
            };
            let mut rows: Vec<BenchReport> = vec![bench_decode(&maps, &cfg, repetitions, None)?];
            if let Some(n) = parallel {
                rows.push(bench_decode(&maps, &cfg, repetitions, Some(n))?);
            }
            let mut csv = format!("{}\n", BenchReport::CSV_HEADER);
            for r in &rows {
                csv.push_str(&r.csv_row());
                csv.push('\n');
            }
            emit(out.as_deref(), &csv)
        }
        Command::Synth { height, width, count, out } => {
            if height == 0 || width == 0 {
                return Err(CliError::Usage("--height and --width must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let scene = synth::random_scene(&mut rng, height, width, count, 4.0);
            let records: Vec<_> = scene
                .iter()
                .map(|a| AnnotationRecord::from_polygon(&a.polygon, a.ignore, None))
                .collect();
            emit(out.as_deref(), &io::format_annotations(&records))
        }
    }
}

fn encode_cmd(g: &Global, annotations: &Path, height: usize, width: usize, out: &Path) -> CliResult {
    if height == 0 || width == 0 {
        return Err(CliError::Usage("--height and --width must be positive".into()));
    }
    check_shrink_ratio(g)?;
    let anns = io::to_annotations(&io::read_annotation_file(annotations).map_err(at(annotations))?)
        .map_err(at(annotations))?;
    let bundle: LabelBundle<f32> = generate_labels(&anns, height, width, g.shrink_ratio)?.cast();
    io::write_bundle(out, &bundle)?;
    Ok(())
}

fn check_shrink_ratio(g: &Global) -> CliResult {
    if !(g.shrink_ratio > 0.0 && g.shrink_ratio <= 1.0) {
        return Err(CliError::Usage(format!(
            "--shrink-ratio must lie in (0, 1], got {}",
            g.shrink_ratio
        )));
    }
    Ok(())
}

fn decode_config(g: &Global) -> CliResult<DecodeConfig<f32>> {
    let cfg = DecodeConfig::<f32> {
        binarize_threshold: g.threshold as f32,
        connectivity: Connectivity::try_from(g.connectivity).map_err(|e| CliError::Usage(e.to_string()))?,
        ..DecodeConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn read_prediction(args: &PredArgs) -> CliResult<PredictionMaps<f32>> {
    let prob = Tensor::read(&args.prob)
        .and_then(|t| t.to_scalar_map())
        .map_err(at(&args.prob))?;
    let shift = Tensor::read(&args.shift)
        .and_then(|t| t.to_shift_field())
        .map_err(at(&args.shift))?;
    Ok(PredictionMaps::new(prob, shift)?)
}

/// Perfect prediction maps for a random scene: kernels as probabilities and
/// the encoded shifts.
fn synthetic_prediction(g: &Global, height: usize, width: usize, instances: usize) -> CliResult<PredictionMaps<f32>> {
    if height == 0 || width == 0 {
        return Err(CliError::Usage("--height and --width must be positive".into()));
    }
    check_shrink_ratio(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let scene = synth::random_scene(&mut rng, height, width, instances, 4.0);
    let bundle: LabelBundle<f32> = generate_labels(&scene, height, width, g.shrink_ratio)?.cast();
    Ok(PredictionMaps::new(
        ScalarMap::from_mask(&bundle.kernel_map),
        bundle.shift_field.clone(),
    )?)
}

fn detection_record(d: &DecodedInstance<f32>) -> AnnotationRecord {
    AnnotationRecord::from_polygon(&d.contour.cast::<f64>(), false, Some(f64::from(d.score)))
}

fn proposals_json(found: &[DecodedInstance<f32>]) -> CliResult<String> {
    let mut s = String::new();
    for (d, p) in found.iter().zip(to_proposals(found)?) {
        let corners: Vec<[f32; 2]> = p.rect.corners().iter().map(|c| [c.x, c.y]).collect();
        let line = json!({
            "kernel_id": d.kernel_id,
            "center": [p.rect.center.x, p.rect.center.y],
            "width": p.rect.width,
            "height": p.rect.height,
            "angle": p.rect.angle,
            "corners": corners,
            "score": p.score,
            "pixels": p.mask.count(),
        });
        s.push_str(&line.to_string());
        s.push('\n');
    }
    Ok(s)
}

fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
