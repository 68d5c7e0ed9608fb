//! Shift perturbation studies and decode timing.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::decoder::{decode, decode_parallel, DecodeConfig, DecodedInstance};
use crate::encoder::LabelBundle;
use crate::error::{Error, Result};
use crate::geometry::BitMask;
use crate::maps::{PredictionMaps, ScalarMap};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PerturbMode {
    /// Adds `N(0, magnitude^2)` to each shift component of every pixel.
    GaussianNoise,
    /// Re-aims every supervised text pixel at a random pixel of its own
    /// kernel, with sub-pixel jitter bounded by `min(magnitude, 0.49)`.
    RetargetInKernel,
    /// Adds `U[-magnitude, magnitude]` to each shift component of every pixel.
    RetargetUniform,
}

impl FromStr for PerturbMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_noise" | "gaussian" => Ok(Self::GaussianNoise),
            "retarget_in_kernel" => Ok(Self::RetargetInKernel),
            "retarget_uniform" | "uniform" => Ok(Self::RetargetUniform),
            other => Err(Error::InvalidArgument(format!("unknown perturbation mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for PerturbMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::GaussianNoise => "gaussian_noise",
            Self::RetargetInKernel => "retarget_in_kernel",
            Self::RetargetUniform => "retarget_uniform",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbSpec {
    pub mode: PerturbMode,
    pub magnitude: f64,
    pub seed: u64,
}

/// Per-pixel generator: one ChaCha stream per pixel index, so draws do not
/// depend on iteration order or thread count.
fn pixel_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Turns ground-truth labels into a perturbed prediction.
///
/// The probability map is the kernel map as `0`/`1`.
pub fn perturb<T: Scalar>(bundle: &LabelBundle<T>, spec: &PerturbSpec) -> Result<PredictionMaps<T>> {
    if !(spec.magnitude >= 0.0 && spec.magnitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "perturbation magnitude must be finite and >= 0, got {}",
            spec.magnitude
        )));
    }
    let (h, w) = bundle.dims();
    let prob_map = ScalarMap::from_mask(&bundle.kernel_map);
    let mut shift = bundle.shift_field.clone();
    let m = spec.magnitude;
    match spec.mode {
        PerturbMode::GaussianNoise | PerturbMode::RetargetUniform if m == 0.0 => {}
        PerturbMode::GaussianNoise => {
            let normal = Normal::new(0.0, m).expect("finite std");
            for (i, px) in shift.data_mut().chunks_exact_mut(2).enumerate() {
                let mut rng = pixel_rng(spec.seed, i);
                px[0] = px[0] + T::lit(normal.sample(&mut rng));
                px[1] = px[1] + T::lit(normal.sample(&mut rng));
            }
        }
        PerturbMode::RetargetUniform => {
            for (i, px) in shift.data_mut().chunks_exact_mut(2).enumerate() {
                let mut rng = pixel_rng(spec.seed, i);
                px[0] = px[0] + T::lit(rng.random_range(-m..=m));
                px[1] = px[1] + T::lit(rng.random_range(-m..=m));
            }
        }
        PerturbMode::RetargetInKernel => {
            let labels = bundle.instances.len();
            let mut kernels: Vec<Vec<(usize, usize)>> = vec![Vec::new(); labels + 1];
            for (i, &k) in bundle.kernel_id.labels().iter().enumerate() {
                if k != 0 {
                    kernels[k as usize].push((i % w, i / w));
                }
            }
            let jitter = m.min(0.49);
            for y in 0..h {
                for x in 0..w {
                    let label = bundle.instance_id.get(x, y);
                    if label == 0
                        || bundle.ignore_mask.get(x, y)
                        || kernels[label as usize].is_empty()
                    {
                        continue;
                    }
                    let mut rng = pixel_rng(spec.seed, y * w + x);
                    let pool = &kernels[label as usize];
                    let (kx, ky) = pool[rng.random_range(0..pool.len())];
                    let (jx, jy) = if jitter > 0.0 {
                        (rng.random_range(-jitter..=jitter), rng.random_range(-jitter..=jitter))
                    } else {
                        (0.0, 0.0)
                    };
                    shift.set(
                        x,
                        y,
                        (
                            T::lit(kx as f64 - x as f64 + jx),
                            T::lit(ky as f64 - y as f64 + jy),
                        ),
                    );
                }
            }
        }
    }
    PredictionMaps::new(prob_map, shift)
}

fn mask_iou(a: &BitMask, b: &BitMask) -> f64 {
    let inter = a.intersection_count(b);
    let union = a.count() + b.count() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Mean over supervised ground-truth instances of the best pixel IoU with
/// any decoded instance (`0` for a missed instance, `1` for an empty scene).
pub fn instance_mean_iou<T: Scalar, U: Scalar>(
    bundle: &LabelBundle<T>,
    decoded: &[DecodedInstance<U>],
) -> f64 {
    let labels: Vec<u32> = bundle.supervised_labels().collect();
    if labels.is_empty() {
        return 1.0;
    }
    let total: f64 = labels
        .iter()
        .map(|&l| {
            let gt = bundle.instance_mask(l);
            decoded
                .iter()
                .map(|d| mask_iou(&gt, &d.pixel_mask))
                .fold(0.0, f64::max)
        })
        .sum();
    total / labels.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub magnitude: f64,
    pub iou: f64,
}

/// One perturb-decode-score round per magnitude.
pub fn robustness_curve<T: Scalar>(
    bundle: &LabelBundle<T>,
    mode: PerturbMode,
    magnitudes: &[f64],
    seed: u64,
    cfg: &DecodeConfig<T>,
) -> Result<Vec<CurvePoint>> {
    if magnitudes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("magnitudes must be sorted ascending".into()));
    }
    magnitudes
        .iter()
        .map(|&magnitude| {
            let pred = perturb(bundle, &PerturbSpec { mode, magnitude, seed })?;
            let decoded = decode(&pred, cfg)?;
            Ok(CurvePoint {
                magnitude,
                iou: instance_mean_iou(bundle, &decoded),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub height: usize,
    pub width: usize,
    pub instances: usize,
    pub repetitions: usize,
    /// Worker threads of the parallel path; `1` for the sequential path.
    pub threads: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub pixels_per_second: f64,
    /// Raw per-repetition timings.
    pub samples_ms: Vec<f64>,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str =
        "height,width,instances,repetitions,threads,mean_ms,median_ms,p95_ms,pixels_per_second";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.4},{:.4},{:.4},{:.0}",
            self.height,
            self.width,
            self.instances,
            self.repetitions,
            self.threads,
            self.mean_ms,
            self.median_ms,
            self.p95_ms,
            self.pixels_per_second
        )
    }
}

/// Nearest-rank percentile of sorted samples.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Times `decode` alone. One warm-up run is discarded.
///
/// `threads = None` runs the sequential path; `Some(n)` runs the parallel
/// path inside a dedicated pool of `n` workers.
pub fn bench_decode<T: Scalar>(
    pred: &PredictionMaps<T>,
    cfg: &DecodeConfig<T>,
    repetitions: usize,
    threads: Option<usize>,
) -> Result<BenchReport> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
    }
    let pool = match threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?,
        ),
        None => None,
    };
    let run = || -> Result<(f64, usize)> {
        let start = Instant::now();
        let out = match &pool {
            Some(p) => p.install(|| decode_parallel(pred, cfg))?,
            None => decode(pred, cfg)?,
        };
        let ms = start.elapsed().as_secs_f64() * 1e3;
        Ok((ms, out.len()))
    };
    let (_, instances) = run()?;
    let mut samples = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        samples.push(run()?.0.max(f64::MIN_POSITIVE));
    }
    let mut sorted = samples.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean_ms = samples.iter().sum::<f64>() / repetitions as f64;
    let (h, w) = pred.dims();
    Ok(BenchReport {
        height: h,
        width: w,
        instances,
        repetitions,
        threads: threads.unwrap_or(1),
        mean_ms,
        median_ms: median(&sorted),
        p95_ms: percentile(&sorted, 0.95),
        pixels_per_second: (h * w) as f64 / (mean_ms / 1e3),
        samples_ms: samples,
    })
}
