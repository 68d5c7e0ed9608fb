//! CentripetalText codec for arbitrary-shape scene text.
//!
//! Text instances are represented as kernels (shrunk text regions) plus a
//! per-pixel centripetal shift that moves every text pixel onto its own
//! kernel. This crate
//!
//! * encodes polygon annotations into supervision maps ([`encoder`]),
//! * decodes predicted maps into instances by one-step pixel aggregation
//!   ([`decoder`]),
//! * computes the masked Dice + relaxed Smooth-L1 objective with analytic
//!   gradients ([`loss`]),
//! * scores detections ([`eval`]) and runs perturbation and timing studies
//!   ([`harness`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). Map tensors are
//! exchanged as `f32`; the aliases below name the common instantiations.

pub mod decoder;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod loss;
pub mod maps;
pub mod scalar;
pub mod synth;

pub use decoder::{binarize, decode, decode_parallel, to_proposals, DecodeConfig, DecodedInstance, Proposal};
pub use encoder::{compute_regression_mask, generate_labels, LabelBundle, RegressionMask, TextAnnotation};
pub use error::{Error, Result};
pub use eval::{match_and_score, polygon_iou, EvalReport};
pub use geometry::{BitMask, Connectivity, LabeledGrid, Point, Polygon, RotatedRect};
pub use harness::{bench_decode, perturb, robustness_curve, BenchReport, PerturbMode, PerturbSpec};
pub use loss::{dice_loss, ohem_select, relaxed_l1_loss, smooth_l1, total_loss, LossConfig, LossReport};
pub use maps::{PredictionMaps, ScalarMap, ShiftField};
pub use scalar::Scalar;

pub type Polygon32 = Polygon<f32>;
pub type Polygon64 = Polygon<f64>;
pub type Annotation64 = TextAnnotation<f64>;
pub type LabelBundle32 = LabelBundle<f32>;
pub type LabelBundle64 = LabelBundle<f64>;
pub type PredictionMaps32 = PredictionMaps<f32>;
pub type PredictionMaps64 = PredictionMaps<f64>;
pub type DecodeConfig32 = DecodeConfig<f32>;
pub type LossConfig32 = LossConfig<f32>;
pub type LossConfig64 = LossConfig<f64>;
pub type LossReport64 = LossReport<f64>;
