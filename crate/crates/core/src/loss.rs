//! Training objective: masked Dice with hard negative mining on the kernel
//! map, plus the relaxed Smooth-L1 regression on the shift field.
//!
//! All masks (training mask, OHEM selection, regression mask) are treated as
//! constants; gradients are taken with respect to the predicted maps only.

use std::cmp::Ordering;

use crate::encoder::{compute_regression_mask, LabelBundle, RegressionMask};
use crate::error::{check_dims, Error, Result};
use crate::geometry::BitMask;
use crate::maps::{PredictionMaps, ScalarMap, ShiftField};
use crate::scalar::Scalar;

/// Weight of the regression term.
pub const DEFAULT_LAMBDA: f64 = 0.05;
/// Hard negatives kept per positive.
pub const DEFAULT_OHEM_RATIO: f64 = 3.0;
pub const DEFAULT_SMOOTH_L1_BETA: f64 = 1.0;
pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig<T = f64> {
    pub lambda: T,
    pub ohem_ratio: T,
    pub smooth_l1_beta: T,
    pub eps: T,
}

impl<T: Scalar> Default for LossConfig<T> {
    fn default() -> Self {
        Self {
            lambda: T::lit(DEFAULT_LAMBDA),
            ohem_ratio: T::lit(DEFAULT_OHEM_RATIO),
            smooth_l1_beta: T::lit(DEFAULT_SMOOTH_L1_BETA),
            eps: T::lit(DEFAULT_EPS),
        }
    }
}

impl<T: Scalar> LossConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        if !(self.lambda > z && self.ohem_ratio > z && self.smooth_l1_beta > z && self.eps > z) {
            return Err(Error::InvalidArgument(format!(
                "loss parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Scalar losses and gradients of `total` with respect to the predictions.
#[derive(Clone, Debug)]
pub struct LossReport<T = f64> {
    pub seg_loss: T,
    pub reg_loss: T,
    pub total: T,
    pub grad_prob: ScalarMap<T>,
    pub grad_shift: ShiftField<T>,
    /// Effective segmentation support (training mask and OHEM selection).
    pub ohem_mask: BitMask,
    pub regression_mask: RegressionMask,
}

/// Keeps every positive and the `ratio * #pos` highest-scoring negatives.
///
/// Only pixels with `training_mask = 1` take part. Ties at the cut-off go to
/// the earlier pixel in raster order. With no positives the training mask is
/// returned unchanged.
pub fn ohem_select<T: Scalar>(
    pred_prob: &ScalarMap<T>,
    gt_kernel: &BitMask,
    training_mask: &BitMask,
    ratio: T,
) -> Result<BitMask> {
    check_dims(gt_kernel.dims(), pred_prob.dims())?;
    check_dims(gt_kernel.dims(), training_mask.dims())?;
    let (h, w) = gt_kernel.dims();
    let gt = gt_kernel.bits();
    let tm = training_mask.bits();
    let probs = pred_prob.data();

    let positives = gt.iter().zip(tm).filter(|(&g, &m)| g && m).count();
    if positives == 0 {
        return Ok(training_mask.clone());
    }
    let mut negatives: Vec<(T, usize)> = (0..h * w)
        .filter(|&i| !gt[i] && tm[i])
        .map(|i| (probs[i], i))
        .collect();
    let wanted = (ratio * T::from_index(positives))
        .floor()
        .to_usize()
        .unwrap_or(usize::MAX);
    let k = wanted.min(negatives.len());

    let mut out = gt_kernel.and(training_mask);
    if k > 0 {
        let hardest_first = |a: &(T, usize), b: &(T, usize)| -> Ordering {
            b.0.partial_cmp(&a.0)
                .unwrap_or_else(|| b.0.is_nan().cmp(&a.0.is_nan()))
                .then(a.1.cmp(&b.1))
        };
        if k < negatives.len() {
            negatives.select_nth_unstable_by(k - 1, hardest_first);
        }
        for &(_, i) in &negatives[..k] {
            out.bits_mut()[i] = true;
        }
    }
    Ok(out)
}

/// Global Dice loss over the masked support, with its gradient w.r.t. `pred`.
pub fn dice_loss<T: Scalar>(
    pred: &ScalarMap<T>,
    gt: &BitMask,
    mask: &BitMask,
    eps: T,
) -> Result<(T, ScalarMap<T>)> {
    check_dims(gt.dims(), pred.dims())?;
    check_dims(gt.dims(), mask.dims())?;
    if let Some(i) = pred
        .data()
        .iter()
        .position(|&p| !(p >= T::zero() && p <= T::one()))
    {
        return Err(Error::DomainError(format!(
            "probability {} at index {i} outside [0, 1]",
            pred.data()[i]
        )));
    }
    let (h, w) = gt.dims();
    let mut inter = T::zero();
    let mut pred_sq = T::zero();
    let mut gt_sq = T::zero();
    for i in 0..h * w {
        if !mask.bits()[i] {
            continue;
        }
        let p = pred.data()[i];
        let g = if gt.bits()[i] { T::one() } else { T::zero() };
        inter = inter + p * g;
        pred_sq = pred_sq + p * p;
        gt_sq = gt_sq + g;
    }
    let two = T::lit(2.0);
    let num = two * inter + eps;
    let den = pred_sq + gt_sq + eps;
    let loss = T::one() - num / den;

    let mut grad = ScalarMap::zeros(h, w);
    let den2 = den * den;
    for i in 0..h * w {
        if !mask.bits()[i] {
            continue;
        }
        let p = pred.data()[i];
        let g = if gt.bits()[i] { T::one() } else { T::zero() };
        grad.data_mut()[i] = -(two * g * den - num * two * p) / den2;
    }
    Ok((loss, grad))
}

/// `0.5 d^2 / beta` inside `|d| < beta`, `|d| - 0.5 beta` outside.
#[inline]
pub fn smooth_l1<T: Scalar>(d: T, beta: T) -> T {
    let a = d.abs();
    if a < beta {
        T::lit(0.5) * d * d / beta
    } else {
        a - T::lit(0.5) * beta
    }
}

#[inline]
pub fn smooth_l1_grad<T: Scalar>(d: T, beta: T) -> T {
    if d.abs() < beta {
        d / beta
    } else {
        d.signum()
    }
}

/// Smooth-L1 between predicted and target shifts, gated by `regression_mask`
/// and normalized by the number of gated pixels.
pub fn relaxed_l1_loss<T: Scalar>(
    pred_shift: &ShiftField<T>,
    bundle: &LabelBundle<T>,
    regression_mask: &RegressionMask,
    cfg: &LossConfig<T>,
) -> Result<(T, ShiftField<T>)> {
    check_dims(bundle.dims(), pred_shift.dims())?;
    check_dims(bundle.dims(), regression_mask.dims())?;
    let (h, w) = bundle.dims();
    let beta = cfg.smooth_l1_beta;
    let active = regression_mask.count();
    let norm = T::from_index(active) + cfg.eps;
    let mut sum = T::zero();
    let mut grad = ShiftField::zeros(h, w);
    let target = bundle.shift_field.data();
    let pred = pred_shift.data();
    for (i, &on) in regression_mask.mask.bits().iter().enumerate() {
        if !on {
            continue;
        }
        let ddx = pred[2 * i] - target[2 * i];
        let ddy = pred[2 * i + 1] - target[2 * i + 1];
        sum = sum + smooth_l1(ddx, beta) + smooth_l1(ddy, beta);
        let g = grad.data_mut();
        g[2 * i] = smooth_l1_grad(ddx, beta) / norm;
        g[2 * i + 1] = smooth_l1_grad(ddy, beta) / norm;
    }
    Ok((sum / norm, grad))
}

/// Segmentation loss plus `lambda` times the relaxed regression loss.
pub fn total_loss<T: Scalar>(
    pred: &PredictionMaps<T>,
    bundle: &LabelBundle<T>,
    cfg: &LossConfig<T>,
) -> Result<LossReport<T>> {
    cfg.validate()?;
    check_dims(bundle.dims(), pred.dims())?;
    let selected = ohem_select(
        &pred.prob_map,
        &bundle.kernel_map,
        &bundle.training_mask,
        cfg.ohem_ratio,
    )?;
    let ohem_mask = selected.and(&bundle.training_mask);
    let (seg_loss, grad_prob) = dice_loss(&pred.prob_map, &bundle.kernel_map, &ohem_mask, cfg.eps)?;

    let regression_mask = compute_regression_mask(&pred.shift_field, bundle)?;
    let (reg_loss, mut grad_shift) =
        relaxed_l1_loss(&pred.shift_field, bundle, &regression_mask, cfg)?;
    for g in grad_shift.data_mut() {
        *g = *g * cfg.lambda;
    }
    Ok(LossReport {
        seg_loss,
        reg_loss,
        total: seg_loss + cfg.lambda * reg_loss,
        grad_prob,
        grad_shift,
        ohem_mask,
        regression_mask,
    })
}
