//! Inference post-processing: one-step pixel aggregation.
//!
//! The probability map is binarized and split into kernel components. Every
//! pixel is then moved once by its predicted shift; it joins whichever kernel
//! its rounded target lands on, or is dropped as background. The per-pixel
//! assignment depends only on the pixel, its shift and the kernel labeling,
//! so the sequential and parallel paths produce identical output.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    connected_components, extract_contour, min_area_rect, BitMask, Connectivity, LabeledGrid,
    Polygon, RotatedRect,
};
use crate::maps::{PredictionMaps, ScalarMap};
use crate::scalar::{round_to_index, Scalar};

pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 0.2;
pub const DEFAULT_MIN_KERNEL_AREA: usize = 2;
pub const DEFAULT_MIN_INSTANCE_AREA: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecodeConfig<T = f32> {
    pub binarize_threshold: T,
    pub connectivity: Connectivity,
    /// Kernel components smaller than this are treated as background.
    pub min_kernel_area: usize,
    /// Instances with fewer aggregated pixels are dropped.
    pub min_instance_area: usize,
    pub score_threshold: T,
}

impl<T: Scalar> Default for DecodeConfig<T> {
    fn default() -> Self {
        Self {
            binarize_threshold: T::lit(DEFAULT_BINARIZE_THRESHOLD),
            connectivity: Connectivity::Eight,
            min_kernel_area: DEFAULT_MIN_KERNEL_AREA,
            min_instance_area: DEFAULT_MIN_INSTANCE_AREA,
            score_threshold: T::zero(),
        }
    }
}

impl<T: Scalar> DecodeConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.binarize_threshold > T::zero() && self.binarize_threshold < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "binarize threshold must lie in (0, 1), got {}",
                self.binarize_threshold
            )));
        }
        if self.score_threshold.is_nan() {
            return Err(Error::InvalidArgument("score threshold is NaN".into()));
        }
        Ok(())
    }
}

/// One aggregated text instance.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedInstance<T = f32> {
    /// Label of the seeding kernel component.
    pub kernel_id: u32,
    pub pixel_mask: BitMask,
    /// Outer boundary of the largest connected part of `pixel_mask`.
    pub contour: Polygon<T>,
    /// Mean probability over the kernel's pixels.
    pub score: T,
    pub pixel_count: usize,
}

/// Rectangle-plus-mask proposal derived from a decoded instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal<T = f32> {
    pub rect: RotatedRect<T>,
    pub mask: BitMask,
    pub score: T,
}

/// Sets pixels whose probability is strictly above `threshold`.
pub fn binarize<T: Scalar>(prob: &ScalarMap<T>, threshold: T) -> BitMask {
    let bits = prob.data().iter().map(|&p| p > threshold).collect();
    BitMask::from_bits(prob.height(), prob.width(), bits).expect("same dims")
}

#[derive(Clone, Copy)]
enum Exec {
    Sequential,
    Parallel,
}

/// Decodes instances on the calling thread.
pub fn decode<T: Scalar>(
    pred: &PredictionMaps<T>,
    cfg: &DecodeConfig<T>,
) -> Result<Vec<DecodedInstance<T>>> {
    decode_with(pred, cfg, Exec::Sequential)
}

/// Same contract as [`decode`], spreading pixel and instance work over the
/// current rayon pool.
pub fn decode_parallel<T: Scalar>(
    pred: &PredictionMaps<T>,
    cfg: &DecodeConfig<T>,
) -> Result<Vec<DecodedInstance<T>>> {
    decode_with(pred, cfg, Exec::Parallel)
}

/// Smallest pixel run handed to one rayon task; finer splits cost more in
/// scheduling than they save.
const PAR_MIN_PIXELS: usize = 1 << 14;

fn decode_with<T: Scalar>(
    pred: &PredictionMaps<T>,
    cfg: &DecodeConfig<T>,
    exec: Exec,
) -> Result<Vec<DecodedInstance<T>>> {
    cfg.validate()?;
    crate::error::check_dims(pred.prob_map.dims(), pred.shift_field.dims())?;
    if let Some((x, y)) = pred.first_non_finite_shift() {
        return Err(Error::NonFiniteShift { x, y });
    }
    let (h, w) = pred.dims();

    let binary = match exec {
        Exec::Sequential => binarize(&pred.prob_map, cfg.binarize_threshold),
        Exec::Parallel => {
            let thr = cfg.binarize_threshold;
            let bits = pred
                .prob_map
                .data()
                .par_iter()
                .with_min_len(PAR_MIN_PIXELS)
                .map(|&p| p > thr)
                .collect();
            BitMask::from_bits(h, w, bits)?
        }
    };
    let components = connected_components(&binary, cfg.connectivity);
    let areas = components.areas();
    let kept: Vec<bool> = areas
        .iter()
        .enumerate()
        .map(|(l, &a)| l > 0 && a >= cfg.min_kernel_area)
        .collect();

    let shift = pred.shift_field.data();
    let assign_row = |y: usize, row: &mut [u32]| {
        let fy = T::from_index(y);
        for (x, slot) in row.iter_mut().enumerate() {
            let i = 2 * (y * w + x);
            let tx = round_to_index(T::from_index(x) + shift[i]);
            let ty = round_to_index(fy + shift[i + 1]);
            *slot = match (tx, ty) {
                (Some(tx), Some(ty)) => {
                    let c = components.get_signed(tx, ty);
                    if kept[c as usize] {
                        c
                    } else {
                        0
                    }
                }
                _ => 0,
            };
        }
    };
    let mut owner = vec![0u32; h * w];
    match exec {
        Exec::Sequential => owner
            .chunks_mut(w)
            .enumerate()
            .for_each(|(y, row)| assign_row(y, row)),
        Exec::Parallel => owner
            .par_chunks_mut(w)
            .with_min_len(PAR_MIN_PIXELS.div_ceil(w))
            .enumerate()
            .for_each(|(y, row)| assign_row(y, row)),
    }

    let n = components.num_labels() as usize;
    let mut kernel_prob = vec![T::zero(); n + 1];
    for (i, &c) in components.labels().iter().enumerate() {
        if c != 0 {
            kernel_prob[c as usize] = kernel_prob[c as usize] + pred.prob_map.data()[i];
        }
    }
    // bounding boxes and pixel counts of the aggregated groups
    let mut stats = vec![GroupStats::default(); n + 1];
    for (i, &c) in owner.iter().enumerate() {
        if c != 0 {
            stats[c as usize].add(i % w, i / w);
        }
    }
    let owner = LabeledGrid::from_labels(h, w, owner)?;

    let candidates: Vec<u32> = (1..=n as u32)
        .filter(|&c| {
            let s = &stats[c as usize];
            let score = kernel_prob[c as usize] / T::from_index(areas[c as usize]);
            kept[c as usize] && s.count > 0 && s.count >= cfg.min_instance_area && score >= cfg.score_threshold
        })
        .collect();
    let build = |&c: &u32| -> Result<DecodedInstance<T>> {
        let s = &stats[c as usize];
        build_instance(&owner, c, s, cfg.connectivity).map(|(pixel_mask, contour)| DecodedInstance {
            kernel_id: c,
            pixel_mask,
            contour,
            score: kernel_prob[c as usize] / T::from_index(areas[c as usize]),
            pixel_count: s.count,
        })
    };
    match exec {
        Exec::Sequential => candidates.iter().map(build).collect(),
        Exec::Parallel => candidates.par_iter().map(build).collect(),
    }
}

#[derive(Clone, Default)]
struct GroupStats {
    count: usize,
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

impl GroupStats {
    fn add(&mut self, x: usize, y: usize) {
        if self.count == 0 {
            (self.x0, self.y0, self.x1, self.y1) = (x, y, x + 1, y + 1);
        } else {
            self.x0 = self.x0.min(x);
            self.y0 = self.y0.min(y);
            self.x1 = self.x1.max(x + 1);
            self.y1 = self.y1.max(y + 1);
        }
        self.count += 1;
    }
}

fn build_instance<T: Scalar>(
    owner: &LabeledGrid,
    c: u32,
    s: &GroupStats,
    connectivity: Connectivity,
) -> Result<(BitMask, Polygon<T>)> {
    let (h, w) = owner.dims();
    let (cw, ch) = (s.x1 - s.x0, s.y1 - s.y0);
    let mut full = BitMask::new(h, w);
    let mut crop = BitMask::new(ch, cw);
    for y in s.y0..s.y1 {
        for x in s.x0..s.x1 {
            if owner.get(x, y) == c {
                full.set(x, y, true);
                crop.set(x - s.x0, y - s.y0, true);
            }
        }
    }
    let parts = connected_components(&crop, connectivity);
    let part_areas = parts.areas();
    let largest = (1..part_areas.len())
        .max_by(|&a, &b| part_areas[a].cmp(&part_areas[b]).then(b.cmp(&a)))
        .expect("group is non-empty") as u32;
    let contour: Polygon<T> = extract_contour(&parts, largest, connectivity)?;
    let contour = contour.translated(T::from_index(s.x0), T::from_index(s.y0));
    Ok((full, contour))
}

/// Converts instances to minimum-area rectangles with their masks.
pub fn to_proposals<T: Scalar>(instances: &[DecodedInstance<T>]) -> Result<Vec<Proposal<T>>> {
    instances
        .iter()
        .map(|inst| {
            Ok(Proposal {
                rect: min_area_rect(inst.contour.vertices())?,
                mask: inst.pixel_mask.clone(),
                score: inst.score,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::ShiftField;

    #[test]
    fn binarize_is_strict() {
        let p = ScalarMap::<f32>::from_vec(1, 4, vec![0.2, 0.19, 0.21, 0.0]).unwrap();
        let b = binarize(&p, 0.2);
        assert_eq!(b.bits(), &[false, false, true, false]);
        assert!(binarize(&ScalarMap::<f32>::zeros(3, 3), 0.2).is_empty());
    }

    #[test]
    fn below_threshold_gives_nothing() {
        let pred = PredictionMaps::new(
            ScalarMap::<f32>::filled(8, 8, 0.1),
            ShiftField::zeros(8, 8),
        )
        .unwrap();
        assert!(decode(&pred, &DecodeConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn shift_decides_membership() {
        // kernels: 3x3 blocks at x in 2..5 and x in 12..15; probe pixel at (6, 3)
        let (h, w) = (8, 20);
        let mut prob = ScalarMap::<f32>::zeros(h, w);
        for y in 2..5 {
            for x in (2..5).chain(12..15) {
                prob.set(x, y, 0.9);
            }
        }
        let mut shift = ShiftField::zeros(h, w);
        shift.set(6, 3, (7.0, 0.0));
        let pred = PredictionMaps::new(prob, shift).unwrap();
        let cfg = DecodeConfig {
            min_instance_area: 1,
            ..DecodeConfig::default()
        };
        let out = decode(&pred, &cfg).unwrap();
        assert_eq!(out.len(), 2);
        assert!(!out[0].pixel_mask.get(6, 3));
        assert!(out[1].pixel_mask.get(6, 3));
        assert_eq!(out[1].pixel_count, 10);
        assert!((out[0].score - 0.9).abs() < 1e-6);
    }

    #[test]
    fn non_finite_shift_rejected() {
        let mut shift = ShiftField::<f32>::zeros(4, 4);
        shift.set(2, 1, (f32::NAN, 0.0));
        let pred = PredictionMaps::new(ScalarMap::zeros(4, 4), shift).unwrap();
        assert!(matches!(
            decode(&pred, &DecodeConfig::default()),
            Err(Error::NonFiniteShift { x: 2, y: 1 })
        ));
    }

    #[test]
    fn small_kernels_and_instances_filtered() {
        let mut prob = ScalarMap::<f32>::zeros(10, 10);
        prob.set(1, 1, 1.0);
        for y in 4..9 {
            for x in 4..9 {
                prob.set(x, y, 1.0);
            }
        }
        let pred = PredictionMaps::new(prob, ShiftField::zeros(10, 10)).unwrap();
        let out = decode(&pred, &DecodeConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].pixel_count, 25);
        let strict = DecodeConfig {
            min_instance_area: 26,
            ..DecodeConfig::default()
        };
        assert!(decode(&pred, &strict).unwrap().is_empty());
    }

    #[test]
    fn rectangular_instance_proposal() {
        let mut prob = ScalarMap::<f32>::zeros(20, 30);
        for y in 5..11 {
            for x in 3..23 {
                prob.set(x, y, 1.0);
            }
        }
        let pred = PredictionMaps::new(prob, ShiftField::zeros(20, 30)).unwrap();
        let inst = decode(&pred, &DecodeConfig::default()).unwrap();
        let props = to_proposals(&inst).unwrap();
        assert_eq!(props.len(), 1);
        let r = props[0].rect;
        assert!((r.area() - 120.0).abs() < 1e-4);
        assert!((r.center.x - 13.0).abs() < 1e-4 && (r.center.y - 8.0).abs() < 1e-4);
        assert!(to_proposals::<f32>(&[]).unwrap().is_empty());
    }

    #[test]
    fn invalid_threshold() {
        let pred = PredictionMaps::new(ScalarMap::<f32>::zeros(2, 2), ShiftField::zeros(2, 2)).unwrap();
        let cfg = DecodeConfig {
            binarize_threshold: 1.0,
            ..DecodeConfig::default()
        };
        assert!(decode(&pred, &cfg).is_err());
    }
}
