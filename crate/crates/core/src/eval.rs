//! Detection scoring: raster IoU and greedy one-to-one matching.

use serde::{Deserialize, Serialize};

use crate::encoder::TextAnnotation;
use crate::error::{Error, Result};
use crate::geometry::{rasterize, rasterize_into, BitMask, Polygon};
use crate::scalar::Scalar;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub det_id: usize,
    pub gt_id: usize,
    pub iou: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub fmeasure: f64,
    pub matches: Vec<Match>,
    /// Detections dropped for overlapping a DO NOT CARE ground truth.
    pub num_ignored_dets: usize,
    pub num_valid_dets: usize,
    pub num_gts: usize,
}

/// Harmonic mean, `0` when both inputs are `0`.
pub fn fmeasure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// IoU of the cell sets covered by `a` and `b` on an `height x width` grid.
pub fn polygon_iou<T: Scalar>(a: &Polygon<T>, b: &Polygon<T>, height: usize, width: usize) -> f64 {
    let ma = rasterize(a, height, width);
    let mb = rasterize(b, height, width);
    let inter = ma.intersection_count(&mb);
    let union = ma.count() + mb.count() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Cells of a polygon on the unbounded pixel grid, stored as a crop.
#[derive(Clone, Debug)]
pub struct RasterShape {
    x0: i64,
    y0: i64,
    mask: Option<BitMask>,
    count: usize,
}

impl RasterShape {
    pub fn new<T: Scalar>(poly: &Polygon<T>) -> Self {
        let (min, max) = poly.bounds();
        let x0 = min.x.floor().to_i64().unwrap_or(0);
        let y0 = min.y.floor().to_i64().unwrap_or(0);
        let x1 = max.x.ceil().to_i64().unwrap_or(0);
        let y1 = max.y.ceil().to_i64().unwrap_or(0);
        if x1 <= x0 || y1 <= y0 {
            return Self {
                x0,
                y0,
                mask: None,
                count: 0,
            };
        }
        let mut mask = BitMask::new((y1 - y0) as usize, (x1 - x0) as usize);
        rasterize_into(poly, &mut mask, x0, y0);
        let count = mask.count();
        Self {
            x0,
            y0,
            mask: Some(mask),
            count,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn intersection(&self, other: &Self) -> usize {
        let (Some(a), Some(b)) = (&self.mask, &other.mask) else {
            return 0;
        };
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = (self.x0 + a.width() as i64).min(other.x0 + b.width() as i64);
        let y1 = (self.y0 + a.height() as i64).min(other.y0 + b.height() as i64);
        let mut n = 0;
        for y in y0..y1 {
            for x in x0..x1 {
                if a.get((x - self.x0) as usize, (y - self.y0) as usize)
                    && b.get((x - other.x0) as usize, (y - other.y0) as usize)
                {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn iou(&self, other: &Self) -> f64 {
        let inter = self.intersection(other);
        let union = self.count + other.count - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// Raster IoU on the unbounded pixel grid; equals [`polygon_iou`] whenever
/// both polygons lie inside the image.
pub fn polygon_iou_unbounded<T: Scalar>(a: &Polygon<T>, b: &Polygon<T>) -> f64 {
    RasterShape::new(a).iou(&RasterShape::new(b))
}

/// Scores detections against ground truth.
///
/// Detections overlapping an ignored ground truth with IoU above `iou_thr`
/// are discarded. The rest are matched greedily by descending IoU, one to
/// one, accepting pairs with IoU at least `iou_thr`. Precision is `0` when no
/// detection survives and recall is `0` when there is no non-ignored ground
/// truth.
pub fn match_and_score<T: Scalar>(
    dets: &[TextAnnotation<T>],
    gts: &[TextAnnotation<T>],
    iou_thr: f64,
) -> Result<EvalReport> {
    if !(iou_thr > 0.0 && iou_thr < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "IoU threshold must lie in (0, 1), got {iou_thr}"
        )));
    }
    let det_shapes: Vec<RasterShape> = dets.iter().map(|d| RasterShape::new(&d.polygon)).collect();
    let gt_shapes: Vec<RasterShape> = gts.iter().map(|g| RasterShape::new(&g.polygon)).collect();

    let ignored_dets: Vec<bool> = det_shapes
        .iter()
        .map(|d| {
            gts.iter()
                .zip(&gt_shapes)
                .any(|(g, gs)| g.ignore && d.iou(gs) > iou_thr)
        })
        .collect();

    let mut pairs: Vec<Match> = Vec::new();
    for (di, ds) in det_shapes.iter().enumerate() {
        if ignored_dets[di] {
            continue;
        }
        for (gi, (g, gs)) in gts.iter().zip(&gt_shapes).enumerate() {
            if g.ignore {
                continue;
            }
            let iou = ds.iou(gs);
            if iou >= iou_thr {
                pairs.push(Match {
                    det_id: di,
                    gt_id: gi,
                    iou,
                });
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.iou
            .partial_cmp(&a.iou)
            .unwrap()
            .then(a.det_id.cmp(&b.det_id))
            .then(a.gt_id.cmp(&b.gt_id))
    });
    let mut det_used = vec![false; dets.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut matches = Vec::new();
    for m in pairs {
        if det_used[m.det_id] || gt_used[m.gt_id] {
            continue;
        }
        det_used[m.det_id] = true;
        gt_used[m.gt_id] = true;
        matches.push(m);
    }

    let num_ignored_dets = ignored_dets.iter().filter(|&&b| b).count();
    let num_valid_dets = dets.len() - num_ignored_dets;
    let num_gts = gts.iter().filter(|g| !g.ignore).count();
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let precision = ratio(matches.len(), num_valid_dets);
    let recall = ratio(matches.len(), num_gts);
    Ok(EvalReport {
        precision,
        recall,
        fmeasure: fmeasure(precision, recall),
        matches,
        num_ignored_dets,
        num_valid_dets,
        num_gts,
    })
}
