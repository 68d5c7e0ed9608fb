//! Supervision maps for the kernel probability and centripetal shift branches.
//!
//! Each annotated polygon `T_i` is rasterized and shrunk into a kernel `K_i`.
//! Pixels of `T_i - K_i` carry a shift vector pointing at the nearest pixel of
//! the kernel reference ring (the first erosion of `K_i` minus the second);
//! kernel and background pixels carry `(0, 0)`. The training mask blanks
//! `T_i - K_i` and every ignored instance.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::geometry::{erode, rasterize_into, shrink_polygon, BitMask, LabeledGrid, Polygon};
use crate::maps::ShiftField;
use crate::scalar::{round_to_index, Scalar};

/// One annotated text instance.
#[derive(Clone, Debug, PartialEq)]
pub struct TextAnnotation<T = f64> {
    pub polygon: Polygon<T>,
    /// DO NOT CARE region: excluded from supervision and evaluation penalties.
    pub ignore: bool,
    pub id: u32,
}

impl<T: Scalar> TextAnnotation<T> {
    pub fn new(polygon: Polygon<T>, id: u32) -> Self {
        Self {
            polygon,
            ignore: false,
            id,
        }
    }

    pub fn ignored(polygon: Polygon<T>, id: u32) -> Self {
        Self {
            polygon,
            ignore: true,
            id,
        }
    }
}

/// Per-instance bookkeeping; label `k` in the id grids refers to `instances[k - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub annotation_id: u32,
    pub ignore: bool,
    /// Pixels owned after overlap resolution.
    pub pixels: usize,
    pub kernel_pixels: usize,
}

impl InstanceInfo {
    /// Instance contributes shift and kernel supervision.
    pub fn is_supervised(&self) -> bool {
        !self.ignore && self.kernel_pixels > 0
    }
}

/// Rasterized supervision for one image.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelBundle<T = f32> {
    pub height: usize,
    pub width: usize,
    /// Union of all kernels.
    pub kernel_map: BitMask,
    pub training_mask: BitMask,
    pub shift_field: ShiftField<T>,
    /// Pixel owner; on overlap the smaller instance wins.
    pub instance_id: LabeledGrid,
    /// Kernel owner, using the same labels as `instance_id`.
    pub kernel_id: LabeledGrid,
    /// Union of the kernel reference rings.
    pub reference_mask: BitMask,
    /// Pixels of ignored or kernel-less instances; no shift supervision there.
    pub ignore_mask: BitMask,
    pub instances: Vec<InstanceInfo>,
}

impl<T: Scalar> LabelBundle<T> {
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn cast<U: Scalar>(&self) -> LabelBundle<U> {
        LabelBundle {
            height: self.height,
            width: self.width,
            kernel_map: self.kernel_map.clone(),
            training_mask: self.training_mask.clone(),
            shift_field: self.shift_field.cast(),
            instance_id: self.instance_id.clone(),
            kernel_id: self.kernel_id.clone(),
            reference_mask: self.reference_mask.clone(),
            ignore_mask: self.ignore_mask.clone(),
            instances: self.instances.clone(),
        }
    }

    /// Pixels owned by instance label `label` (1-based).
    pub fn instance_mask(&self, label: u32) -> BitMask {
        self.instance_id.mask_of(label)
    }

    /// Labels of instances with kernel and shift supervision.
    pub fn supervised_labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.instances
            .iter()
            .enumerate()
            .filter(|(_, info)| info.is_supervised())
            .map(|(i, _)| i as u32 + 1)
    }
}

/// Binary relaxation mask: set where the predicted shift sends a pixel to the wrong region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegressionMask {
    pub mask: BitMask,
}

impl RegressionMask {
    pub fn dims(&self) -> (usize, usize) {
        self.mask.dims()
    }

    pub fn count(&self) -> usize {
        self.mask.count()
    }
}

struct Region {
    x0: usize,
    y0: usize,
    mask: BitMask,
}

/// Rasterizes `poly` into a crop covering its clamped bounding box.
fn rasterize_region<T: Scalar>(poly: &Polygon<T>, height: usize, width: usize) -> Option<Region> {
    let (min, max) = poly.bounds();
    let x0 = min.x.floor().to_i64()?.max(0);
    let y0 = min.y.floor().to_i64()?.max(0);
    let x1 = max.x.ceil().to_i64()?.min(width as i64);
    let y1 = max.y.ceil().to_i64()?.min(height as i64);
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    let mut mask = BitMask::new((y1 - y0) as usize, (x1 - x0) as usize);
    rasterize_into(poly, &mut mask, x0, y0);
    Some(Region {
        x0: x0 as usize,
        y0: y0 as usize,
        mask,
    })
}

/// Builds all supervision maps for `annotations` on an `height x width` grid.
pub fn generate_labels<T: Scalar>(
    annotations: &[TextAnnotation<T>],
    height: usize,
    width: usize,
    shrink_ratio: T,
) -> Result<LabelBundle<T>> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
    }
    let mut seen = HashSet::new();
    for ann in annotations {
        if !seen.insert(ann.id) {
            return Err(Error::InvalidArgument(format!("duplicate annotation id {}", ann.id)));
        }
        if !ann.polygon.is_simple() {
            return Err(Error::InvalidPolygon(format!(
                "annotation {} is degenerate or self-intersecting",
                ann.id
            )));
        }
    }

    let n = annotations.len();
    let regions: Vec<Option<Region>> = annotations
        .iter()
        .map(|a| rasterize_region(&a.polygon, height, width))
        .collect();

    // paint larger instances first so smaller ones overwrite shared pixels
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        annotations[b]
            .polygon
            .area()
            .partial_cmp(&annotations[a].polygon.area())
            .unwrap()
    });
    let mut instance_id = LabeledGrid::new(height, width);
    for &i in &order {
        if let Some(r) = &regions[i] {
            for (x, y) in r.mask.iter_set() {
                instance_id.set(r.x0 + x, r.y0 + y, i as u32 + 1);
            }
        }
    }

    let mut kernel_map = BitMask::new(height, width);
    let mut kernel_id = LabeledGrid::new(height, width);
    let mut reference_mask = BitMask::new(height, width);
    let mut training_mask = BitMask::filled(height, width, true);
    let mut ignore_mask = BitMask::new(height, width);
    let mut shift_field = ShiftField::zeros(height, width);
    let mut instances = Vec::with_capacity(n);

    for (i, ann) in annotations.iter().enumerate() {
        let label = i as u32 + 1;
        let mut info = InstanceInfo {
            annotation_id: ann.id,
            ignore: ann.ignore,
            pixels: 0,
            kernel_pixels: 0,
        };
        let Some(region) = &regions[i] else {
            instances.push(info);
            continue;
        };
        let (rh, rw) = region.mask.dims();
        // owned pixels, in crop coordinates
        let mut owned = BitMask::new(rh, rw);
        for y in 0..rh {
            for x in 0..rw {
                if instance_id.get(region.x0 + x, region.y0 + y) == label {
                    owned.set(x, y, true);
                }
            }
        }
        info.pixels = owned.count();

        if ann.ignore {
            for (x, y) in region.mask.iter_set() {
                training_mask.set(region.x0 + x, region.y0 + y, false);
                ignore_mask.set(region.x0 + x, region.y0 + y, true);
            }
            instances.push(info);
            continue;
        }

        let mut kernel = BitMask::new(rh, rw);
        if let Some(shrunk) = shrink_polygon(&ann.polygon, shrink_ratio)? {
            rasterize_into(&shrunk, &mut kernel, region.x0 as i64, region.y0 as i64);
            kernel = kernel.and(&owned);
        }
        info.kernel_pixels = kernel.count();

        if info.kernel_pixels == 0 {
            for (x, y) in owned.iter_set() {
                training_mask.set(region.x0 + x, region.y0 + y, false);
                ignore_mask.set(region.x0 + x, region.y0 + y, true);
            }
            instances.push(info);
            continue;
        }

        let once = erode(&kernel);
        let reference = if once.is_empty() {
            kernel.clone()
        } else {
            once.and_not(&erode(&once))
        };
        let index = ReferenceIndex::new(&reference);

        for (x, y) in kernel.iter_set() {
            kernel_map.set(region.x0 + x, region.y0 + y, true);
            kernel_id.set(region.x0 + x, region.y0 + y, label);
        }
        for (x, y) in reference.iter_set() {
            reference_mask.set(region.x0 + x, region.y0 + y, true);
        }
        for (x, y) in owned.and_not(&kernel).iter_set() {
            training_mask.set(region.x0 + x, region.y0 + y, false);
            let (rx, ry) = index.nearest(x, y).expect("reference ring is non-empty");
            let dx = rx as i64 - x as i64;
            let dy = ry as i64 - y as i64;
            shift_field.set(
                region.x0 + x,
                region.y0 + y,
                (T::lit(dx as f64), T::lit(dy as f64)),
            );
        }
        instances.push(info);
    }

    Ok(LabelBundle {
        height,
        width,
        kernel_map,
        training_mask,
        shift_field,
        instance_id,
        kernel_id,
        reference_mask,
        ignore_mask,
        instances,
    })
}

/// Row-bucketed reference pixels for exact nearest-neighbour queries.
pub(crate) struct ReferenceIndex {
    rows: Vec<Vec<usize>>,
}

impl ReferenceIndex {
    pub(crate) fn new(mask: &BitMask) -> Self {
        let mut rows = vec![Vec::new(); mask.height()];
        for (x, y) in mask.iter_set() {
            rows[y].push(x);
        }
        Self { rows }
    }

    /// Nearest set pixel by Euclidean distance; ties go to the earliest in raster order.
    pub(crate) fn nearest(&self, px: usize, py: usize) -> Option<(usize, usize)> {
        let mut best: Option<(u64, usize, usize)> = None;
        let h = self.rows.len();
        let consider = |row: usize, best: &mut Option<(u64, usize, usize)>| {
            let xs = &self.rows[row];
            if xs.is_empty() {
                return;
            }
            let pos = xs.partition_point(|&x| x < px);
            let dy = row.abs_diff(py) as u64;
            for &x in xs[pos.saturating_sub(1)..(pos + 1).min(xs.len())].iter() {
                let dx = x.abs_diff(px) as u64;
                let key = (dx * dx + dy * dy, row, x);
                if best.is_none_or(|b| key < b) {
                    *best = Some(key);
                }
            }
        };
        for k in 0..h.max(py + 1) {
            if let Some((d2, _, _)) = best {
                if (k as u64) * (k as u64) > d2 {
                    break;
                }
            }
            if k <= py && py - k < h {
                consider(py - k, &mut best);
            }
            if k > 0 && py + k < h {
                consider(py + k, &mut best);
            }
            if k > py && py + k >= h {
                break;
            }
        }
        best.map(|(_, y, x)| (x, y))
    }
}

/// Relaxation mask for a predicted shift field.
///
/// A foreground pixel is correct when `round(p + s)` lands on its own
/// kernel; a background pixel is correct when it lands outside every kernel
/// (out-of-grid targets count as background). Pixels of ignored or
/// kernel-less instances are never penalized.
pub fn compute_regression_mask<T: Scalar>(
    pred_shift: &ShiftField<T>,
    bundle: &LabelBundle<T>,
) -> Result<RegressionMask> {
    check_dims(bundle.dims(), pred_shift.dims())?;
    let (h, w) = bundle.dims();
    let mut mask = BitMask::new(h, w);
    for y in 0..h {
        for x in 0..w {
            if bundle.ignore_mask.get(x, y) {
                continue;
            }
            let (dx, dy) = pred_shift.get(x, y);
            let tx = round_to_index(T::from_index(x) + dx);
            let ty = round_to_index(T::from_index(y) + dy);
            let target_kernel = match (tx, ty) {
                (Some(tx), Some(ty)) => bundle.kernel_id.get_signed(tx, ty),
                _ => 0,
            };
            let owner = bundle.instance_id.get(x, y);
            let correct = if owner != 0 {
                target_kernel == owner
            } else {
                target_kernel == 0
            };
            if !correct {
                mask.set(x, y, true);
            }
        }
    }
    Ok(RegressionMask { mask })
}
