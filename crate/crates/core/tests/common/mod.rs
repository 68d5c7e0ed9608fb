//! Independent reference implementations used as test oracles.
//!
//! Everything here is deliberately naive and shares no code with the crate
//! beyond the plain data types.

#![allow(dead_code)]

use centripetal::geometry::{BitMask, LabeledGrid, Point, Polygon};
use centripetal::{Connectivity, LabelBundle, Scalar};
use rand::Rng;

const N4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const N8: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

fn offsets(conn: Connectivity) -> &'static [(i64, i64)] {
    match conn {
        Connectivity::Four => &N4,
        Connectivity::Eight => &N8,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Component labels via union-find, numbered by first appearance in raster order.
pub fn union_find_labels(mask: &BitMask, conn: Connectivity) -> Vec<u32> {
    let (h, w) = mask.dims();
    let mut uf = UnionFind::new(h * w);
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            for &(dx, dy) in offsets(conn) {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h && mask.get(nx as usize, ny as usize) {
                    uf.union(y * w + x, ny as usize * w + nx as usize);
                }
            }
        }
    }
    let mut label_of_root = vec![0u32; h * w];
    let mut next = 0;
    let mut out = vec![0u32; h * w];
    for i in 0..h * w {
        if !mask.bits()[i] {
            continue;
        }
        let r = uf.find(i);
        if label_of_root[r] == 0 {
            next += 1;
            label_of_root[r] = next;
        }
        out[i] = label_of_root[r];
    }
    out
}

/// Erosion straight from the definition: a pixel survives iff its whole 3x3
/// neighbourhood is set and inside the grid.
pub fn erode_brute(mask: &BitMask) -> BitMask {
    let (h, w) = mask.dims();
    let mut out = BitMask::new(h, w);
    for y in 0..h {
        for x in 0..w {
            let all = (-1i64..=1).all(|dy| (-1i64..=1).all(|dx| mask.get_signed(x as i64 + dx, y as i64 + dy)));
            out.set(x, y, all);
        }
    }
    out
}

/// `mask` plus every background region that cannot reach the grid border
/// through the dual connectivity.
pub fn fill_holes(mask: &BitMask, conn: Connectivity) -> BitMask {
    let dual = match conn {
        Connectivity::Four => Connectivity::Eight,
        Connectivity::Eight => Connectivity::Four,
    };
    let (h, w) = mask.dims();
    let mut outside = vec![false; h * w];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if (x == 0 || y == 0 || x == w - 1 || y == h - 1) && !mask.get(x, y) {
                outside[y * w + x] = true;
                stack.push((x, y));
            }
        }
    }
    while let Some((x, y)) = stack.pop() {
        for &(dx, dy) in offsets(dual) {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !mask.get(nx, ny) && !outside[ny * w + nx] {
                outside[ny * w + nx] = true;
                stack.push((nx, ny));
            }
        }
    }
    BitMask::from_bits(h, w, outside.iter().map(|&o| !o).collect()).unwrap()
}

/// Pixel-center containment for every cell, independent of scan conversion.
pub fn rasterize_brute(poly: &Polygon<f64>, h: usize, w: usize) -> BitMask {
    let vs = poly.vertices();
    let mut out = BitMask::new(h, w);
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let mut inside = false;
            for i in 0..vs.len() {
                let (a, b) = (vs[i], vs[(i + 1) % vs.len()]);
                if (a.y > py) != (b.y > py) {
                    // px < crossing, decided by a cross-product sign (no division)
                    let lhs = (px - a.x) * (b.y - a.y);
                    let rhs = (py - a.y) * (b.x - a.x);
                    let left = if b.y > a.y { lhs < rhs } else { lhs > rhs };
                    if left {
                        inside = !inside;
                    }
                }
            }
            out.set(x, y, inside);
        }
    }
    out
}

/// Smallest enclosing-rectangle area over every direction defined by a pair
/// of input points. Hull edges are among those pairs, so this is exact.
pub fn min_rect_area_brute(pts: &[Point<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let d = pts[j].sub(pts[i]);
            let len = d.norm();
            if len == 0.0 {
                continue;
            }
            let (ux, uy) = (d.x / len, d.y / len);
            let (mut a0, mut a1, mut b0, mut b1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for p in pts {
                let a = p.x * ux + p.y * uy;
                let b = -p.x * uy + p.y * ux;
                a0 = a0.min(a);
                a1 = a1.max(a);
                b0 = b0.min(b);
                b1 = b1.max(b);
            }
            best = best.min((a1 - a0) * (b1 - b0));
        }
    }
    if best.is_infinite() {
        0.0
    } else {
        best
    }
}

/// Hardest-negative selection by a full sort.
pub fn ohem_by_sort(prob: &[f64], gt: &BitMask, tm: &BitMask, ratio: f64) -> BitMask {
    let pos = gt.bits().iter().zip(tm.bits()).filter(|(&g, &m)| g && m).count();
    if pos == 0 {
        return tm.clone();
    }
    let mut neg: Vec<usize> = (0..prob.len()).filter(|&i| !gt.bits()[i] && tm.bits()[i]).collect();
    neg.sort_by(|&a, &b| prob[b].partial_cmp(&prob[a]).unwrap().then(a.cmp(&b)));
    let k = ((ratio * pos as f64).floor() as usize).min(neg.len());
    let mut out = gt.and(tm);
    for &i in &neg[..k] {
        out.bits_mut()[i] = true;
    }
    out
}

/// Reference pixel of instance `label` closest to `(x, y)`; ties go to the
/// first candidate in raster order.
pub fn nearest_reference_brute<T: Scalar>(bundle: &LabelBundle<T>, label: u32, x: usize, y: usize) -> Option<(usize, usize, i64)> {
    let mut best: Option<(usize, usize, i64)> = None;
    for (rx, ry) in bundle.reference_mask.iter_set_raster() {
        if bundle.kernel_id.get(rx, ry) != label {
            continue;
        }
        let d2 = (rx as i64 - x as i64).pow(2) + (ry as i64 - y as i64).pow(2);
        if best.is_none_or(|b| d2 < b.2) {
            best = Some((rx, ry, d2));
        }
    }
    best
}

/// Raster-order iteration over set pixels that does not rely on the crate's
/// own iterator order.
pub trait RasterIter {
    fn iter_set_raster(&self) -> Vec<(usize, usize)>;
}

impl RasterIter for BitMask {
    fn iter_set_raster(&self) -> Vec<(usize, usize)> {
        let (h, w) = self.dims();
        let mut v = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if self.get(x, y) {
                    v.push((x, y));
                }
            }
        }
        v
    }
}

/// Star-shaped polygon around `(cx, cy)`. One vertex per angular sector with
/// the angle jittered inside the middle of the sector, so consecutive angles
/// differ by less than pi and the polygon is simple.
pub fn random_star<R: Rng + ?Sized>(rng: &mut R, cx: f64, cy: f64, r_min: f64, r_max: f64, n: usize) -> Polygon<f64> {
    let sector = std::f64::consts::TAU / n as f64;
    let pts: Vec<Point<f64>> = (0..n)
        .map(|i| {
            let t = (i as f64 + rng.random_range(0.3..0.7)) * sector;
            let r = rng.random_range(r_min..r_max);
            Point::new(cx + r * t.cos(), cy + r * t.sin())
        })
        .collect();
    Polygon::new(pts).unwrap()
}

pub fn random_mask<R: Rng + ?Sized>(rng: &mut R, h: usize, w: usize, density: f64) -> BitMask {
    BitMask::from_bits(h, w, (0..h * w).map(|_| rng.random_bool(density)).collect()).unwrap()
}

/// Labels of `grid` renumbered by first appearance in raster order.
pub fn canonical(grid: &LabeledGrid) -> Vec<u32> {
    let mut map = std::collections::HashMap::new();
    grid.labels()
        .iter()
        .map(|&l| {
            if l == 0 {
                0
            } else {
                let next = map.len() as u32 + 1;
                *map.entry(l).or_insert(next)
            }
        })
        .collect()
}
