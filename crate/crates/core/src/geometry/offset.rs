//! Inward polygon offsetting used to derive text kernels.
//!
//! The raw offset curve is built from every edge shifted inward, joined by
//! circular arcs at reflex vertices and by straight connectors at convex
//! ones. The curve is split at all self-intersections and only the pieces
//! lying at least `d` from the original boundary are kept; those pieces are
//! then chained back into closed loops. Arcs are approximated by polylines
//! circumscribing the true arc with a fixed angular step, so the result is
//! equivariant under uniform scaling.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::polygon::{Point, Polygon};
use crate::scalar::Scalar;

const ARC_STEP: f64 = PI / 16.0;
/// Below this cosine between neighbouring edge normals (about 172 degrees of
/// turn) a convex corner is joined without a mitre point.
const MITER_MIN_COS: f64 = -0.99;

/// Default kernel shrink ratio.
pub const DEFAULT_SHRINK_RATIO: f64 = 0.7;

/// Inset distance `A * (1 - r^2) / L` for shrink ratio `r`.
pub fn shrink_offset<T: Scalar>(poly: &Polygon<T>, ratio: T) -> T {
    let perimeter = poly.perimeter();
    if perimeter <= T::zero() {
        return T::zero();
    }
    poly.area() * (T::one() - ratio * ratio) / perimeter
}

/// Shrinks `poly` by the perimeter/area rule for `ratio`.
///
/// Returns `Ok(None)` when the inset annihilates the polygon. When the inset
/// fragments the polygon the largest piece is returned.
pub fn shrink_polygon<T: Scalar>(poly: &Polygon<T>, ratio: T) -> Result<Option<Polygon<T>>> {
    if !(ratio > T::zero() && ratio <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "shrink ratio must lie in (0, 1], got {ratio}"
        )));
    }
    if poly.area() <= T::zero() {
        if poly.crosses_itself() {
            return Err(Error::InvalidPolygon("polygon self-intersects".into()));
        }
        return Ok(None);
    }
    if !poly.is_simple() {
        return Err(Error::InvalidPolygon("polygon self-intersects".into()));
    }
    if ratio == T::one() {
        return Ok(Some(poly.clone()));
    }
    Ok(inset_polygon(poly, shrink_offset(poly, ratio)))
}

/// Erodes a simple, positively oriented polygon by distance `d >= 0`.
pub fn inset_polygon<T: Scalar>(poly: &Polygon<T>, d: T) -> Option<Polygon<T>> {
    if d <= T::zero() {
        return Some(poly.clone());
    }
    let (min, max) = poly.bounds();
    let extent = (max.x - min.x).max(max.y - min.y);
    let magnitude = [min.x, min.y, max.x, max.y].iter().fold(extent, |m, c| m.max(c.abs()));
    let tol = T::geometric_tolerance();
    let tol_len = magnitude * tol;

    let chain = raw_offset_chain(poly, d);
    let segments: Vec<(Point<T>, Point<T>)> = (0..chain.len())
        .map(|k| (chain[k], chain[(k + 1) % chain.len()]))
        .filter(|(a, b)| a != b)
        .collect();

    let pieces = split_at_intersections(&segments, tol_len);

    let dist_tol = d * tol + extent * T::epsilon() * T::lit(64.0);
    let valid: Vec<(Point<T>, Point<T>)> = pieces
        .into_iter()
        .filter(|(a, b)| {
            let mid = a.add(*b).scale(T::lit(0.5));
            poly.contains(mid) && poly.boundary_distance(mid) >= d - dist_tol
        })
        .collect();

    let mut best: Option<(T, Vec<Point<T>>)> = None;
    for ring in chain_loops(&valid, tol_len) {
        let ring = simplify_ring(ring, tol_len, tol);
        if ring.len() < 3 {
            continue;
        }
        let area = ring_signed_area(&ring);
        if area <= tol_len * tol_len {
            continue;
        }
        if best.as_ref().is_none_or(|(a, _)| area > *a) {
            best = Some((area, ring));
        }
    }
    best.map(|(_, ring)| Polygon::from_raw(ring))
}

fn unit_normal<T: Scalar>(a: Point<T>, b: Point<T>) -> (Point<T>, Point<T>) {
    let dir = b.sub(a);
    let len = dir.norm();
    let dir = dir.scale(T::one() / len);
    (dir, Point::new(-dir.y, dir.x))
}

fn raw_offset_chain<T: Scalar>(poly: &Polygon<T>, d: T) -> Vec<Point<T>> {
    let v = poly.vertices();
    let n = v.len();
    let frames: Vec<_> = (0..n).map(|i| unit_normal(v[i], v[(i + 1) % n])).collect();
    let mut pts: Vec<Point<T>> = Vec::with_capacity(4 * n);
    let push = |pts: &mut Vec<Point<T>>, p: Point<T>| {
        if pts.last() != Some(&p) {
            pts.push(p);
        }
    };
    // `pts` lists the joins at each vertex; consecutive joins span an offset edge
    for i in 0..n {
        let (dir, normal) = frames[i];
        let (next_dir, next_normal) = frames[(i + 1) % n];
        let b = v[(i + 1) % n];
        let turn = dir.cross(next_dir);
        let cos = normal.dot(next_normal);
        if turn >= T::zero() && cos > T::lit(MITER_MIN_COS) {
            // convex or straight: eroding a convex corner leaves an exact mitre
            let k = d / (T::one() + cos);
            push(&mut pts, b.add(normal.add(next_normal).scale(k)));
        } else if turn >= T::zero() {
            // near-reversing spike: the mitre is ill-conditioned, so join the
            // two offset edges directly and let the trimming remove the overlap
            push(&mut pts, b.add(normal.scale(d)));
            push(&mut pts, b.add(next_normal.scale(d)));
        } else {
            // reflex vertex: the offset edges leave a gap filled by a polyline
            // circumscribing the arc of radius `d` around `b`. Its first and
            // last vertices lie on the two offset edge lines, so they double as
            // the joins with those edges.
            let sweep = normal.cross(next_normal).atan2(cos);
            let steps = (sweep.abs() / T::lit(ARC_STEP)).ceil().max(T::one());
            let step = sweep / steps;
            let radius = d / (step * T::lit(0.5)).cos();
            let start = normal.y.atan2(normal.x);
            let m = steps.to_usize().unwrap_or(1);
            for k in 0..m {
                let ang = start + step * (T::from_index(k) + T::lit(0.5));
                push(&mut pts, b.add(Point::new(ang.cos(), ang.sin()).scale(radius)));
            }
        }
    }
    while pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    pts
}

/// Splits every segment at its crossings with every other segment.
fn split_at_intersections<T: Scalar>(
    segments: &[(Point<T>, Point<T>)],
    tol_len: T,
) -> Vec<(Point<T>, Point<T>)> {
    let m = segments.len();
    let mut cuts: Vec<Vec<(T, Point<T>)>> = vec![Vec::new(); m];
    for i in 0..m {
        let (a, b) = segments[i];
        let r = b.sub(a);
        let r_len = r.norm();
        for j in i + 1..m {
            if j == i + 1 || (i == 0 && j == m - 1) {
                continue;
            }
            let (c, e) = segments[j];
            // cheap bounding-box rejection
            if a.x.max(b.x) + tol_len < c.x.min(e.x)
                || c.x.max(e.x) + tol_len < a.x.min(b.x)
                || a.y.max(b.y) + tol_len < c.y.min(e.y)
                || c.y.max(e.y) + tol_len < a.y.min(b.y)
            {
                continue;
            }
            let s = e.sub(c);
            let s_len = s.norm();
            let denom = r.cross(s);
            if denom.abs() <= T::epsilon() * r_len * s_len {
                continue;
            }
            let ac = c.sub(a);
            let t = ac.cross(s) / denom;
            let u = ac.cross(r) / denom;
            let et = tol_len / r_len;
            let eu = tol_len / s_len;
            if t < -et || t > T::one() + et || u < -eu || u > T::one() + eu {
                continue;
            }
            let t_end = t <= et || t >= T::one() - et;
            let u_end = u <= eu || u >= T::one() - eu;
            let p = if t <= et {
                a
            } else if t >= T::one() - et {
                b
            } else if u <= eu {
                c
            } else if u >= T::one() - eu {
                e
            } else {
                a.add(r.scale(t))
            };
            if !t_end {
                cuts[i].push((t, p));
            }
            if !u_end {
                cuts[j].push((u, p));
            }
        }
    }
    let mut pieces = Vec::with_capacity(m * 2);
    for (k, (a, b)) in segments.iter().enumerate() {
        let cs = &mut cuts[k];
        cs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut prev = *a;
        for &(_, p) in cs.iter() {
            if p != prev {
                pieces.push((prev, p));
                prev = p;
            }
        }
        if *b != prev {
            pieces.push((prev, *b));
        }
    }
    pieces
}

/// Links directed pieces end-to-start into closed rings.
fn chain_loops<T: Scalar>(pieces: &[(Point<T>, Point<T>)], tol_len: T) -> Vec<Vec<Point<T>>> {
    let mut used = vec![false; pieces.len()];
    let mut rings = Vec::new();
    for s in 0..pieces.len() {
        if used[s] {
            continue;
        }
        used[s] = true;
        let origin = pieces[s].0;
        let mut ring = vec![origin];
        let mut end = pieces[s].1;
        let mut closed = false;
        for _ in 0..pieces.len() {
            if end.dist(origin) <= tol_len {
                closed = true;
                break;
            }
            let next = (0..pieces.len())
                .filter(|&k| !used[k])
                .map(|k| (k, pieces[k].0.dist(end)))
                .filter(|&(_, dd)| dd <= tol_len)
                .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap().then(x.0.cmp(&y.0)));
            match next {
                Some((k, _)) => {
                    used[k] = true;
                    ring.push(pieces[k].0);
                    end = pieces[k].1;
                }
                None => break,
            }
        }
        if closed {
            rings.push(ring);
        }
    }
    rings
}

fn simplify_ring<T: Scalar>(ring: Vec<Point<T>>, tol_len: T, tol: T) -> Vec<Point<T>> {
    let mut pts: Vec<Point<T>> = Vec::with_capacity(ring.len());
    for p in ring {
        if pts.last().is_none_or(|q| q.dist(p) > tol_len) {
            pts.push(p);
        }
    }
    while pts.len() > 1 && pts[0].dist(*pts.last().unwrap()) <= tol_len {
        pts.pop();
    }
    // drop vertices where the boundary continues straight on
    let mut changed = true;
    while changed && pts.len() >= 3 {
        changed = false;
        let n = pts.len();
        for i in 0..n {
            let prev = pts[(i + n - 1) % n];
            let cur = pts[i];
            let next = pts[(i + 1) % n];
            let u = cur.sub(prev);
            let w = next.sub(cur);
            if u.cross(w).abs() <= tol * u.norm() * w.norm() && u.dot(w) > T::zero() {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    pts
}

fn ring_signed_area<T: Scalar>(ring: &[Point<T>]) -> T {
    let n = ring.len();
    let twice: T = (0..n).map(|i| ring[i].cross(ring[(i + 1) % n])).sum();
    twice * T::lit(0.5)
}
