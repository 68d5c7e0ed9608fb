use crate::error::{Error, Result};
use crate::geometry::polygon::Point;
use crate::scalar::Scalar;

/// Oriented rectangle. `angle` is in degrees, normalized to `[-90, 0)`, and
/// gives the direction of the `width` side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatedRect<T = f64> {
    pub center: Point<T>,
    pub width: T,
    pub height: T,
    pub angle: T,
}

impl<T: Scalar> RotatedRect<T> {
    pub fn area(&self) -> T {
        self.width * self.height
    }

    /// Corners in boundary order.
    pub fn corners(&self) -> [Point<T>; 4] {
        let rad = self.angle.to_radians();
        let u = Point::new(rad.cos(), rad.sin());
        let v = Point::new(-u.y, u.x);
        let hw = self.width * T::lit(0.5);
        let hh = self.height * T::lit(0.5);
        let c = self.center;
        [
            c.sub(u.scale(hw)).sub(v.scale(hh)),
            c.add(u.scale(hw)).sub(v.scale(hh)),
            c.add(u.scale(hw)).add(v.scale(hh)),
            c.sub(u.scale(hw)).add(v.scale(hh)),
        ]
    }
}

/// Convex hull by monotone chain, positively oriented, collinear points dropped.
pub fn convex_hull<T: Scalar>(points: &[Point<T>]) -> Vec<Point<T>> {
    let mut pts: Vec<Point<T>> = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point<T>, a: Point<T>, b: Point<T>| a.sub(o).cross(b.sub(o));
    let mut hull: Vec<Point<T>> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero()
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn normalize_angle<T: Scalar>(angle: T, width: T, height: T) -> (T, T, T) {
    let full = T::lit(180.0);
    let quarter = T::lit(90.0);
    let mut a = angle % full;
    if a >= quarter {
        a = a - full;
    }
    if a < -quarter {
        a = a + full;
    }
    if a >= T::zero() {
        (a - quarter, height, width)
    } else {
        (a, width, height)
    }
}

fn rect_from_frame<T: Scalar>(u: Point<T>, umin: T, umax: T, vmin: T, vmax: T) -> RotatedRect<T> {
    let v = Point::new(-u.y, u.x);
    let half = T::lit(0.5);
    let center = u.scale((umin + umax) * half).add(v.scale((vmin + vmax) * half));
    let (angle, width, height) =
        normalize_angle(u.y.atan2(u.x).to_degrees(), umax - umin, vmax - vmin);
    RotatedRect {
        center,
        width,
        height,
        angle,
    }
}

/// Minimum-area enclosing rectangle by rotating calipers over the convex hull.
///
/// Collinear input yields a zero-height rectangle spanning the points.
pub fn min_area_rect<T: Scalar>(points: &[Point<T>]) -> Result<RotatedRect<T>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("min_area_rect needs at least one point".into()));
    }
    let hull = convex_hull(points);
    match hull.len() {
        1 => {
            return Ok(RotatedRect {
                center: hull[0],
                width: T::zero(),
                height: T::zero(),
                angle: T::lit(-90.0),
            })
        }
        2 => {
            let d = hull[1].sub(hull[0]);
            let u = d.scale(T::one() / d.norm());
            let a = hull[0].dot(u);
            let b = hull[1].dot(u);
            let off = hull[0].cross(u);
            // v = (-u.y, u.x); v . p = -p.x*u.y + p.y*u.x = u x p
            let vp = -off;
            return Ok(rect_from_frame(u, a.min(b), a.max(b), vp, vp));
        }
        _ => {}
    }
    let m = hull.len();
    let next = |i: usize| (i + 1) % m;
    let mut best: Option<(T, RotatedRect<T>)> = None;
    let (mut right, mut top, mut left) = (0usize, 0usize, 0usize);
    for i in 0..m {
        let d = hull[next(i)].sub(hull[i]);
        let u = d.scale(T::one() / d.norm());
        let v = Point::new(-u.y, u.x);
        if i == 0 {
            for k in 0..m {
                if hull[k].dot(u) > hull[right].dot(u) {
                    right = k;
                }
                if hull[k].dot(v) > hull[top].dot(v) {
                    top = k;
                }
                if hull[k].dot(u) < hull[left].dot(u) {
                    left = k;
                }
            }
        } else {
            for _ in 0..m {
                if hull[next(right)].dot(u) >= hull[right].dot(u) {
                    right = next(right);
                } else {
                    break;
                }
            }
            for _ in 0..m {
                if hull[next(top)].dot(v) >= hull[top].dot(v) {
                    top = next(top);
                } else {
                    break;
                }
            }
            for _ in 0..m {
                if hull[next(left)].dot(u) <= hull[left].dot(u) {
                    left = next(left);
                } else {
                    break;
                }
            }
        }
        let umin = hull[left].dot(u);
        let umax = hull[right].dot(u);
        let vmin = hull[i].dot(v);
        let vmax = hull[top].dot(v);
        let area = (umax - umin) * (vmax - vmin);
        if best.as_ref().is_none_or(|(a, _)| area < *a) {
            best = Some((area, rect_from_frame(u, umin, umax, vmin, vmax)));
        }
    }
    Ok(best.expect("hull has edges").1)
}
