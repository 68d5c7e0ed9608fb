use crate::error::{Error, Result};
use crate::geometry::raster::edge_crossing_x;
use crate::scalar::Scalar;

/// A point in pixel coordinates (`x` to the right, `y` down).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point<T = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }

    #[inline]
    pub fn scale(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        self.sub(o).norm()
    }

    pub fn cast<U: Scalar>(self) -> Point<U> {
        Point::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }
}

/// Closed polygon, stored with positive shoelace area.
///
/// Construction only checks that there are at least three distinct
/// consecutive vertices with finite coordinates; simplicity is checked by
/// [`Polygon::is_simple`] where an operation requires it.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon<T = f64> {
    vertices: Vec<Point<T>>,
}

impl<T: Scalar> Polygon<T> {
    pub fn new(vertices: Vec<Point<T>>) -> Result<Self> {
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite coordinate".into()));
        }
        let mut vs: Vec<Point<T>> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if vs.last() != Some(&p) {
                vs.push(p);
            }
        }
        while vs.len() > 1 && vs.first() == vs.last() {
            vs.pop();
        }
        if vs.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 distinct vertices, got {}",
                vs.len()
            )));
        }
        let mut poly = Self { vertices: vs };
        if poly.signed_area() < T::zero() {
            poly.vertices.reverse();
        }
        Ok(poly)
    }

    pub fn from_xy(coords: &[(T, T)]) -> Result<Self> {
        Self::new(coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    /// Axis-aligned rectangle with corners `(x0, y0)` and `(x1, y1)`.
    pub fn rect(x0: T, y0: T, x1: T, y1: T) -> Result<Self> {
        Self::from_xy(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    }

    #[inline]
    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point<T>, Point<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area; positive after construction unless degenerate.
    pub fn signed_area(&self) -> T {
        let twice: T = self.edges().map(|(a, b)| a.cross(b)).sum();
        twice * T::lit(0.5)
    }

    pub fn area(&self) -> T {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> T {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    /// Component-wise `(min, max)` corners.
    pub fn bounds(&self) -> (Point<T>, Point<T>) {
        let mut min = self.vertices[0];
        let mut max = self.vertices[0];
        for p in &self.vertices[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        (min, max)
    }

    /// Even-odd containment, using the same crossing rule as scan conversion.
    pub fn contains(&self, p: Point<T>) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) && p.x < edge_crossing_x(a.x, a.y, b.x, b.y, p.y) {
                inside = !inside;
            }
        }
        inside
    }

    /// Euclidean distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point<T>) -> T {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(T::infinity(), T::min)
    }

    /// True when no two edges meet except consecutive edges at their shared vertex.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if self.area() <= T::zero() {
            return false;
        }
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if adjacent {
                    // consecutive edges may only share the joint vertex
                    if collinear_overlap(a, b, c, d) {
                        return false;
                    }
                    continue;
                }
                if segments_touch(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// True when two non-adjacent edges cross at an interior point of both.
    /// Unlike [`Polygon::is_simple`] this ignores mere touching and zero area.
    pub fn crosses_itself(&self) -> bool {
        let n = self.vertices.len();
        let edges: Vec<_> = self.edges().collect();
        let z = T::zero();
        let opposite = |u: T, v: T| (u > z && v < z) || (u < z && v > z);
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if opposite(orient(a, b, c), orient(a, b, d)) && opposite(orient(c, d, a), orient(c, d, b)) {
                    return true;
                }
            }
        }
        false
    }

    /// Uniform scaling about the origin. A negative factor is a half-turn
    /// plus scaling, so orientation is kept either way.
    pub fn scaled(&self, k: T) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| p.scale(k)).collect(),
        }
    }

    pub fn translated(&self, dx: T, dy: T) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Polygon<U> {
        Polygon {
            vertices: self.vertices.iter().map(|p| p.cast()).collect(),
        }
    }

    pub(crate) fn from_raw(vertices: Vec<Point<T>>) -> Self {
        Self { vertices }
    }
}

pub(crate) fn point_segment_distance<T: Scalar>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 <= T::zero() {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).max(T::zero()).min(T::one());
    p.dist(a.add(ab.scale(t)))
}

fn orient<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    b.sub(a).cross(c.sub(a))
}

fn on_segment<T: Scalar>(a: Point<T>, b: Point<T>, p: Point<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub(crate) fn segments_touch<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>, d: Point<T>) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    let z = T::zero();
    if ((o1 > z && o2 < z) || (o1 < z && o2 > z)) && ((o3 > z && o4 < z) || (o3 < z && o4 > z)) {
        return true;
    }
    (o1 == z && on_segment(a, b, c))
        || (o2 == z && on_segment(a, b, d))
        || (o3 == z && on_segment(c, d, a))
        || (o4 == z && on_segment(c, d, b))
}

/// Consecutive edges `a -> b`, `c -> d` with `b == c` that fold back onto each other.
fn collinear_overlap<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>, d: Point<T>) -> bool {
    let (joint, p, q) = if b == c {
        (b, a, d)
    } else if d == a {
        (a, c, b)
    } else {
        return segments_touch(a, b, c, d);
    };
    orient(joint, p, q) == T::zero() && p.sub(joint).dot(q.sub(joint)) > T::zero()
}
