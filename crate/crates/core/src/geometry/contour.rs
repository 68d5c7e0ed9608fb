use crate::error::{Error, Result};
use crate::geometry::components::Connectivity;
use crate::geometry::polygon::{Point, Polygon};
use crate::geometry::raster::{BitMask, LabeledGrid};
use crate::scalar::Scalar;

/// Outer boundary of component `id`, traced along pixel edges.
///
/// Vertices sit on integer pixel corners and only turning points are
/// emitted, so collinear runs collapse. With [`Connectivity::Eight`] the
/// boundary passes through diagonal pinch points; holes are not traced.
pub fn extract_contour<T: Scalar>(
    labels: &LabeledGrid,
    id: u32,
    connectivity: Connectivity,
) -> Result<Polygon<T>> {
    let w = labels.width();
    let first = labels
        .labels()
        .iter()
        .position(|&l| l == id && id != 0)
        .ok_or(Error::EmptyComponent(id))?;
    let inside = |x: i64, y: i64| labels.get_signed(x, y) == id;
    let start = ((first % w) as i64, (first / w) as i64);
    trace(inside, start, connectivity)
}

/// Outer boundary of the component of `mask` containing its first set pixel
/// in raster order.
pub fn contour_of_mask<T: Scalar>(mask: &BitMask, connectivity: Connectivity) -> Result<Polygon<T>> {
    let w = mask.width();
    let first = mask
        .bits()
        .iter()
        .position(|&b| b)
        .ok_or(Error::EmptyComponent(0))?;
    let start = ((first % w) as i64, (first / w) as i64);
    trace(|x, y| mask.get_signed(x, y), start, connectivity)
}

/// Crack-following walk keeping the region on the left-hand side.
///
/// `start` must be the topmost-leftmost pixel of the region, so its top edge
/// is on the outer boundary.
fn trace<T: Scalar>(
    inside: impl Fn(i64, i64) -> bool,
    start: (i64, i64),
    connectivity: Connectivity,
) -> Result<Polygon<T>> {
    let origin = start;
    let start_dir = (1i64, 0i64);
    let mut corners = vec![origin];
    let mut v = (origin.0 + 1, origin.1);
    let mut dir = start_dir;
    loop {
        let left = (-dir.1, dir.0);
        // pixel indices ahead of `v`, on either side of the direction of travel
        let ahead_left = (
            (2 * v.0 + dir.0 + left.0 - 1) / 2,
            (2 * v.1 + dir.1 + left.1 - 1) / 2,
        );
        let ahead_right = (
            (2 * v.0 + dir.0 - left.0 - 1) / 2,
            (2 * v.1 + dir.1 - left.1 - 1) / 2,
        );
        let in_l = inside(ahead_left.0, ahead_left.1);
        let in_r = inside(ahead_right.0, ahead_right.1);
        let right = (-left.0, -left.1);
        let next = match (in_l, in_r) {
            (true, false) => dir,
            (false, false) => left,
            (true, true) => right,
            (false, true) => match connectivity {
                Connectivity::Eight => right,
                Connectivity::Four => left,
            },
        };
        if v == origin && next == start_dir {
            break;
        }
        if next != dir {
            corners.push(v);
        }
        v = (v.0 + next.0, v.1 + next.1);
        dir = next;
    }
    let vertices = corners
        .into_iter()
        .map(|(x, y)| Point::new(T::lit(x as f64), T::lit(y as f64)))
        .collect();
    Polygon::new(vertices)
}
