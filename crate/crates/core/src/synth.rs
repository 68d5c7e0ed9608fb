//! Random synthetic scenes of well-separated text-like polygons.

use std::f64::consts::PI;

use rand::Rng;

use crate::encoder::{LabelBundle, TextAnnotation};
use crate::geometry::{connected_components, Connectivity, Point, Polygon};
use crate::scalar::Scalar;

/// Rotated rectangle centred at `(cx, cy)`.
pub fn rotated_rect(cx: f64, cy: f64, w: f64, h: f64, angle: f64) -> Polygon<f64> {
    let (s, c) = angle.sin_cos();
    let corners = [(-w / 2.0, -h / 2.0), (w / 2.0, -h / 2.0), (w / 2.0, h / 2.0), (-w / 2.0, h / 2.0)];
    Polygon::new(
        corners
            .iter()
            .map(|&(x, y)| Point::new(cx + x * c - y * s, cy + x * s + y * c))
            .collect(),
    )
    .expect("rectangle is valid")
}

/// Curved band between two concentric arcs, like a line of text set on a curve.
pub fn arc_band(cx: f64, cy: f64, radius: f64, thickness: f64, start: f64, span: f64, samples: usize) -> Polygon<f64> {
    let samples = samples.max(2);
    let mut v = Vec::with_capacity(2 * samples);
    for k in 0..samples {
        let a = start + span * k as f64 / (samples - 1) as f64;
        v.push(Point::new(cx + (radius + thickness) * a.cos(), cy + (radius + thickness) * a.sin()));
    }
    for k in (0..samples).rev() {
        let a = start + span * k as f64 / (samples - 1) as f64;
        v.push(Point::new(cx + radius * a.cos(), cy + radius * a.sin()));
    }
    Polygon::new(v).expect("band is valid")
}

fn random_shape<R: Rng + ?Sized>(rng: &mut R, height: usize, width: usize) -> Polygon<f64> {
    let scale = (height.min(width) as f64 / 256.0).clamp(0.5, 2.5);
    let cx = rng.random_range(0.0..width as f64);
    let cy = rng.random_range(0.0..height as f64);
    match rng.random_range(0..3) {
        0 => {
            let w = rng.random_range(24.0..110.0) * scale;
            let h = rng.random_range(14.0..36.0) * scale;
            rotated_rect(cx, cy, w, h, rng.random_range(-PI..PI))
        }
        1 => {
            let n = rng.random_range(5..10);
            let rx = rng.random_range(14.0..60.0) * scale;
            let ry = rng.random_range(10.0..24.0) * scale;
            let rot = rng.random_range(-PI..PI);
            let (s, c) = rot.sin_cos();
            let mut angles: Vec<f64> = (0..n)
                .map(|k| (k as f64 + rng.random_range(-0.3..0.3)) * 2.0 * PI / n as f64)
                .collect();
            angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Polygon::new(
                angles
                    .iter()
                    .map(|a| {
                        let (x, y) = (rx * a.cos(), ry * a.sin());
                        Point::new(cx + x * c - y * s, cy + x * s + y * c)
                    })
                    .collect(),
            )
            .expect("ellipse polygon is valid")
        }
        _ => {
            let radius = rng.random_range(40.0..110.0) * scale;
            let thickness = rng.random_range(14.0..30.0) * scale;
            let span = rng.random_range(0.5..1.6);
            let start = rng.random_range(-PI..PI);
            let samples = rng.random_range(4..8);
            let band = arc_band(0.0, 0.0, radius, thickness, start, span, samples);
            let mid = start + span / 2.0;
            let r = radius + thickness / 2.0;
            band.translated(cx - r * mid.cos(), cy - r * mid.sin())
        }
    }
}

/// Up to `count` non-overlapping polygons inside a `height x width` image.
///
/// Bounding boxes are kept `margin` pixels apart and away from the border.
pub fn random_scene<R: Rng + ?Sized>(
    rng: &mut R,
    height: usize,
    width: usize,
    count: usize,
    margin: f64,
) -> Vec<TextAnnotation<f64>> {
    let mut boxes: Vec<(Point<f64>, Point<f64>)> = Vec::new();
    let mut out = Vec::new();
    for _ in 0..count * 200 {
        if out.len() == count {
            break;
        }
        let poly = random_shape(rng, height, width);
        let (min, max) = poly.bounds();
        if min.x < margin || min.y < margin || max.x > width as f64 - margin || max.y > height as f64 - margin {
            continue;
        }
        let clash = boxes.iter().any(|(a, b)| {
            !(max.x + margin < a.x || b.x + margin < min.x || max.y + margin < a.y || b.y + margin < min.y)
        });
        if clash {
            continue;
        }
        boxes.push((min, max));
        let id = out.len() as u32;
        out.push(TextAnnotation::new(poly, id));
    }
    out
}

/// True when every supervised kernel forms exactly one component of at least
/// `min_area` pixels under `connectivity`, and no two kernels touch.
pub fn kernels_well_formed<T: Scalar>(bundle: &LabelBundle<T>, connectivity: Connectivity, min_area: usize) -> bool {
    let components = connected_components(&bundle.kernel_map, connectivity);
    let supervised: Vec<u32> = bundle.supervised_labels().collect();
    if components.num_labels() as usize != supervised.len() {
        return false;
    }
    let areas = components.areas();
    supervised.iter().all(|&label| {
        let mut comp = None;
        for (i, &k) in bundle.kernel_id.labels().iter().enumerate() {
            if k == label {
                let c = components.labels()[i];
                match comp {
                    None => comp = Some(c),
                    Some(prev) if prev != c => return false,
                    _ => {}
                }
            }
        }
        comp.is_some_and(|c| areas[c as usize] >= min_area)
    })
}
