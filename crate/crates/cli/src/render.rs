//! PNG output: detection overlays and robustness curve plots.

use std::path::Path;

use centripetal::geometry::Polygon;
use centripetal::harness::CurvePoint;
use centripetal::ScalarMap;
use image::{Rgb, RgbImage};
use imageproc::drawing::{draw_filled_circle_mut, draw_hollow_polygon_mut, draw_line_segment_mut};
use imageproc::point::Point as DrawPoint;

pub const DETECTION_COLOR: Rgb<u8> = Rgb([0, 200, 0]);
pub const GROUND_TRUTH_COLOR: Rgb<u8> = Rgb([220, 0, 0]);

/// Grayscale rendering of a probability map, clamped to `[0, 1]`.
pub fn prob_background(prob: &ScalarMap<f32>) -> RgbImage {
    let (h, w) = prob.dims();
    RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let v = (prob.get(x as usize, y as usize).clamp(0.0, 1.0) * 255.0).round() as u8;
        Rgb([v, v, v])
    })
}

/// Draws the outline of every polygon in `color`.
pub fn draw_outlines(img: &mut RgbImage, polys: &[Polygon<f64>], color: Rgb<u8>) {
    for poly in polys {
        let pts: Vec<DrawPoint<f32>> = poly
            .vertices()
            .iter()
            .map(|p| DrawPoint::new(p.x as f32, p.y as f32))
            .collect();
        draw_hollow_polygon_mut(img, &pts, color);
    }
}

/// Line plot of IoU against magnitude on a fixed `[0, 1]` IoU axis.
pub fn plot_curve(points: &[CurvePoint], path: &Path) -> image::ImageResult<()> {
    const W: u32 = 480;
    const H: u32 = 320;
    const PAD: f32 = 32.0;
    let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
    let axis = Rgb([0, 0, 0]);
    let (x0, y0, x1, y1) = (PAD, H as f32 - PAD, W as f32 - PAD, PAD);
    draw_line_segment_mut(&mut img, (x0, y0), (x1, y0), axis);
    draw_line_segment_mut(&mut img, (x0, y0), (x0, y1), axis);
    let grid = Rgb([220, 220, 220]);
    for k in 1..=4 {
        let y = y0 + (y1 - y0) * k as f32 / 4.0;
        draw_line_segment_mut(&mut img, (x0 + 1.0, y), (x1, y), grid);
    }

    let max_m = points.iter().map(|p| p.magnitude).fold(0.0, f64::max);
    let span = if max_m > 0.0 { max_m } else { 1.0 };
    let to_px = |p: &CurvePoint| {
        let fx = (p.magnitude / span) as f32;
        let fy = p.iou.clamp(0.0, 1.0) as f32;
        (x0 + fx * (x1 - x0), y0 + fy * (y1 - y0))
    };
    let line = Rgb([30, 90, 200]);
    for pair in points.windows(2) {
        draw_line_segment_mut(&mut img, to_px(&pair[0]), to_px(&pair[1]), line);
    }
    for p in points {
        let (x, y) = to_px(p);
        draw_filled_circle_mut(&mut img, (x.round() as i32, y.round() as i32), 3, line);
    }
    img.save(path)
}
