//! Property tests against independent oracles.

mod common;

use centripetal::encoder::generate_labels;
use centripetal::eval::{polygon_iou, polygon_iou_unbounded};
use centripetal::geometry::{
    connected_components, contour_of_mask, erode, min_area_rect, rasterize, shrink_polygon, BitMask, Point, Polygon,
};
use centripetal::loss::ohem_select;
use centripetal::{synth, Connectivity, ScalarMap, TextAnnotation};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn connectivity() -> impl Strategy<Value = Connectivity> {
    prop_oneof![Just(Connectivity::Four), Just(Connectivity::Eight)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn components_match_union_find(h in 1usize..=64, w in 1usize..=64, density in 0.0f64..1.0, seed: u64, conn in connectivity()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = random_mask(&mut rng, h, w, density);
        let labels = connected_components(&mask, conn);
        prop_assert_eq!(labels.labels(), &union_find_labels(&mask, conn)[..]);
    }

    #[test]
    fn erosion_matches_definition_and_nests(h in 1usize..=48, w in 1usize..=48, density in 0.3f64..1.0, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_mask(&mut rng, h, w, density);
        let once = erode(&k);
        let twice = erode(&once);
        prop_assert_eq!(&once, &erode_brute(&k));
        prop_assert!(twice.is_subset_of(&once));
        prop_assert!(once.is_subset_of(&k));
    }

    #[test]
    fn contour_rasterizes_back_to_component(h in 1usize..=40, w in 1usize..=40, density in 0.2f64..0.9, seed: u64, conn in connectivity()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = random_mask(&mut rng, h, w, density);
        let labels = union_find_labels(&mask, conn);
        let Some(&first) = labels.iter().find(|&&l| l != 0) else { return Ok(()); };
        let component = BitMask::from_bits(h, w, labels.iter().map(|&l| l == first).collect()).unwrap();
        let contour: Polygon<f64> = contour_of_mask(&component, conn).unwrap();
        prop_assert_eq!(rasterize(&contour, h, w), fill_holes(&component, conn));
    }

    #[test]
    fn scanline_matches_per_pixel_test(seed: u64, n in 3usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cx, cy) = (rng.random_range(-5.0..45.0), rng.random_range(-5.0..45.0));
        let poly = random_star(&mut rng, cx, cy, 1.0, 20.0, n);
        prop_assert_eq!(rasterize(&poly, 40, 40), rasterize_brute(&poly, 40, 40));
    }

    #[test]
    fn min_area_rect_matches_pair_brute_force(seed: u64, n in 1usize..40, spread in 0.1f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Point<f64>> = (0..n)
            .map(|_| Point::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread)))
            .collect();
        let rect = min_area_rect(&pts).unwrap();
        let brute = min_rect_area_brute(&pts);
        prop_assert!((rect.area() - brute).abs() <= 1e-6, "{} vs {}", rect.area(), brute);
        prop_assert!(rect.angle >= -90.0 && rect.angle < 0.0);
        // every point lies inside the rectangle, up to rounding
        let (s, c) = rect.angle.to_radians().sin_cos();
        let tol = 1e-9 * spread.max(1.0);
        for p in &pts {
            let d = p.sub(rect.center);
            let u = d.x * c + d.y * s;
            let v = -d.x * s + d.y * c;
            prop_assert!(u.abs() <= rect.width / 2.0 + tol && v.abs() <= rect.height / 2.0 + tol);
        }
    }

    #[test]
    fn shrink_is_scale_equivariant(seed: u64, n in 3usize..14, k in 0.25f64..8.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = random_star(&mut rng, 0.0, 0.0, 4.0, 20.0, n);
        let small = shrink_polygon(&poly, 0.7).unwrap();
        let big = shrink_polygon(&poly.scaled(k), 0.7).unwrap();
        match (small, big) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                prop_assert_eq!(a.len(), b.len());
                let a = a.scaled(k);
                for (p, q) in a.vertices().iter().zip(b.vertices()) {
                    prop_assert!(p.dist(*q) <= 1e-6 * k * 20.0, "{p:?} vs {q:?}");
                }
            }
            (a, b) => prop_assert!(false, "existence differs: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn ohem_matches_sort(h in 1usize..=24, w in 1usize..=24, seed: u64, ratio in 0.0f64..6.0, ties: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gt = random_mask(&mut rng, h, w, 0.15);
        let tm = random_mask(&mut rng, h, w, 0.85);
        let prob: Vec<f64> = (0..h * w)
            .map(|_| if ties { rng.random_range(0..4) as f64 / 4.0 } else { rng.random::<f64>() })
            .collect();
        let map = ScalarMap::from_vec(h, w, prob.clone()).unwrap();
        let got = ohem_select(&map, &gt, &tm, ratio).unwrap();
        prop_assert_eq!(got, ohem_by_sort(&prob, &gt, &tm, ratio));
    }

    #[test]
    fn iou_is_symmetric_and_matches_bounded_raster(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_star(&mut rng, 30.0, 30.0, 3.0, 20.0, 9);
        let cx = rng.random_range(20.0..40.0);
        let b = random_star(&mut rng, cx, 30.0, 3.0, 20.0, 9);
        let ab = polygon_iou_unbounded(&a, &b);
        prop_assert_eq!(ab, polygon_iou_unbounded(&b, &a));
        prop_assert_eq!(ab, polygon_iou(&a, &b, 64, 64));
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(polygon_iou_unbounded(&a, &a), 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Every regressed pixel points at the closest reference pixel of its own
    /// instance, with ties going to the earliest reference in raster order.
    #[test]
    fn shifts_point_at_nearest_reference(seed: u64, h in 24usize..=128, w in 24usize..=128, overlap: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut anns = synth::random_scene(&mut rng, h, w, 6, 2.0);
        if overlap {
            for _ in 0..3 {
                let id = anns.len() as u32;
                let cx = rng.random_range(0.0..w as f64);
                let cy = rng.random_range(0.0..h as f64);
                anns.push(TextAnnotation::new(random_star(&mut rng, cx, cy, 3.0, 18.0, 8), id));
            }
        }
        let bundle = generate_labels(&anns, h, w, 0.7).unwrap();
        for y in 0..h {
            for x in 0..w {
                let l = bundle.instance_id.get(x, y);
                let info = l.checked_sub(1).map(|i| &bundle.instances[i as usize]);
                let regressed = info.is_some_and(|i| i.is_supervised()) && bundle.kernel_id.get(x, y) != l;
                let (dx, dy) = bundle.shift_field.get(x, y);
                if !regressed {
                    prop_assert_eq!((dx, dy), (0.0, 0.0));
                    continue;
                }
                let (rx, ry, d2) = nearest_reference_brute(&bundle, l, x, y).expect("supervised instance has a reference");
                prop_assert_eq!((x as f64 + dx, y as f64 + dy), (rx as f64, ry as f64), "pixel ({}, {})", x, y);
                prop_assert_eq!(dx * dx + dy * dy, d2 as f64);
            }
        }
    }
}

/// With disjoint ground truths and disjoint detections, a detection can clear
/// IoU 0.5 against at most one ground truth, so greedy matching is a maximum
/// matching. Checked against exhaustive search over assignments.
#[test]
fn greedy_matching_is_maximum_on_disjoint_sets() {
    fn best_assignment(ok: &[Vec<bool>], det: usize, used: &mut Vec<bool>) -> usize {
        if det == ok.len() {
            return 0;
        }
        let mut best = best_assignment(ok, det + 1, used);
        for g in 0..used.len() {
            if ok[det][g] && !used[g] {
                used[g] = true;
                best = best.max(1 + best_assignment(ok, det + 1, used));
                used[g] = false;
            }
        }
        best
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let cells: Vec<(f64, f64)> = (0..6).map(|i| ((i % 3) as f64 * 40.0, (i / 3) as f64 * 40.0)).collect();
        let gts: Vec<TextAnnotation<f64>> = cells
            .iter()
            .enumerate()
            .filter(|_| rng.random_bool(0.8))
            .map(|(i, &(x, y))| TextAnnotation::new(Polygon::rect(x + 2.0, y + 2.0, x + 30.0, y + 20.0).unwrap(), i as u32))
            .collect();
        let present: Vec<bool> = cells.iter().map(|_| rng.random_bool(0.8)).collect();
        let dets: Vec<TextAnnotation<f64>> = cells
            .iter()
            .enumerate()
            .filter(|&(i, _)| present[i])
            .map(|(i, &(x, y))| {
                let dx = rng.random_range(-4.0..4.0);
                let dy = rng.random_range(-4.0..4.0);
                let grow = rng.random_range(0.0..14.0);
                TextAnnotation::new(Polygon::rect(x + 4.0 + dx, y + 4.0 + dy, x + 20.0 + dx + grow, y + 18.0 + dy).unwrap(), i as u32)
            })
            .collect();
        let report = centripetal::match_and_score(&dets, &gts, 0.5).unwrap();
        let ok: Vec<Vec<bool>> = dets
            .iter()
            .map(|d| gts.iter().map(|g| polygon_iou_unbounded(&d.polygon, &g.polygon) >= 0.5).collect())
            .collect();
        let best = best_assignment(&ok, 0, &mut vec![false; gts.len()]);
        assert_eq!(report.matches.len(), best);
    }
}

/// The rasterizer fills exactly the cells whose centers are strictly inside,
/// including for coordinates landing on half-pixel boundaries.
#[test]
fn rasterize_handles_center_aligned_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let coords: Vec<(f64, f64)> = (0..rng.random_range(3..8))
            .map(|_| (rng.random_range(0..40) as f64 / 2.0, rng.random_range(0..40) as f64 / 2.0))
            .collect();
        let Ok(poly) = Polygon::from_xy(&coords) else { continue };
        if !poly.is_simple() {
            continue;
        }
        assert_eq!(rasterize(&poly, 20, 20), rasterize_brute(&poly, 20, 20), "{coords:?}");
    }
}
