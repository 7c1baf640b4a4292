mod common;

use common::{assignment_w2_sq, brute_force_w2_sq, density, feats, tree_count};
use nalgebra::{DMatrix, Rotation2};
use nocollide::embedding::{classical_mds, procrustes_align, rescale_to_reference};
use nocollide::measures::{rasterize, to_pointcloud, GridFrame, PointCloud, ShapeSpec};
use nocollide::slicing::{nc_distance, FeatureKind, Weighting};
use nocollide::transport::exact_w2;
use nocollide::DistanceMatrix;
use proptest::prelude::*;

const KINDS: [FeatureKind; 2] = [FeatureKind::MassCenter, FeatureKind::GeomCenter];

/// Pixel weights on an 8x8 grid, about a third of them zero.
fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 2 => 0.05f64..1.0], 64)
        .prop_filter("needs mass", |w| w.iter().filter(|&&v| v > 0.0).count() >= 4)
}

fn cloud(max: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(((-2.0f64..2.0, -2.0f64..2.0), 0.05f64..1.0), 1..=max).prop_map(|v| {
        let (p, w): (Vec<_>, Vec<_>) = v.into_iter().map(|((x, y), w)| ([x, y], w)).unzip();
        PointCloud::new(p, w).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nc_distance_is_a_metric(a in weights(), b in weights(), c in weights(), depth in 1usize..=4) {
        let (da, db, dc) = (density(8, 8, a), density(8, 8, b), density(8, 8, c));
        let (fa, fb, fc) = (feats(&da, depth), feats(&db, depth), feats(&dc, depth));
        prop_assume!(fa.is_some() && fb.is_some() && fc.is_some());
        let (fa, fb, fc) = (fa.unwrap(), fb.unwrap(), fc.unwrap());
        for kind in KINDS {
            for p in [1.0, 2.0] {
                let d = |x, y| nc_distance(x, y, kind, p, Weighting::Mass).unwrap();
                prop_assert!(d(&fa, &fa).abs() < 1e-9);
                prop_assert!(d(&fa, &fb) >= 0.0);
                prop_assert!((d(&fa, &fb) - d(&fb, &fa)).abs() < 1e-9);
                prop_assert!(d(&fa, &fc) <= d(&fa, &fb) + d(&fb, &fc) + 1e-9);
            }
        }
    }

    #[test]
    fn integer_shifts_are_isometric(w in weights(), di in -3isize..=3, dj in -3isize..=3, depth in 0usize..=4) {
        // Mass fills the central 8x8 block of a 14x14 grid, so shifts up to
        // 3 pixels stay on the grid. No pixel holds a sixteenth of the mass,
        // so every cell spans several pixels.
        let mut big = vec![0.0; 14 * 14];
        for j in 0..8 {
            for i in 0..8 {
                big[(j + 3) * 14 + i + 3] = w[j * 8 + i] + 0.5;
            }
        }
        let d = density(14, 14, big);
        let moved = d.shift_pixels(di, dj).unwrap();
        let h = d.spacing();
        let expected = h * (di as f64).hypot(dj as f64);
        let (fa, fb) = (feats(&d, depth).unwrap(), feats(&moved, depth).unwrap());
        for kind in KINDS {
            let got = nc_distance(&fa, &fb, kind, 2.0, Weighting::Mass).unwrap();
            prop_assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        }
    }

    #[test]
    fn exact_w2_matches_vertex_enumeration(a in cloud(4), b in cloud(4)) {
        prop_assume!(tree_count(a.len(), b.len()) <= 5000.0);
        let (w, plan) = exact_w2(&a, &b).unwrap();
        let oracle = brute_force_w2_sq(&a, &b);
        prop_assert!((w * w - oracle).abs() < 1e-9, "{} vs {oracle}", w * w);
        prop_assert!(plan.entries.len() < a.len() + b.len());
    }

    #[test]
    fn exact_w2_is_symmetric_and_zero_on_the_diagonal(a in cloud(12), b in cloud(12)) {
        let ab = exact_w2(&a, &b).unwrap().0;
        let ba = exact_w2(&b, &a).unwrap().0;
        prop_assert!((ab - ba).abs() < 1e-9);
        // The optimum is exact; its square root magnifies rounding.
        prop_assert!(exact_w2(&a, &a).unwrap().0.powi(2) < 1e-15);
    }

    #[test]
    fn uniform_assignments_match_permutations(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12)) {
        let p: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let a = PointCloud::uniform(p[..6].to_vec()).unwrap();
        let b = PointCloud::uniform(p[6..].to_vec()).unwrap();
        let w = exact_w2(&a, &b).unwrap().0;
        prop_assert!((w * w - assignment_w2_sq(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn rescaling_preserves_ratios(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..8), anchor in 0.1f64..10.0) {
        let p: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let d = DistanceMatrix::euclidean_2d(&p).unwrap();
        prop_assume!(d.max() > 1e-6);
        let r = rescale_to_reference(&d, anchor).unwrap();
        prop_assert!((r.max() - anchor).abs() < 1e-9 * anchor);
        let s = anchor / d.max();
        for (x, y) in d.as_slice().iter().zip(r.as_slice()) {
            prop_assert!((x * s - y).abs() < 1e-9 * anchor);
        }
    }

    #[test]
    fn mds_recovers_planar_configurations(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4..10), t in 0.0f64..6.3) {
        let p: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let y = DMatrix::from_fn(p.len(), 2, |i, k| p[i][k]);
        prop_assume!(y.column(0).variance() > 1e-3 && y.column(1).variance() > 1e-3);
        // Distances are invariant under rigid motion, so the recovered
        // configuration aligns with any rotated copy.
        let r = Rotation2::new(t);
        let rotated = DMatrix::from_fn(p.len(), 2, |i, k| (r * nalgebra::Vector2::new(p[i][0], p[i][1]))[k] + 0.5);
        let e = classical_mds(&DistanceMatrix::euclidean_2d(&p).unwrap(), 2).unwrap();
        prop_assert!(procrustes_align(e.coords(), &rotated).unwrap().rms < 1e-6);
    }

    #[test]
    fn rasterized_disks_have_unit_mass_and_the_right_mean(cx in -0.5f64..0.5, cy in -0.5f64..0.5, r in 0.3f64..1.0) {
        let frame = GridFrame::square(40, -2.0, 2.0).unwrap();
        let d = rasterize(&ShapeSpec::disk([cx, cy], r).unwrap(), frame, 4).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-12);
        let c = to_pointcloud(&d, 0.0).unwrap();
        let m = c.mean();
        prop_assert!((m[0] - cx).hypot(m[1] - cy) < frame.spacing);
    }
}
