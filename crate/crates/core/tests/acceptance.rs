//! End-to-end acceptance checks. Each test prints one line,
//! `criterion N: PASS|FAIL <detail>`, before asserting.

mod common;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use common::{assignment_w2_sq, brute_force_w2_sq, density, feats, tree_count};
use nocollide::embedding::{procrustes_align, EmbeddingMethod};
use nocollide::experiments::{
    run_experiment, timing_sweep, ExperimentSpec, Family, Method, MnistSource, ParameterSet, TimingOptions,
};
use nocollide::measures::{rasterize, GridFrame, PointCloud, ShapeSpec};
use nocollide::slicing::{nc_distance, FeatureKind, Weighting};
use nocollide::transport::{exact_w2, quarter_turns, rhombus_witness, rotation_matrix, OracleKind, RotationOracleParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes past the test harness's output capture, so passing criteria
/// report too.
fn verdict(n: usize, pass: bool, detail: String) {
    let line = format!("criterion {n}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn error_of(r: &nocollide::experiments::ExperimentReport, m: Method) -> f64 {
    let mr = r.method(m).unwrap_or_else(|| panic!("{m} missing"));
    assert!(mr.error.is_none(), "{m}: {:?}", mr.error);
    mr.relative_error.expect("relative error")
}

#[test]
fn criterion_01_translation_isometry() {
    let start = Instant::now();
    let frame = GridFrame::square(48, -3.0, 3.0).unwrap();
    let h = frame.spacing;
    let bases = [
        ShapeSpec::disk([0.1, -0.2], 0.8).unwrap(),
        ShapeSpec::ellipse([0.0, 0.3], 1.1, 0.5).unwrap(),
        ShapeSpec::gaussian([-0.2, 0.0], [[0.12, 0.03], [0.03, 0.08]]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for base in &bases {
        let d = rasterize(base, frame, 4).unwrap();
        let shifts: Vec<(isize, isize)> = (0..4).map(|_| (rng.random_range(-6i64..=6) as isize, rng.random_range(-6i64..=6) as isize)).collect();
        let moved: Vec<_> = shifts.iter().map(|&(i, j)| d.shift_pixels(i, j).unwrap()).collect();
        for depth in 0..=4 {
            let fs: Vec<_> = moved.iter().map(|m| feats(m, depth).unwrap()).collect();
            for a in 0..fs.len() {
                for b in 0..fs.len() {
                    let expected = h * ((shifts[a].0 - shifts[b].0) as f64).hypot((shifts[a].1 - shifts[b].1) as f64);
                    for kind in [FeatureKind::MassCenter, FeatureKind::GeomCenter] {
                        let got = nc_distance(&fs[a], &fs[b], kind, 2.0, Weighting::Mass).unwrap();
                        worst = worst.max((got - expected).abs());
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(1, worst <= 1e-9, format!("max |W - |theta - theta'|| = {worst:.2e} ({secs:.2} s)"));
}

#[test]
fn criterion_02_translation_experiment() {
    let start = Instant::now();
    let spec = ExperimentSpec::new(
        Family::Translation,
        vec![Method::NcMass, Method::NcGeom, Method::Lot, Method::W2Exact],
    );
    let r = run_experiment(&spec).unwrap();
    let (mass, geom, lot) = (error_of(&r, Method::NcMass), error_of(&r, Method::NcGeom), error_of(&r, Method::Lot));
    let secs = start.elapsed().as_secs_f64();
    verdict(
        2,
        mass <= 0.020 && geom <= 0.025 && lot <= 0.025 && secs < 120.0,
        format!("nc_mass {mass:.4}, nc_geom {geom:.4}, lot {lot:.4} ({secs:.1} s incl. exact W2)"),
    );
}

#[test]
fn criterion_03_dilation_experiment() {
    let start = Instant::now();
    let mut errors = Vec::new();
    for n in [64, 128, 256] {
        let mut spec = ExperimentSpec::new(Family::Dilation, vec![Method::NcMass, Method::NcGeom]);
        spec.n = n;
        spec.settings.nc_mass_cuts = Some(3);
        spec.settings.nc_geom_cuts = Some(6);
        let r = run_experiment(&spec).unwrap();
        errors.push((error_of(&r, Method::NcMass), error_of(&r, Method::NcGeom)));
    }
    let secs = start.elapsed().as_secs_f64();
    let (mass, geom) = errors[1];
    let monotone = |f: fn(&(f64, f64)) -> f64| errors.windows(2).all(|w| f(&w[1]) <= f(&w[0]));
    let mass_mono = monotone(|e| e.0);
    let geom_mono = monotone(|e| e.1);
    verdict(
        3,
        mass <= 0.03 && geom <= 0.06 && mass_mono && geom_mono && secs < 600.0,
        format!(
            "n=128 nc_mass {mass:.4}, nc_geom {geom:.4}; 64/128/256 nc_mass {:.4}/{:.4}/{:.4} (monotone {mass_mono}), \
             nc_geom {:.4}/{:.4}/{:.4} (monotone {geom_mono}) ({secs:.1} s)",
            errors[0].0, errors[1].0, errors[2].0, errors[0].1, errors[1].1, errors[2].1
        ),
    );
}

#[test]
fn criterion_04_rotation_oracle_agreement() {
    let start = Instant::now();
    let spec = ExperimentSpec::new(Family::Rotation, vec![Method::W2Exact]);
    let r = run_experiment(&spec).unwrap();
    assert_eq!(r.reference.as_deref(), Some("w2_analytic"));
    let e = error_of(&r, Method::W2Exact);
    let secs = start.elapsed().as_secs_f64();
    verdict(4, e <= 0.01 && secs < 300.0, format!("exact vs closed form {e:.5} ({secs:.1} s)"));
}

#[test]
fn criterion_05_rotation_witnesses() {
    let q = quarter_turns();
    let witness = |a: f64, b: f64, kind| {
        let p = RotationOracleParams::new([0.0, 1.0], a, b, kind).unwrap();
        rhombus_witness(&rotation_matrix(&p, &q).unwrap()).unwrap()
    };
    let w2 = witness(5.0, 2.0, OracleKind::EllipseW2);
    let lot = witness(5.0, 2.0, OracleKind::GaussianLot);
    let w2_round = witness(2.0, 2.0, OracleKind::EllipseW2);
    let lot_round = witness(2.0, 2.0, OracleKind::GaussianLot);
    verdict(
        5,
        (w2 + 9.0).abs() <= 1e-12 && (lot + 36.0).abs() <= 1e-12 && w2_round.abs() <= 1e-12 && lot_round.abs() <= 1e-12,
        format!("w2 {w2}, lot {lot}, a=b: w2 {w2_round:e}, lot {lot_round:e}"),
    );
}

#[test]
fn criterion_06_round_rotation() {
    let start = Instant::now();
    let mut spec = ExperimentSpec::new(Family::Rotation, vec![Method::NcMass, Method::NcGeom, Method::Lot]);
    spec.base = Some(ShapeSpec::ellipse([0.0, 1.0], 2.0, 2.0).unwrap());
    spec.settings.nc_mass_cuts = Some(2);
    spec.settings.nc_geom_cuts = Some(4);
    let r = run_experiment(&spec).unwrap();
    let (mass, geom, lot) = (error_of(&r, Method::NcMass), error_of(&r, Method::NcGeom), error_of(&r, Method::Lot));
    let secs = start.elapsed().as_secs_f64();
    verdict(
        6,
        mass <= 0.03 && geom <= 0.04 && lot <= 0.07 && secs < 180.0,
        format!("nc_mass {mass:.4}, nc_geom {geom:.4}, lot {lot:.4} ({secs:.1} s)"),
    );
}

#[test]
fn criterion_07_metric_axioms() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut triples = 0;
    while triples < 50 {
        let random = |rng: &mut ChaCha8Rng| {
            let w: Vec<f64> = (0..144)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.05..1.0) })
                .collect();
            density(12, 12, w)
        };
        let ds = [random(&mut rng), random(&mut rng), random(&mut rng)];
        for depth in 1..=4 {
            let fs: Option<Vec<_>> = ds.iter().map(|d| feats(d, depth)).collect();
            // A cell cannot lie inside one pixel; such draws are skipped.
            let Some(fs) = fs else { continue };
            for kind in [FeatureKind::MassCenter, FeatureKind::GeomCenter] {
                for p in [1.0, 2.0] {
                    let d = |a: usize, b: usize| nc_distance(&fs[a], &fs[b], kind, p, Weighting::Mass).unwrap();
                    for a in 0..3 {
                        worst = worst.max(d(a, a).abs());
                        for b in 0..3 {
                            worst = worst.max((d(a, b) - d(b, a)).abs()).max(-d(a, b));
                            for c in 0..3 {
                                worst = worst.max(d(a, c) - d(a, b) - d(b, c));
                            }
                        }
                    }
                }
            }
        }
        triples += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(7, worst <= 1e-9 && secs < 30.0, format!("worst axiom violation {worst:.2e} over {triples} triples ({secs:.2} s)"));
}

#[test]
fn criterion_08_exact_solver_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mut m = rng.random_range(1..=6);
        let mut n = rng.random_range(1..=6);
        // Bases are enumerated when there are few of them; larger instances
        // become uniform assignments checked against every permutation.
        let uniform = tree_count(m, n) > 20_000.0;
        if uniform {
            n = m.max(n);
            m = n;
        }
        let mut cloud = |k: usize| {
            let pts: Vec<[f64; 2]> = (0..k).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            let w: Vec<f64> = (0..k).map(|_| if uniform { 1.0 } else { rng.random_range(0.05..1.0) }).collect();
            PointCloud::new(pts, w).unwrap()
        };
        let (a, b) = (cloud(m), cloud(n));
        let got = exact_w2(&a, &b).unwrap().0.powi(2);
        let oracle = if uniform { assignment_w2_sq(&a, &b) } else { brute_force_w2_sq(&a, &b) };
        worst = worst.max((got - oracle).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(8, worst <= 1e-9 && secs < 30.0, format!("max |W2^2 - oracle| = {worst:.2e} on 200 instances ({secs:.2} s)"));
}

#[test]
fn criterion_09_embedding_recovery() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for method in [EmbeddingMethod::Classical, EmbeddingMethod::Smacof] {
        let mut spec = ExperimentSpec::new(Family::Translation, vec![Method::NcMass]);
        spec.settings.embedding = Some(method);
        let r = run_experiment(&spec).unwrap();
        let a = r.method(Method::NcMass).unwrap().procrustes.expect("alignment");
        pass &= a.relative_to_diameter <= 0.03 && (a.scale_ratio - 1.0).abs() <= 0.03;
        lines.push(format!(
            "{}: residual {:.2e} of diameter, scale {:.4}",
            method.name(),
            a.relative_to_diameter,
            a.scale_ratio
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(9, pass && secs < 60.0, format!("{} ({secs:.1} s)", lines.join("; ")));
}

#[test]
fn criterion_10_svd_matches_mds() {
    let start = Instant::now();
    let embed = |method: Method, embedding| {
        let mut spec = ExperimentSpec::new(Family::Translation, vec![method]);
        spec.parameters = Some(ParameterSet::Grid {
            lo: [-1.0, -1.0],
            hi: [1.0, 1.0],
            counts: [5, 5],
        });
        spec.settings.embedding = Some(embedding);
        let r = run_experiment(&spec).unwrap();
        r.embeddings[&method].clone()
    };
    let mut lines = Vec::new();
    let mut pass = true;
    for method in [Method::NcMass, Method::Lot] {
        let svd = embed(method, EmbeddingMethod::Svd);
        let mds = embed(method, EmbeddingMethod::Classical);
        let p = procrustes_align(svd.coords(), mds.coords()).unwrap();
        pass &= p.residual <= 0.05;
        lines.push(format!("{method}: residual {:.2e}", p.residual));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(10, pass && secs < 60.0, format!("{} ({secs:.1} s)", lines.join("; ")));
}

#[test]
fn criterion_11_timing_ordering() {
    let start = Instant::now();
    let spec = ExperimentSpec::new(Family::Translation, vec![]);
    let t = timing_sweep(
        Family::Translation,
        &[16],
        &[Method::NcMass, Method::Lot, Method::W2Exact],
        &spec.settings,
        &TimingOptions::default(),
    )
    .unwrap();
    let nc = t.median(Method::NcMass, Some(2), 16).unwrap();
    let lot = t.median(Method::Lot, None, 16).unwrap();
    let exact = t.median(Method::W2Exact, None, 16).unwrap();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        11,
        nc < lot && lot < exact && exact >= 20.0 * nc && lot >= 2.0 * nc && secs < 120.0,
        format!(
            "nc {nc:.4} s < lot {lot:.3} s < exact {exact:.2} s; exact/nc {:.0}x, lot/nc {:.0}x ({secs:.1} s)",
            exact / nc,
            lot / nc
        ),
    );
}

#[test]
fn criterion_12_mnist_pipeline() {
    let start = Instant::now();
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist");
    let mut spec = ExperimentSpec::new(Family::Mnist, vec![Method::NcMass]);
    spec.settings.nc_mass_cuts = Some(4);
    spec.settings.k_neighbors = 5;
    spec.mnist = Some(MnistSource {
        images: data.join("subset-images-idx3-ubyte"),
        labels: data.join("subset-labels-idx1-ubyte"),
        digits: [0u8, 1].into_iter().collect(),
        limit: 600,
    });
    let first = run_experiment(&spec).unwrap();
    let second = run_experiment(&spec).unwrap();
    let deterministic = first.without_timings().unwrap() == second.without_timings().unwrap()
        && first.embeddings == second.embeddings;
    let mr = first.method(Method::NcMass).unwrap();
    let purity = mr.purity.expect("purity");
    let isomap = mr.embedding.as_ref().map(|e| e.method) == Some(EmbeddingMethod::Isomap);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        12,
        first.samples == 600 && deterministic && isomap && purity >= 0.85 && secs < 180.0,
        format!("{} digits, purity {purity:.4}, deterministic {deterministic} ({secs:.1} s for two runs)", first.samples),
    );
}
