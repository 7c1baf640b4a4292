use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{canonical_signs, center_columns, Embedding, EmbeddingMeta, EmbeddingMethod};
use crate::error::{Error, Result};
use crate::DistanceMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmacofOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when stress decreases by less than this fraction in one step.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for SmacofOptions {
    fn default() -> Self {
        SmacofOptions {
            restarts: 4,
            max_iter: 300,
            rel_tol: 1e-9,
            seed: 0,
        }
    }
}

/// Metric MDS by stress majorization.
///
/// Each restart starts from its own Gaussian configuration; restart `r` draws
/// from stream `r` of a ChaCha generator seeded with `opts.seed`. The
/// lowest-stress configuration is returned, with its normalized stress.
pub fn smacof_mds(d: &DistanceMatrix, k: usize, opts: &SmacofOptions) -> Result<Embedding> {
    let m = d.size();
    if k == 0 {
        return Err(Error::invalid("embedding dimension must be at least 1"));
    }
    if d.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("distance matrix has non-finite entries"));
    }
    if opts.restarts == 0 {
        return Err(Error::invalid("SMACOF needs at least one restart"));
    }
    let runs: Vec<Run> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let x0 = initial(m, k, d, opts.seed, r as u64);
            majorize(d, x0, opts.max_iter, opts.rel_tol)
        })
        .collect();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.stress.total_cmp(&b.stress))
        .expect("at least one restart");

    let mut x = best.x;
    center_columns(&mut x);
    let x = principal_axes(x);
    let mut meta = EmbeddingMeta::new(EmbeddingMethod::Smacof);
    meta.stress = Some(normalize(best.stress, d));
    meta.seed = Some(opts.seed);
    meta.iterations = Some(best.history.len() - 1);
    Embedding::new(x, meta)
}

/// `sum_{i<j} (|x_i - x_j| - d_ij)^2 / sum_{i<j} d_ij^2`, or the raw stress
/// when `d` is all zeros.
pub fn normalized_stress(d: &DistanceMatrix, x: &DMatrix<f64>) -> Result<f64> {
    if x.nrows() != d.size() {
        return Err(Error::DimensionMismatch(format!(
            "{} points for a {1}x{1} matrix",
            x.nrows(),
            d.size()
        )));
    }
    Ok(normalize(raw_stress(d, x), d))
}

struct Run {
    x: DMatrix<f64>,
    stress: f64,
    history: Vec<f64>,
}

fn initial(m: usize, k: usize, d: &DistanceMatrix, seed: u64, stream: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = (m * m).max(1) as f64;
    let spread = (d.as_slice().iter().map(|v| v * v).sum::<f64>() / n).sqrt().max(1e-12);
    DMatrix::from_fn(m, k, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * spread
    })
}

fn pair_dist(x: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    (0..x.ncols())
        .map(|c| {
            let t = x[(i, c)] - x[(j, c)];
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

fn raw_stress(d: &DistanceMatrix, x: &DMatrix<f64>) -> f64 {
    let m = d.size();
    let mut s = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let r = pair_dist(x, i, j) - d.get(i, j);
            s += r * r;
        }
    }
    s
}

fn normalize(stress: f64, d: &DistanceMatrix) -> f64 {
    let total: f64 = d.as_slice().iter().map(|v| v * v).sum::<f64>() / 2.0;
    if total > 0.0 {
        stress / total
    } else {
        stress
    }
}

/// Guttman iterations from `x`.
fn majorize(d: &DistanceMatrix, mut x: DMatrix<f64>, max_iter: usize, rel_tol: f64) -> Run {
    let m = d.size();
    let k = x.ncols();
    let mut stress = raw_stress(d, &x);
    let mut history = vec![stress];
    let scale: f64 = d.as_slice().iter().map(|v| v * v).sum();
    let mut next = DMatrix::zeros(m, k);
    for _ in 0..max_iter {
        if stress <= 1e-30 * scale.max(1.0) {
            break;
        }
        // next = B(x) x / m
        next.fill(0.0);
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let dij = pair_dist(&x, i, j);
                let b = if dij > 0.0 { d.get(i, j) / dij } else { 0.0 };
                for c in 0..k {
                    next[(i, c)] += b * (x[(i, c)] - x[(j, c)]);
                }
            }
        }
        next /= m.max(1) as f64;
        std::mem::swap(&mut x, &mut next);
        let s = raw_stress(d, &x);
        debug_assert!(
            s <= stress * (1.0 + 1e-10) + 1e-14 * scale,
            "stress increased from {stress} to {s}"
        );
        history.push(s);
        let done = stress - s <= rel_tol * stress;
        stress = s;
        if done {
            break;
        }
    }
    Run { x, stress, history }
}

/// Rotates a centered configuration onto its principal axes, largest
/// variance first, and fixes signs.
fn principal_axes(x: DMatrix<f64>) -> DMatrix<f64> {
    let cov = x.transpose() * &x;
    let eig = nalgebra::SymmetricEigen::new(cov);
    let k = x.ncols();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let basis = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    let mut y = x * basis;
    canonical_signs(&mut y);
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{points_matrix, procrustes_align};

    fn grid() -> Vec<[f64; 2]> {
        (0..16)
            .map(|k| [(k / 4) as f64, (k % 4) as f64 * 0.7])
            .collect()
    }

    #[test]
    fn euclidean_input_reaches_near_zero_stress() {
        let pts = grid();
        let d = DistanceMatrix::euclidean_2d(&pts).unwrap();
        let e = smacof_mds(&d, 2, &SmacofOptions::default()).unwrap();
        assert!(e.meta.stress.unwrap() < 1e-6, "{:?}", e.meta.stress);
        let p = procrustes_align(e.coords(), &points_matrix(&pts)).unwrap();
        assert!(p.residual < 1e-2);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let d = DistanceMatrix::euclidean_2d(&grid()).unwrap();
        let o = SmacofOptions {
            seed: 42,
            ..SmacofOptions::default()
        };
        let a = smacof_mds(&d, 2, &o).unwrap();
        let b = smacof_mds(&d, 2, &o).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stress_never_increases() {
        let pts = grid();
        let mut d = DistanceMatrix::euclidean_2d(&pts).unwrap().to_dmatrix();
        // Perturb to a non-Euclidean matrix.
        for i in 0..16 {
            for j in 0..i {
                let bump = 0.1 * ((i * 7 + j * 3) % 5) as f64;
                d[(i, j)] += bump;
                d[(j, i)] += bump;
            }
        }
        let d = DistanceMatrix::new(16, d.as_slice().to_vec()).unwrap();
        let x0 = initial(16, 2, &d, 9, 0);
        let run = majorize(&d, x0, 200, 0.0);
        for w in run.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-10), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let d = DistanceMatrix::euclidean_2d(&grid()).unwrap();
        assert!(smacof_mds(&d, 0, &SmacofOptions::default()).is_err());
        let none = SmacofOptions {
            restarts: 0,
            ..SmacofOptions::default()
        };
        assert!(smacof_mds(&d, 2, &none).is_err());
    }
}
