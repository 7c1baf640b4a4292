use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A k-means clustering.
#[derive(Clone, Debug, PartialEq)]
pub struct KMeans {
    pub assignment: Vec<usize>,
    pub centers: DMatrix<f64>,
    /// Sum of squared distances to the assigned centers.
    pub inertia: f64,
}

/// Lloyd's algorithm from k-means++ seeds; the best of `restarts` runs.
pub fn kmeans(x: &DMatrix<f64>, k: usize, seed: u64, restarts: usize) -> Result<KMeans> {
    let m = x.nrows();
    if k == 0 || k > m {
        return Err(Error::invalid(format!("k-means needs 1 <= k <= {m}, got {k}")));
    }
    let mut best: Option<KMeans> = None;
    for r in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let run = lloyd(x, plus_plus(x, k, &mut rng), 300);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one run"))
}

fn sq_dist(x: &DMatrix<f64>, i: usize, c: &DMatrix<f64>, j: usize) -> f64 {
    (0..x.ncols()).map(|d| (x[(i, d)] - c[(j, d)]).powi(2)).sum()
}

fn plus_plus(x: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = x.nrows();
    let mut centers = DMatrix::zeros(k, x.ncols());
    let first = rng.random_range(0..m);
    centers.row_mut(0).copy_from(&x.row(first));
    let mut nearest: Vec<f64> = (0..m).map(|i| sq_dist(x, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = m - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            rng.random_range(0..m)
        };
        centers.row_mut(c).copy_from(&x.row(pick));
        for (i, n) in nearest.iter_mut().enumerate() {
            *n = n.min(sq_dist(x, i, &centers, c));
        }
    }
    centers
}

fn lloyd(x: &DMatrix<f64>, mut centers: DMatrix<f64>, max_iter: usize) -> KMeans {
    let (m, k) = (x.nrows(), centers.nrows());
    let mut assignment = vec![usize::MAX; m];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, a) in assignment.iter_mut().enumerate() {
            let c = (0..k)
                .min_by(|&p, &q| sq_dist(x, i, &centers, p).total_cmp(&sq_dist(x, i, &centers, q)))
                .expect("k >= 1");
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for c in 0..k {
            let members: Vec<usize> = (0..m).filter(|&i| assignment[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            for d in 0..x.ncols() {
                centers[(c, d)] = members.iter().map(|&i| x[(i, d)]).sum::<f64>() / members.len() as f64;
            }
        }
    }
    let inertia = (0..m).map(|i| sq_dist(x, i, &centers, assignment[i])).sum();
    KMeans {
        assignment,
        centers,
        inertia,
    }
}

/// Fraction of points whose cluster's majority label equals their own.
pub fn purity<L: Ord + Clone>(assignment: &[usize], labels: &[L]) -> Result<f64> {
    if assignment.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} assignments vs {} labels",
            assignment.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("no points"));
    }
    let mut counts: BTreeMap<usize, BTreeMap<L, usize>> = BTreeMap::new();
    for (&a, l) in assignment.iter().zip(labels) {
        *counts.entry(a).or_default().entry(l.clone()).or_default() += 1;
    }
    let majority: usize = counts.values().map(|c| c.values().max().copied().unwrap_or(0)).sum();
    Ok(majority as f64 / labels.len() as f64)
}
