use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{features, FeatureKind, FeatureSet};
use super::partition::partition;
use super::schedule::SlicingSchedule;
use crate::error::{Error, Result};
use crate::measures::GridDensity;
use crate::DistanceMatrix;

/// How per-cell displacements are weighted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Weight each cell by its mass in the first measure.
    #[default]
    Mass,
    /// Weight every cell by `2^-N`.
    Uniform,
}

/// Discrete no-collision distance between two feature sets.
///
/// `(sum_b w_b |x_b(a) - x_b(b)|^p)^(1/p)` where `w_b` is the cell mass of
/// `fa` or `2^-N`, depending on `weighting`.
pub fn nc_distance(
    fa: &FeatureSet,
    fb: &FeatureSet,
    kind: FeatureKind,
    p: f64,
    weighting: Weighting,
) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("p must be a finite number >= 1, got {p}")));
    }
    if fa.addresses != fb.addresses {
        return Err(Error::DimensionMismatch(format!(
            "feature sets have different addresses ({} vs {} cells)",
            fa.len(),
            fb.len()
        )));
    }
    let (ca, cb) = (fa.centers(kind), fb.centers(kind));
    let uniform = 1.0 / fa.len() as f64;
    let sum: f64 = (0..fa.len())
        .map(|k| {
            let w = match weighting {
                Weighting::Mass => fa.masses[k],
                Weighting::Uniform => uniform,
            };
            let d = (ca[k][0] - cb[k][0]).hypot(ca[k][1] - cb[k][1]);
            w * if p == 2.0 { d * d } else { d.powf(p) }
        })
        .sum();
    Ok(if p == 2.0 { sum.sqrt() } else { sum.powf(1.0 / p) })
}

/// Features of every density, computed in parallel.
pub fn feature_sets(ds: &[GridDensity], sched: &SlicingSchedule) -> Result<Vec<FeatureSet>> {
    ds.par_iter()
        .enumerate()
        .map(|(k, d)| {
            partition(d, sched)
                .and_then(|part| features(d, &part))
                .map_err(|e| e.at_density(k))
        })
        .collect()
}

/// Pairwise no-collision distances.
pub fn nc_distance_matrix(
    ds: &[GridDensity],
    sched: &SlicingSchedule,
    p: f64,
    kind: FeatureKind,
    weighting: Weighting,
) -> Result<DistanceMatrix> {
    if ds.len() < 2 {
        return Err(Error::invalid("need at least two densities"));
    }
    if let Some(k) = ds.iter().position(|d| !d.same_grid(&ds[0])) {
        return Err(Error::DimensionMismatch(format!(
            "density {k} is on a different grid than density 0"
        )));
    }
    let fs = feature_sets(ds, sched)?;
    features_distance_matrix(&fs, kind, p, weighting)
}

/// Pairwise distances between precomputed feature sets.
///
/// Entries are symmetrized by averaging both orders, which only matters when
/// mass weighting meets unequal cell masses.
pub fn features_distance_matrix(
    fs: &[FeatureSet],
    kind: FeatureKind,
    p: f64,
    weighting: Weighting,
) -> Result<DistanceMatrix> {
    DistanceMatrix::from_fn(fs.len(), |i, j| {
        let a = nc_distance(&fs[i], &fs[j], kind, p, weighting)?;
        let b = nc_distance(&fs[j], &fs[i], kind, p, weighting)?;
        Ok(if a == b { a } else { 0.5 * (a + b) })
    })
}
