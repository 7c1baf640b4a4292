use rayon::prelude::*;

use super::exact::{exact_w2_with, ExactOptions};
use crate::error::{Error, Result};
use crate::measures::{rasterize, to_pointcloud, GridDensity, GridFrame, PointCloud, ShapeSpec};
use crate::DistanceMatrix;

/// Variance of the default isotropic Gaussian reference, in squared pixel
/// spacings.
pub const DEFAULT_REFERENCE_VARIANCE: f64 = 25.0;

/// Transport maps from one reference cloud to a list of targets.
#[derive(Clone, Debug, PartialEq)]
pub struct LotEmbedding {
    pub reference: PointCloud,
    /// `maps[k][i]` is the image of reference point `i` under the map to target `k`.
    pub maps: Vec<Vec<[f64; 2]>>,
}

impl LotEmbedding {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Map of target `k` flattened and weighted by `sqrt(w_i)`, so Euclidean
    /// distances between rows are LOT distances.
    pub fn feature_row(&self, k: usize) -> Vec<f64> {
        self.maps[k]
            .iter()
            .zip(self.reference.weights())
            .flat_map(|(t, w)| {
                let s = w.sqrt();
                [s * t[0], s * t[1]]
            })
            .collect()
    }
}

/// The default reference: an isotropic Gaussian with covariance `25 I` in
/// pixel units (a standard deviation of 5 pixels) centered on `frame`,
/// rasterized and truncated.
pub fn default_reference(frame: GridFrame) -> Result<GridDensity> {
    gaussian_reference(frame, DEFAULT_REFERENCE_VARIANCE)
}

/// Isotropic Gaussian at the center of `frame` whose covariance is
/// `variance * I` in pixel units, i.e. `variance * spacing^2 * I` in
/// physical coordinates.
pub fn gaussian_reference(frame: GridFrame, variance: f64) -> Result<GridDensity> {
    let variance = variance * frame.spacing * frame.spacing;
    let far = frame.far_corner();
    let center = [
        0.5 * (frame.origin[0] + far[0]),
        0.5 * (frame.origin[1] + far[1]),
    ];
    rasterize(
        &ShapeSpec::gaussian(center, [[variance, 0.0], [0.0, variance]])?,
        frame,
        crate::measures::DEFAULT_SUPERSAMPLE,
    )
}

/// Solves exact OT from `reference` to every target and keeps the
/// barycentric projection `T(x_i) = sum_j pi_ij y_j / w_i`.
pub fn lot_embed(reference: &GridDensity, targets: &[GridDensity]) -> Result<LotEmbedding> {
    let r = to_pointcloud(reference, 0.0)?;
    let clouds = targets
        .iter()
        .enumerate()
        .map(|(k, d)| to_pointcloud(d, 0.0).map_err(|e| e.at_density(k)))
        .collect::<Result<Vec<_>>>()?;
    lot_embed_clouds(&r, &clouds)
}

pub fn lot_embed_clouds(reference: &PointCloud, targets: &[PointCloud]) -> Result<LotEmbedding> {
    if targets.is_empty() {
        return Err(Error::invalid("no LOT targets"));
    }
    if let Some(i) = reference.weights().iter().position(|&w| !(w > 0.0)) {
        return Err(Error::invalid(format!("reference point {i} has zero weight")));
    }
    let maps = targets
        .par_iter()
        .enumerate()
        .map(|(k, t)| lot_map(reference, t).map_err(|e| e.at_density(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LotEmbedding {
        reference: reference.clone(),
        maps,
    })
}

fn lot_map(reference: &PointCloud, target: &PointCloud) -> Result<Vec<[f64; 2]>> {
    let (_, plan, _) = exact_w2_with(reference, target, &ExactOptions::default())?;
    let y = target.points();
    let mut acc = vec![[0.0; 2]; reference.len()];
    for &(i, j, m) in &plan.entries {
        acc[i][0] += m * y[j][0];
        acc[i][1] += m * y[j][1];
    }
    Ok(acc
        .into_iter()
        .zip(reference.weights())
        .map(|(a, w)| [a[0] / w, a[1] / w])
        .collect())
}

/// `D(k, l) = sqrt(sum_i w_i |T_k(x_i) - T_l(x_i)|^2)`
pub fn lot_distance_matrix(emb: &LotEmbedding) -> Result<DistanceMatrix> {
    if emb.is_empty() {
        return Err(Error::invalid("empty LOT embedding"));
    }
    let w = emb.reference.weights();
    DistanceMatrix::from_fn(emb.len(), |k, l| {
        let s: f64 = emb.maps[k]
            .iter()
            .zip(&emb.maps[l])
            .zip(w)
            .map(|((a, b), w)| {
                let dx = a[0] - b[0];
                let dy = a[1] - b[1];
                w * (dx * dx + dy * dy)
            })
            .sum();
        Ok(s.sqrt())
    })
}
