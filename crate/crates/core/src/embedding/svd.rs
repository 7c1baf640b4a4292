use nalgebra::DMatrix;

use super::{canonical_signs, center_columns, Embedding, EmbeddingMeta, EmbeddingMethod};
use crate::error::{Error, Result};

/// Embeds feature rows by a rank-`k` SVD of the column-centered feature
/// matrix: coordinates are `U_k Σ_k`.
///
/// Equivalent to classical MDS on the Euclidean distances between rows, but
/// never forms the distance matrix.
pub fn svd_embed(features: &[Vec<f64>], k: usize) -> Result<Embedding> {
    let m = features.len();
    let d = features.first().map_or(0, |r| r.len());
    if features.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch("feature rows of unequal length".into()));
    }
    if k == 0 || k > m.min(d) {
        return Err(Error::invalid(format!(
            "SVD embedding needs 1 <= k <= min(m, d) = {}, got {k}",
            m.min(d)
        )));
    }
    let mut x = DMatrix::from_fn(m, d, |i, j| features[i][j]);
    center_columns(&mut x);
    // Thin SVD through the smaller Gram side when rows are long.
    let svd = if d > m {
        x.transpose().svd(false, true)
    } else {
        x.svd(true, false)
    };
    let left = if d > m {
        svd.v_t.map(|v| v.transpose())
    } else {
        svd.u
    }
    .ok_or_else(|| Error::invalid("SVD failed"))?;
    let sigma = svd.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    let mut coords = DMatrix::zeros(m, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        for r in 0..m {
            coords[(r, c)] = left[(r, idx)] * sigma[idx];
        }
    }
    canonical_signs(&mut coords);
    Embedding::new(coords, EmbeddingMeta::new(EmbeddingMethod::Svd))
}
