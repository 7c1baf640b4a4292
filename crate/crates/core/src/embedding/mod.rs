//! Embeddings of distance matrices and feature matrices.
//!
//! Every method returns an [`Embedding`]: an `m x k` coordinate matrix plus
//! metadata. Axes are canonicalized (decreasing variance, first clearly
//! nonzero coordinate positive) so that repeated runs compare entrywise.

mod classical;
mod cluster;
mod isomap;
mod procrustes;
mod scale;
mod smacof;
mod svd;

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use classical::classical_mds;
pub use cluster::{kmeans, purity, KMeans};
pub use isomap::{isomap, isomap_features, knn_geodesics};
pub use procrustes::{points_matrix, procrustes_align, Procrustes};
pub use scale::{frobenius_relative_error, rescale_to_reference};
pub use smacof::{normalized_stress, smacof_mds, SmacofOptions};
pub use svd::svd_embed;

use crate::error::{Error, Result};
use crate::DistanceMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMethod {
    Classical,
    Smacof,
    Svd,
    Isomap,
}

impl EmbeddingMethod {
    pub fn name(self) -> &'static str {
        match self {
            EmbeddingMethod::Classical => "classical",
            EmbeddingMethod::Smacof => "smacof",
            EmbeddingMethod::Svd => "svd",
            EmbeddingMethod::Isomap => "isomap",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub method: EmbeddingMethod,
    /// Normalized stress against the input distances (SMACOF).
    pub stress: Option<f64>,
    pub seed: Option<u64>,
    /// Procrustes residual against a reference, when one was computed.
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    /// Share of spectral mass on negative eigenvalues of the centered Gram
    /// matrix; zero for Euclidean-embeddable input.
    pub negative_eigenvalue_ratio: Option<f64>,
}

impl EmbeddingMeta {
    pub fn new(method: EmbeddingMethod) -> Self {
        EmbeddingMeta {
            method,
            stress: None,
            seed: None,
            residual: None,
            iterations: None,
            negative_eigenvalue_ratio: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    coords: DMatrix<f64>,
    pub meta: EmbeddingMeta,
}

impl Embedding {
    pub fn new(coords: DMatrix<f64>, meta: EmbeddingMeta) -> Result<Self> {
        if coords.ncols() == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding has non-finite coordinates"));
        }
        Ok(Embedding { coords, meta })
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.coords.row(i).iter().copied().collect()
    }

    /// Pairwise Euclidean distances between embedded points.
    pub fn distances(&self) -> Result<DistanceMatrix> {
        let rows: Vec<Vec<f64>> = (0..self.len()).map(|i| self.point(i)).collect();
        DistanceMatrix::euclidean(&rows)
    }

    /// CSV with columns `index, x1, ..., xk`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["index".to_string()];
        header.extend((1..=self.dim()).map(|c| format!("x{c}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![i.to_string()];
            rec.extend(self.coords.row(i).iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn write_meta(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.meta)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Reads coordinates written by [`write_csv`](Self::write_csv); metadata
    /// is taken from `meta`.
    pub fn read_csv(path: &Path, meta: EmbeddingMeta) -> Result<Embedding> {
        let mut r = csv::Reader::from_path(path)?;
        let k = r.headers()?.len().saturating_sub(1);
        let mut data = Vec::new();
        let mut rows = 0;
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != k + 1 {
                return Err(Error::parse(path, format!("row {line} has {} fields", rec.len())));
            }
            for f in rec.iter().skip(1) {
                data.push(
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::parse(path, format!("row {line}: {e}")))?,
                );
            }
            rows += 1;
        }
        Embedding::new(DMatrix::from_row_slice(rows, k, &data), meta)
            .map_err(|e| Error::parse(path, e.to_string()))
    }
}

/// Flips each column so that its first coordinate that is clearly nonzero is
/// positive.
pub(crate) fn canonical_signs(x: &mut DMatrix<f64>) {
    for mut col in x.column_iter_mut() {
        let scale = col.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        if let Some(v) = col.iter().find(|v| v.abs() > 1e-8 * scale) {
            if *v < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Subtracts column means.
pub(crate) fn center_columns(x: &mut DMatrix<f64>) {
    let m = x.nrows().max(1) as f64;
    for mut col in x.column_iter_mut() {
        let mean = col.sum() / m;
        col.add_scalar_mut(-mean);
    }
}
