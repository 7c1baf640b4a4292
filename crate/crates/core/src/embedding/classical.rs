use nalgebra::{DMatrix, SymmetricEigen};

use super::{canonical_signs, Embedding, EmbeddingMeta, EmbeddingMethod};
use crate::error::{Error, Result};
use crate::DistanceMatrix;

/// Classical (Torgerson) MDS into `k` dimensions.
///
/// Double-centers `-D∘D / 2`, keeps the top `k` eigenpairs and scales the
/// eigenvectors by the square roots of the eigenvalues. Negative eigenvalues
/// are clipped to zero; their share of the spectrum is reported in
/// `meta.negative_eigenvalue_ratio`.
pub fn classical_mds(d: &DistanceMatrix, k: usize) -> Result<Embedding> {
    let m = d.size();
    if k == 0 || k >= m {
        return Err(Error::invalid(format!(
            "classical MDS needs 1 <= k < m, got k = {k}, m = {m}"
        )));
    }
    let mut b = d.to_dmatrix().map(|v| -0.5 * v * v);
    double_center(&mut b);
    let eig = SymmetricEigen::new(b);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));

    let neg: f64 = eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let total: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();

    let mut x = DMatrix::zeros(m, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let s = eig.eigenvalues[idx].max(0.0).sqrt();
        for r in 0..m {
            x[(r, c)] = eig.eigenvectors[(r, idx)] * s;
        }
    }
    canonical_signs(&mut x);

    let mut meta = EmbeddingMeta::new(EmbeddingMethod::Classical);
    meta.negative_eigenvalue_ratio = Some(if total > 0.0 { neg / total } else { 0.0 });
    Embedding::new(x, meta)
}

/// `B <- J B J` with `J = I - 11^T / m`.
fn double_center(b: &mut DMatrix<f64>) {
    let m = b.nrows() as f64;
    let row_means: Vec<f64> = b.row_iter().map(|r| r.sum() / m).collect();
    let col_means: Vec<f64> = b.column_iter().map(|c| c.sum() / m).collect();
    let all = row_means.iter().sum::<f64>() / m;
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            b[(i, j)] += all - row_means[i] - col_means[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{points_matrix, procrustes_align};

    #[test]
    fn unit_square_is_recovered() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let d = DistanceMatrix::euclidean_2d(&pts).unwrap();
        let e = classical_mds(&d, 2).unwrap();
        let p = procrustes_align(e.coords(), &points_matrix(&pts)).unwrap();
        assert!(p.residual < 1e-9);
        assert!(e.meta.negative_eigenvalue_ratio.unwrap() < 1e-12);
    }

    #[test]
    fn zero_matrix_collapses_to_origin() {
        let d = DistanceMatrix::new(3, vec![0.0; 9]).unwrap();
        let e = classical_mds(&d, 2).unwrap();
        assert!(e.coords().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn translation_grid_is_recovered() {
        let pts: Vec<[f64; 2]> = (0..16)
            .map(|k| [-1.0 + 2.0 * (k / 4) as f64 / 3.0, -1.0 + 2.0 * (k % 4) as f64 / 3.0])
            .collect();
        let d = crate::transport::translation_matrix(&pts).unwrap();
        let e = classical_mds(&d, 2).unwrap();
        let p = procrustes_align(e.coords(), &points_matrix(&pts)).unwrap();
        assert!(p.residual < 1e-9, "{}", p.residual);
    }

    #[test]
    fn bad_dimension() {
        let d = DistanceMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(classical_mds(&d, 2).is_err());
        assert!(classical_mds(&d, 0).is_err());
    }

    #[test]
    fn non_euclidean_input_reports_negative_spectrum() {
        // Star metric on four points: the centre is at distance 1 from three
        // leaves that are pairwise at distance 2.
        let d = DistanceMatrix::new(
            4,
            vec![
                0.0, 1.0, 1.0, 1.0, //
                1.0, 0.0, 2.0, 2.0, //
                1.0, 2.0, 0.0, 2.0, //
                1.0, 2.0, 2.0, 0.0,
            ],
        )
        .unwrap();
        let e = classical_mds(&d, 2).unwrap();
        assert!(e.meta.negative_eigenvalue_ratio.unwrap() > 1e-3);
    }
}
