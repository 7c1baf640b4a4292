use nalgebra::DMatrix;

use super::center_columns;
use crate::error::{Error, Result};

/// Result of a rigid alignment.
#[derive(Clone, Debug, PartialEq)]
pub struct Procrustes {
    /// RMS deviation divided by the RMS radius of the reference.
    pub residual: f64,
    /// RMS deviation in the reference's units.
    pub rms: f64,
    pub aligned: DMatrix<f64>,
}

/// Finds the rotation or reflection plus translation (no scaling) that best
/// maps `x` onto `y` in the least-squares sense.
pub fn procrustes_align(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<Procrustes> {
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch(format!(
            "cannot align {:?} points onto {:?}",
            x.shape(),
            y.shape()
        )));
    }
    let m = y.nrows();
    if m == 0 {
        return Err(Error::invalid("no points to align"));
    }
    let y_mean = y.row_mean();
    let mut y0 = y.clone();
    center_columns(&mut y0);
    let radius = (y0.norm_squared() / m as f64).sqrt();
    if !(radius > 0.0) {
        return Err(Error::invalid("reference points are all identical"));
    }
    let mut x0 = x.clone();
    center_columns(&mut x0);

    let svd = (x0.transpose() * &y0).svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::invalid("alignment SVD failed")),
    };
    let r = u * vt;
    let mut aligned = x0 * r;
    for mut row in aligned.row_iter_mut() {
        row += &y_mean;
    }
    let rms = ((&aligned - y).norm_squared() / m as f64).sqrt();
    Ok(Procrustes {
        residual: rms / radius,
        rms,
        aligned,
    })
}

/// Stacks 2D points as rows.
pub fn points_matrix(points: &[[f64; 2]]) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), 2, |i, j| points[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud() -> DMatrix<f64> {
        points_matrix(&[[0.0, 0.0], [2.0, 0.5], [1.0, 3.0], [-1.0, 1.0], [0.3, -2.0]])
    }

    #[test]
    fn rigid_motion_is_undone() {
        let y = cloud();
        let (s, c) = 1.1f64.sin_cos();
        let x = DMatrix::from_fn(y.nrows(), 2, |i, j| {
            let (a, b) = (y[(i, 0)], y[(i, 1)]);
            // Reflect, rotate and shift.
            let (a, b) = (a, -b);
            if j == 0 {
                c * a - s * b + 4.0
            } else {
                s * a + c * b - 7.0
            }
        });
        let p = procrustes_align(&x, &y).unwrap();
        assert!(p.residual < 1e-9);
    }

    #[test]
    fn scaling_is_not_removed() {
        let y = cloud();
        let p = procrustes_align(&(&y * 2.0), &y).unwrap();
        assert!(p.residual > 0.5);
    }

    #[test]
    fn degenerate_reference() {
        let y = points_matrix(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(procrustes_align(&y, &y).is_err());
        assert!(procrustes_align(&cloud(), &y).is_err());
    }
}
