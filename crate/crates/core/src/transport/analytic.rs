use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{GridDensity, ShapeKind, ShapeSpec};
use crate::DistanceMatrix;

/// Which closed form a rotation oracle evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Exact W2 between rotated copies of a uniform ellipse.
    EllipseW2,
    /// LOT distance between rotated copies of a Gaussian, against an
    /// isotropic Gaussian reference.
    GaussianLot,
}

/// Parameters of a rotated family `mu_t = (R_t)# mu_0`.
///
/// The base measure enters only through the center `u` and the trace and
/// determinant of its shape matrix: `diag(a^2, b^2)` for an ellipse with
/// semi-axes `a, b`, or the covariance for a Gaussian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationOracleParams {
    pub u: [f64; 2],
    pub trace: f64,
    pub det: f64,
    pub kind: OracleKind,
}

impl RotationOracleParams {
    pub fn new(u: [f64; 2], a: f64, b: f64, kind: OracleKind) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::invalid(format!("semi-axes must be positive, got ({a}, {b})")));
        }
        Ok(RotationOracleParams {
            u,
            trace: a * a + b * b,
            det: a * a * b * b,
            kind,
        })
    }

    /// Oracle parameters for a (possibly rotated) ellipse or Gaussian.
    pub fn from_shape(shape: &ShapeSpec) -> Result<Self> {
        shape.validate()?;
        let f = shape.form;
        let kind = match shape.kind {
            ShapeKind::Gaussian => OracleKind::GaussianLot,
            _ => OracleKind::EllipseW2,
        };
        Ok(RotationOracleParams {
            u: shape.center,
            trace: f[0][0] + f[1][1],
            det: f[0][0] * f[1][1] - f[0][1] * f[1][0],
            kind,
        })
    }

    fn u_norm2(&self) -> f64 {
        self.u[0] * self.u[0] + self.u[1] * self.u[1]
    }
}

/// W2 between the uniform ellipse rotated by `s` and by `t`:
/// `4|u|^2 sin^2((t-s)/2) + (T - sqrt(T^2 cos^2(t-s) + 4 D sin^2(t-s))) / 2`
/// with `T, D` the trace and determinant of the shape matrix.
pub fn analytic_w2_rotation(p: &RotationOracleParams, s: f64, t: f64) -> f64 {
    let d = t - s;
    let (sd, cd) = d.sin_cos();
    let half = (0.5 * d).sin();
    let disc = (p.trace * p.trace * cd * cd + 4.0 * p.det * sd * sd).sqrt();
    let w2 = 4.0 * p.u_norm2() * half * half + 0.5 * (p.trace - disc);
    w2.max(0.0).sqrt()
}

/// LOT distance between rotated Gaussians:
/// `4|u|^2 sin^2((t-s)/2) + 2(tr S - 2 sqrt(det S)) sin^2(t-s)`.
///
/// For an isotropic Gaussian reference the value does not depend on the
/// reference variance.
pub fn analytic_lot_rotation(p: &RotationOracleParams, s: f64, t: f64) -> f64 {
    let d = t - s;
    let sd = d.sin();
    let half = (0.5 * d).sin();
    let w2 = 4.0 * p.u_norm2() * half * half + 2.0 * (p.trace - 2.0 * p.det.sqrt()) * sd * sd;
    w2.max(0.0).sqrt()
}

/// Dispatches on `p.kind`.
pub fn analytic_rotation(p: &RotationOracleParams, s: f64, t: f64) -> f64 {
    match p.kind {
        OracleKind::EllipseW2 => analytic_w2_rotation(p, s, t),
        OracleKind::GaussianLot => analytic_lot_rotation(p, s, t),
    }
}

/// `|theta1 - theta2|`
pub fn analytic_w2_translation(theta1: [f64; 2], theta2: [f64; 2]) -> f64 {
    (theta1[0] - theta2[0]).hypot(theta1[1] - theta2[1])
}

/// `|c ⊙ theta1 - c ⊙ theta2|`
pub fn analytic_w2_dilation(theta1: [f64; 2], theta2: [f64; 2], c: [f64; 2]) -> f64 {
    (c[0] * (theta1[0] - theta2[0])).hypot(c[1] * (theta1[1] - theta2[1]))
}

/// `c_j = sqrt(E[x_j^2])` of a density, treating each pixel as a uniform square.
pub fn second_moments(d: &GridDensity) -> [f64; 2] {
    let m = d.raw_second_moments();
    [m[0].sqrt(), m[1].sqrt()]
}

/// Exact `c_j` of an analytic base shape.
pub fn shape_second_moments(shape: &ShapeSpec) -> [f64; 2] {
    let m = shape.raw_second_moments();
    [m[0].sqrt(), m[1].sqrt()]
}

pub fn translation_matrix(thetas: &[[f64; 2]]) -> Result<DistanceMatrix> {
    DistanceMatrix::from_fn(thetas.len(), |i, j| {
        Ok(analytic_w2_translation(thetas[i], thetas[j]))
    })
}

pub fn dilation_matrix(thetas: &[[f64; 2]], c: [f64; 2]) -> Result<DistanceMatrix> {
    if thetas.iter().flatten().any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("dilation parameters must be positive"));
    }
    DistanceMatrix::from_fn(thetas.len(), |i, j| {
        Ok(analytic_w2_dilation(thetas[i], thetas[j], c))
    })
}

pub fn rotation_matrix(p: &RotationOracleParams, angles: &[f64]) -> Result<DistanceMatrix> {
    DistanceMatrix::from_fn(angles.len(), |i, j| {
        Ok(analytic_rotation(p, angles[i], angles[j]))
    })
}

/// `D(0, pi)^2 - 2 D(0, pi/2)^2` for a matrix over the angles
/// `0, pi/2, pi, 3pi/2` (in that order).
///
/// Four points on a circle at quarter-turn spacing form a square, for which
/// the value is zero.
pub fn rhombus_witness(d: &DistanceMatrix) -> Result<f64> {
    if d.size() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "rhombus witness needs a 4x4 matrix, got {0}x{0}",
            d.size()
        )));
    }
    let diag = d.get(0, 2);
    let side = d.get(0, 1);
    Ok(diag * diag - 2.0 * side * side)
}

/// Quarter-turn angles `0, pi/2, pi, 3pi/2`.
pub fn quarter_turns() -> [f64; 4] {
    use std::f64::consts::FRAC_PI_2;
    [0.0, FRAC_PI_2, 2.0 * FRAC_PI_2, 3.0 * FRAC_PI_2]
}
