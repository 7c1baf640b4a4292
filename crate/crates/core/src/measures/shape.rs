use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    /// Uniform measure on a disk.
    Disk,
    /// Uniform measure on an ellipse `{(x - u)^T F^{-1} (x - u) <= 1}`.
    Ellipse,
    /// Normal distribution with covariance `F`.
    Gaussian,
}

/// An analytic base measure.
///
/// Ellipses (and disks) are stored through their shape matrix `F` so that a
/// rotated ellipse needs no extra angle parameter: the axis-aligned ellipse
/// with semi-axes `(a, b)` has `F = diag(a^2, b^2)`. For Gaussians `F` is the
/// covariance matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub center: [f64; 2],
    /// Row-major 2x2 shape (ellipse) or covariance (Gaussian) matrix.
    pub form: [[f64; 2]; 2],
}

/// Off-diagonal entries below this fraction of the trace are treated as zero.
const AXIS_SNAP: f64 = 1e-12;

impl ShapeSpec {
    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        check_positive("radius", radius)?;
        Ok(ShapeSpec {
            kind: ShapeKind::Disk,
            center,
            form: [[radius * radius, 0.0], [0.0, radius * radius]],
        })
    }

    /// Axis-aligned ellipse with semi-axis `a` along x and `b` along y.
    pub fn ellipse(center: [f64; 2], a: f64, b: f64) -> Result<Self> {
        check_positive("semi-axis a", a)?;
        check_positive("semi-axis b", b)?;
        let kind = if a == b { ShapeKind::Disk } else { ShapeKind::Ellipse };
        Ok(ShapeSpec {
            kind,
            center,
            form: [[a * a, 0.0], [0.0, b * b]],
        })
    }

    pub fn gaussian(center: [f64; 2], covariance: [[f64; 2]; 2]) -> Result<Self> {
        let s = ShapeSpec {
            kind: ShapeKind::Gaussian,
            center,
            form: covariance,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("shape center must be finite"));
        }
        let f = self.form;
        if (f[0][1] - f[1][0]).abs() > AXIS_SNAP * (f[0][0].abs() + f[1][1].abs()) {
            return Err(Error::invalid("shape matrix must be symmetric"));
        }
        let (l1, l2) = self.eigenvalues();
        if !(l1 > 0.0 && l2 > 0.0) || !l1.is_finite() {
            return Err(Error::invalid(
                "shape matrix must be positive definite (positive semi-axes)",
            ));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.form[0][0], self.form[0][1], self.form[1][0], self.form[1][1])
    }

    pub fn center_vec(&self) -> Vector2<f64> {
        Vector2::new(self.center[0], self.center[1])
    }

    /// Eigenvalues of the shape matrix, largest first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let [[p, q], [_, r]] = self.form;
        let mean = 0.5 * (p + r);
        let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        (mean + rad, mean - rad)
    }

    pub fn is_axis_aligned(&self) -> bool {
        self.form[0][1] == 0.0 && self.form[1][0] == 0.0
    }

    /// `(a, b)`: x and y semi-axes for axis-aligned ellipses, otherwise the
    /// major and minor semi-axes. For Gaussians these are standard deviations.
    pub fn semi_axes(&self) -> (f64, f64) {
        if self.is_axis_aligned() {
            (self.form[0][0].sqrt(), self.form[1][1].sqrt())
        } else {
            let (l1, l2) = self.eigenvalues();
            (l1.sqrt(), l2.sqrt())
        }
    }

    /// Covariance of the measure: `F / 4` for uniform ellipses, `F` for Gaussians.
    pub fn covariance(&self) -> Matrix2<f64> {
        match self.kind {
            ShapeKind::Disk | ShapeKind::Ellipse => self.matrix() / 4.0,
            ShapeKind::Gaussian => self.matrix(),
        }
    }

    /// Raw second moments `E[x_j^2]` about the physical origin.
    pub fn raw_second_moments(&self) -> [f64; 2] {
        let c = self.covariance();
        [
            c[(0, 0)] + self.center[0] * self.center[0],
            c[(1, 1)] + self.center[1] * self.center[1],
        ]
    }

    /// Mahalanobis-type radius beyond which the rasterized measure is zero:
    /// 1 for ellipses, the truncation radius for Gaussians.
    pub(crate) fn support_radius(&self) -> f64 {
        match self.kind {
            ShapeKind::Gaussian => GAUSSIAN_TRUNCATION,
            _ => 1.0,
        }
    }

    /// Axis-aligned bounding box `([xmin, ymin], [xmax, ymax])` of the support.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let r = self.support_radius();
        let hx = r * self.form[0][0].sqrt();
        let hy = r * self.form[1][1].sqrt();
        (
            [self.center[0] - hx, self.center[1] - hy],
            [self.center[0] + hx, self.center[1] + hy],
        )
    }

    /// Unnormalized density at `x` (zero outside the support).
    pub(crate) fn density_fn(&self) -> impl Fn(f64, f64) -> f64 {
        let inv = self
            .matrix()
            .try_inverse()
            .expect("validated shape matrix is invertible");
        let (i00, i01, i11) = (inv[(0, 0)], 0.5 * (inv[(0, 1)] + inv[(1, 0)]), inv[(1, 1)]);
        let [cx, cy] = self.center;
        let gaussian = self.kind == ShapeKind::Gaussian;
        let r2 = self.support_radius().powi(2);
        move |x, y| {
            let dx = x - cx;
            let dy = y - cy;
            let q = i00 * dx * dx + 2.0 * i01 * dx * dy + i11 * dy * dy;
            if q > r2 {
                0.0
            } else if gaussian {
                (-0.5 * q).exp()
            } else {
                1.0
            }
        }
    }
}

/// Gaussians are truncated at this many standard deviations (Mahalanobis radius).
pub const GAUSSIAN_TRUNCATION: f64 = 4.0;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

/// A push-forward map applied analytically to a [`ShapeSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformSpec {
    /// `x -> x + theta`
    Translate { theta: [f64; 2] },
    /// `x -> theta ⊙ x` with positive components.
    Dilate { theta: [f64; 2] },
    /// Counter-clockwise rotation about the origin by `t` radians.
    Rotate { t: f64 },
}

/// Exact parameters of the push-forward of `shape` under `t`.
pub fn apply_transform(shape: &ShapeSpec, t: &TransformSpec) -> Result<ShapeSpec> {
    shape.validate()?;
    let out = match *t {
        TransformSpec::Translate { theta } => {
            if !theta.iter().all(|v| v.is_finite()) {
                return Err(Error::invalid("translation must be finite"));
            }
            ShapeSpec {
                center: [shape.center[0] + theta[0], shape.center[1] + theta[1]],
                ..*shape
            }
        }
        TransformSpec::Dilate { theta } => {
            if !(theta[0] > 0.0 && theta[1] > 0.0) {
                return Err(Error::invalid(format!(
                    "dilation components must be positive, got {theta:?}"
                )));
            }
            if !shape.is_axis_aligned() {
                return Err(Error::UnsupportedComposition(
                    "dilation of a non-axis-aligned shape".into(),
                ));
            }
            let f = shape.form;
            let form = [
                [f[0][0] * theta[0] * theta[0], 0.0],
                [0.0, f[1][1] * theta[1] * theta[1]],
            ];
            let kind = match shape.kind {
                ShapeKind::Gaussian => ShapeKind::Gaussian,
                _ if form[0][0] == form[1][1] => ShapeKind::Disk,
                _ => ShapeKind::Ellipse,
            };
            ShapeSpec {
                kind,
                center: [shape.center[0] * theta[0], shape.center[1] * theta[1]],
                form,
            }
        }
        TransformSpec::Rotate { t } => {
            let (s, c) = t.sin_cos();
            let rot = Matrix2::new(c, -s, s, c);
            let center = rot * shape.center_vec();
            let form = if shape.kind == ShapeKind::Disk {
                shape.form
            } else {
                let m = rot * shape.matrix() * rot.transpose();
                let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
                let off = if off.abs() <= AXIS_SNAP * (m[(0, 0)] + m[(1, 1)]) {
                    0.0
                } else {
                    off
                };
                [[m[(0, 0)], off], [off, m[(1, 1)]]]
            };
            ShapeSpec {
                kind: shape.kind,
                center: [center[0], center[1]],
                form,
            }
        }
    };
    Ok(out)
}
