use crate::error::{Error, Result};
use crate::DistanceMatrix;

/// Scales `d` so that its largest entry equals `anchor`.
pub fn rescale_to_reference(d: &DistanceMatrix, anchor: f64) -> Result<DistanceMatrix> {
    let max = d.max();
    if !(max > 0.0) {
        return Err(Error::invalid("cannot rescale an all-zero matrix"));
    }
    if !(anchor >= 0.0) || !anchor.is_finite() {
        return Err(Error::invalid(format!("bad anchor value {anchor}")));
    }
    d.scaled(anchor / max)
}

/// `||a - b||_F / ||b||_F`
pub fn frobenius_relative_error(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<f64> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch(format!(
            "{0}x{0} vs {1}x{1}",
            a.size(),
            b.size()
        )));
    }
    let denom = b.frobenius();
    if !(denom > 0.0) {
        return Err(Error::invalid("reference matrix is zero"));
    }
    let num = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}
