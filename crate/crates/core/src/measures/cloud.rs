use super::grid::{GridDensity, MASS_TOLERANCE};
use crate::error::{Error, Result};

/// A finitely supported probability measure in the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from points and nonnegative weights; weights are normalized.
    pub fn new(points: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::invalid("point cloud is empty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("points must be finite"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("point cloud has zero total weight"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(PointCloud { points, weights })
    }

    /// Builds a cloud whose weights are used as given. They must already sum to 1.
    pub fn normalized(points: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
        }
        let c = PointCloud::new(points, weights.clone())?;
        Ok(PointCloud {
            points: c.points,
            weights,
        })
    }

    pub fn uniform(points: Vec<[f64; 2]>) -> Result<Self> {
        let n = points.len();
        PointCloud::new(points, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (p, w) in self.points.iter().zip(&self.weights) {
            m[0] += w * p[0];
            m[1] += w * p[1];
        }
        m
    }

    /// Keeps only the `k` heaviest points and renormalizes. Intended for quick
    /// timing runs; it changes the measure.
    pub fn top_k(&self, k: usize) -> Result<PointCloud> {
        if k == 0 {
            return Err(Error::invalid("top_k needs k >= 1"));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]).then(a.cmp(&b)));
        idx.truncate(k);
        idx.sort_unstable();
        PointCloud::new(
            idx.iter().map(|&i| self.points[i]).collect(),
            idx.iter().map(|&i| self.weights[i]).collect(),
        )
    }
}

/// One point per pixel with mass above `threshold`, at the pixel center.
pub fn to_pointcloud(d: &GridDensity, threshold: f64) -> Result<PointCloud> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid("threshold must be nonnegative"));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for j in 0..d.height() {
        for i in 0..d.width() {
            let m = d.at(i, j);
            if m > threshold {
                points.push(d.pixel_center(i, j));
                weights.push(m);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySupport { threshold });
    }
    let c = PointCloud::new(points, weights)?;
    debug_assert!((c.total_weight() - 1.0).abs() < MASS_TOLERANCE * 10.0);
    Ok(c)
}
