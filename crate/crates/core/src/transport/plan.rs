use std::path::Path;

use crate::error::{Error, Result};
use crate::measures::PointCloud;

/// Tolerance on the marginals of a returned plan.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// A sparse coupling between a source and a target cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    pub sources: usize,
    pub targets: usize,
    /// `(i, j, mass)` triples with positive mass.
    pub entries: Vec<(usize, usize, f64)>,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.sources];
        for &(i, _, m) in &self.entries {
            r[i] += m;
        }
        r
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.targets];
        for &(_, j, m) in &self.entries {
            c[j] += m;
        }
        c
    }

    /// Largest deviation of the plan's marginals from the clouds' weights.
    pub fn marginal_error(&self, a: &PointCloud, b: &PointCloud) -> f64 {
        if a.len() != self.sources || b.len() != self.targets {
            return f64::INFINITY;
        }
        let dr = self
            .row_sums()
            .iter()
            .zip(a.weights())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let dc = self
            .col_sums()
            .iter()
            .zip(b.weights())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        dr.max(dc)
    }

    pub fn check_marginals(&self, a: &PointCloud, b: &PointCloud) -> Result<()> {
        if self.entries.iter().any(|e| !(e.2 >= 0.0)) {
            return Err(Error::Solver("plan has a negative or NaN entry".into()));
        }
        let err = self.marginal_error(a, b);
        if err > MARGINAL_TOLERANCE {
            return Err(Error::Solver(format!("plan marginals off by {err:e}")));
        }
        Ok(())
    }

    /// `sum pi_ij |x_i - y_j|^2`
    pub fn squared_cost(&self, a: &PointCloud, b: &PointCloud) -> f64 {
        let (pa, pb) = (a.points(), b.points());
        self.entries
            .iter()
            .map(|&(i, j, m)| {
                let dx = pa[i][0] - pb[j][0];
                let dy = pa[i][1] - pb[j][1];
                m * (dx * dx + dy * dy)
            })
            .sum()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["i", "j", "mass"])?;
        for &(i, j, m) in &self.entries {
            w.write_record([i.to_string(), j.to_string(), format!("{m:e}")])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads triples; the point counts are taken as one past the largest indices.
    pub fn read_csv(path: &Path) -> Result<TransportPlan> {
        let mut r = csv::Reader::from_path(path)?;
        let mut entries = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = || Error::parse(path, format!("bad triple in row {}", line + 1));
            let i = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let j = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let m = rec.get(2).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            entries.push((i, j, m));
        }
        Ok(TransportPlan {
            sources: entries.iter().map(|e| e.0 + 1).max().unwrap_or(0),
            targets: entries.iter().map(|e| e.1 + 1).max().unwrap_or(0),
            entries,
        })
    }
}
