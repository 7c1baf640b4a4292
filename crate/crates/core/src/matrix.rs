use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Tolerance on symmetry and on the diagonal of a distance matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A dense symmetric nonnegative matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates a row-major `size x size` matrix.
    pub fn new(size: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {size}x{size} matrix",
                data.len()
            )));
        }
        let m = DistanceMatrix { size, data };
        m.validate()?;
        Ok(m)
    }

    /// Builds the matrix from a pairwise function evaluated on `i < j`, in parallel.
    pub fn from_fn<F>(size: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let pairs: Vec<(usize, usize)> = (0..size)
            .flat_map(|i| (i + 1..size).map(move |j| (i, j)))
            .collect();
        let vals: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| f(i, j))
            .collect::<Result<_>>()?;
        let mut data = vec![0.0; size * size];
        for (&(i, j), v) in pairs.iter().zip(vals) {
            data[i * size + j] = v;
            data[j * size + i] = v;
        }
        DistanceMatrix::new(size, data)
    }

    /// Pairwise Euclidean distances between rows.
    pub fn euclidean(rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(r) = rows.first() {
            if rows.iter().any(|x| x.len() != r.len()) {
                return Err(Error::DimensionMismatch("rows of unequal length".into()));
            }
        }
        DistanceMatrix::from_fn(rows.len(), |i, j| {
            Ok(rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt())
        })
    }

    pub fn euclidean_2d(points: &[[f64; 2]]) -> Result<Self> {
        DistanceMatrix::from_fn(points.len(), |i, j| {
            Ok((points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]))
        })
    }

    fn validate(&self) -> Result<()> {
        let n = self.size;
        for i in 0..n {
            let d = self.get(i, i);
            if d.abs() > SYMMETRY_TOLERANCE {
                return Err(Error::invalid(format!("nonzero diagonal entry {d} at {i}")));
            }
            for j in 0..n {
                let a = self.get(i, j);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::invalid(format!(
                        "entry ({i}, {j}) = {a} is not a finite nonnegative number"
                    )));
                }
                let b = self.get(j, i);
                if (a - b).abs() > SYMMETRY_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::invalid(format!(
                        "asymmetric entries ({i}, {j}) = {a} and ({j}, {i}) = {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Every entry multiplied by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<DistanceMatrix> {
        if !(factor >= 0.0) || !factor.is_finite() {
            return Err(Error::invalid(format!("bad scale factor {factor}")));
        }
        Ok(DistanceMatrix {
            size: self.size,
            data: self.data.iter().map(|v| v * factor).collect(),
        })
    }

    /// Submatrix on the given indices, in the given order.
    pub fn select(&self, idx: &[usize]) -> Result<DistanceMatrix> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.size) {
            return Err(Error::invalid(format!("index {bad} out of range")));
        }
        let data = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        DistanceMatrix::new(idx.len(), data)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.size, self.size, &self.data)
    }

    /// Largest violation `d(i,k) - d(i,j) - d(j,k)` of the triangle inequality
    /// (zero or negative when it holds).
    pub fn max_triangle_violation(&self) -> f64 {
        let n = self.size;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max(self.get(i, k) - self.get(i, j) - self.get(j, k));
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            worst
        }
    }

    /// Dense CSV with a header row and a leading column of sample indices.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec![String::new()];
        header.extend((0..self.size).map(|i| i.to_string()));
        w.write_record(&header)?;
        for i in 0..self.size {
            let mut rec = vec![i.to_string()];
            rec.extend(self.row(i).iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<DistanceMatrix> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)?;
        let size = r.headers()?.len().saturating_sub(1);
        let mut data = Vec::with_capacity(size * size);
        let mut rows = 0;
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != size + 1 {
                return Err(Error::parse(path, format!("row {line} has {} fields", rec.len())));
            }
            for field in rec.iter().skip(1) {
                data.push(field.trim().parse::<f64>().map_err(|e| {
                    Error::parse(path, format!("row {line}: {e}"))
                })?);
            }
            rows += 1;
        }
        if rows != size {
            return Err(Error::parse(path, format!("{rows} rows for {size} columns")));
        }
        DistanceMatrix::new(size, data).map_err(|e| Error::parse(path, e.to_string()))
    }
}
