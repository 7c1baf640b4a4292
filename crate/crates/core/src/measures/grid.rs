use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a normalized density.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A nonnegative, unit-mass field on a regular square-pixel grid.
///
/// Pixel `(i, j)` is column `i` (x direction) and row `j` (y direction, counted
/// upward from `origin`). Its center sits at
/// `origin + ((i + 0.5) * spacing, (j + 0.5) * spacing)` and its mass is stored
/// at `mass[j * width + i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    width: usize,
    height: usize,
    origin: [f64; 2],
    spacing: f64,
    mass: Vec<f64>,
}

/// Geometry of a grid without its mass, as written to the JSON sidecar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    pub width: usize,
    pub height: usize,
    pub origin: [f64; 2],
    pub spacing: f64,
}

impl GridFrame {
    pub fn new(width: usize, height: usize, origin: [f64; 2], spacing: f64) -> Result<Self> {
        let frame = GridFrame {
            width,
            height,
            origin,
            spacing,
        };
        frame.validate()?;
        Ok(frame)
    }

    /// Square `n x n` frame whose physical extent is `[lo, hi]` on both axes.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::invalid(format!("empty frame extent [{lo}, {hi}]")));
        }
        GridFrame::new(n, n, [lo, lo], (hi - lo) / n as f64)
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("grid width and height must be at least 1"));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::invalid(format!(
                "grid spacing must be positive, got {}",
                self.spacing
            )));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("grid origin must be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.spacing,
            self.origin[1] + (j as f64 + 0.5) * self.spacing,
        ]
    }

    /// Upper-right corner of the frame.
    pub fn far_corner(&self) -> [f64; 2] {
        [
            self.origin[0] + self.width as f64 * self.spacing,
            self.origin[1] + self.height as f64 * self.spacing,
        ]
    }
}

impl GridDensity {
    /// Builds a density from raw nonnegative weights, normalizing them to unit mass.
    pub fn from_weights(frame: GridFrame, weights: Vec<f64>) -> Result<Self> {
        frame.validate()?;
        if weights.len() != frame.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for a {}x{} grid",
                weights.len(),
                frame.width,
                frame.height
            )));
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::invalid(format!(
                "pixel weights must be finite and nonnegative, found {bad}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("density has zero total mass"));
        }
        let mass = weights.into_iter().map(|w| w / total).collect();
        Ok(GridDensity {
            width: frame.width,
            height: frame.height,
            origin: frame.origin,
            spacing: frame.spacing,
            mass,
        })
    }

    /// A density with all of its mass on pixel `(i, j)`.
    pub fn point_mass(frame: GridFrame, i: usize, j: usize) -> Result<Self> {
        if i >= frame.width || j >= frame.height {
            return Err(Error::invalid(format!("pixel ({i}, {j}) outside grid")));
        }
        let mut w = vec![0.0; frame.len()];
        w[j * frame.width + i] = 1.0;
        GridDensity::from_weights(frame, w)
    }

    pub fn frame(&self) -> GridFrame {
        GridFrame {
            width: self.width,
            height: self.height,
            origin: self.origin,
            spacing: self.spacing,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.mass[j * self.width + i]
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> [f64; 2] {
        self.frame().pixel_center(i, j)
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn same_grid(&self, other: &GridDensity) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.origin == other.origin
            && self.spacing == other.spacing
    }

    /// Center of mass in physical coordinates.
    pub fn mean(&self) -> [f64; 2] {
        let mut acc = [0.0; 2];
        for j in 0..self.height {
            for i in 0..self.width {
                let m = self.at(i, j);
                if m > 0.0 {
                    let c = self.pixel_center(i, j);
                    acc[0] += m * c[0];
                    acc[1] += m * c[1];
                }
            }
        }
        acc
    }

    /// Raw second moments `E[x^2], E[y^2]` about the physical origin, treating
    /// each pixel's mass as spread uniformly over its square.
    pub fn raw_second_moments(&self) -> [f64; 2] {
        let cell = self.spacing * self.spacing / 12.0;
        let mut acc = [0.0; 2];
        for j in 0..self.height {
            for i in 0..self.width {
                let m = self.at(i, j);
                if m > 0.0 {
                    let c = self.pixel_center(i, j);
                    acc[0] += m * (c[0] * c[0] + cell);
                    acc[1] += m * (c[1] * c[1] + cell);
                }
            }
        }
        acc
    }

    /// Number of pixels with strictly positive mass.
    pub fn support_size(&self) -> usize {
        self.mass.iter().filter(|m| **m > 0.0).count()
    }

    /// Shifts the mass array by whole pixels, keeping the frame fixed.
    ///
    /// Fails if any positive mass would leave the grid.
    pub fn shift_pixels(&self, di: isize, dj: isize) -> Result<GridDensity> {
        let mut out = vec![0.0; self.mass.len()];
        for j in 0..self.height {
            for i in 0..self.width {
                let m = self.at(i, j);
                if m == 0.0 {
                    continue;
                }
                let ni = i as isize + di;
                let nj = j as isize + dj;
                if ni < 0 || nj < 0 || ni >= self.width as isize || nj >= self.height as isize {
                    return Err(Error::invalid(format!(
                        "shift ({di}, {dj}) moves mass off the grid"
                    )));
                }
                out[nj as usize * self.width + ni as usize] = m;
            }
        }
        Ok(GridDensity {
            mass: out,
            ..self.clone()
        })
    }

    /// Euclidean distance between the two mass arrays ("pixel features").
    pub fn pixel_distance(&self, other: &GridDensity) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{} grids",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Writes `<stem>.csv` (height rows of width values, row `j` on line `j`)
    /// and the `<stem>.json` frame sidecar.
    pub fn write(&self, stem: &Path) -> Result<()> {
        let csv_path = stem.with_extension("csv");
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&csv_path)?;
        for j in 0..self.height {
            let row = &self.mass[j * self.width..(j + 1) * self.width];
            wtr.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        wtr.flush().map_err(|e| Error::io(&csv_path, e))?;
        let json_path = stem.with_extension("json");
        let sidecar = serde_json::to_string_pretty(&self.frame())?;
        fs::write(&json_path, sidecar).map_err(|e| Error::io(&json_path, e))
    }

    /// Reads a density written by [`GridDensity::write`]; the stem may carry
    /// either extension or none.
    pub fn read(stem: &Path) -> Result<GridDensity> {
        let json_path = stem.with_extension("json");
        let csv_path = stem.with_extension("csv");
        let text = fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
        let frame: GridFrame = serde_json::from_str(&text)
            .map_err(|e| Error::parse(&json_path, e.to_string()))?;
        frame.validate()?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(&csv_path)?;
        let mut weights = Vec::with_capacity(frame.len());
        let mut rows = 0;
        for record in rdr.records() {
            let record = record?;
            if record.len() != frame.width {
                return Err(Error::parse(
                    &csv_path,
                    format!("row {rows} has {} columns, expected {}", record.len(), frame.width),
                ));
            }
            for field in record.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(&csv_path, format!("bad number {field:?}")))?;
                weights.push(v);
            }
            rows += 1;
        }
        if rows != frame.height {
            return Err(Error::parse(
                &csv_path,
                format!("{rows} rows, expected {}", frame.height),
            ));
        }
        GridDensity::from_weights(frame, weights)
    }
}

/// Lists the density stems (`*.json` sidecars with a matching `.csv`) in a
/// directory, sorted by file name.
pub fn list_density_stems(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut stems = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") && path.with_extension("csv").exists() {
            stems.push(path.with_extension(""));
        }
    }
    stems.sort();
    Ok(stems)
}
