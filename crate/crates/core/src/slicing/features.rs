use std::path::Path;

use serde::{Deserialize, Serialize};

use super::partition::CellPartition;
use crate::error::{Error, Result};
use crate::measures::GridDensity;

/// Which cell center represents a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Center of mass of the cell.
    MassCenter,
    /// Center of the cell's area, restricted to the density's support.
    GeomCenter,
}

/// Cell centers of a partition, ordered by address.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub addresses: Vec<String>,
    pub masses: Vec<f64>,
    pub mass_centers: Vec<[f64; 2]>,
    pub geom_centers: Vec<[f64; 2]>,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.addresses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addresses.is_empty()
    }

    pub fn centers(&self, kind: FeatureKind) -> &[[f64; 2]] {
        match kind {
            FeatureKind::MassCenter => &self.mass_centers,
            FeatureKind::GeomCenter => &self.geom_centers,
        }
    }

    /// Mass-weighted mean of the mass centers.
    pub fn mean(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        let mut total = 0.0;
        for (c, w) in self.mass_centers.iter().zip(&self.masses) {
            m[0] += w * c[0];
            m[1] += w * c[1];
            total += w;
        }
        [m[0] / total, m[1] / total]
    }

    /// Centers flattened into one row, each scaled by `cells^(-1/2)`, so the
    /// Euclidean distance between two rows equals the uniform-weight `p = 2`
    /// no-collision distance.
    pub fn flat_row(&self, kind: FeatureKind) -> Vec<f64> {
        let s = (self.len() as f64).sqrt().recip();
        self.centers(kind).iter().flat_map(|c| [s * c[0], s * c[1]]).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["address", "mass", "xm_x", "xm_y", "xg_x", "xg_y"])?;
        for k in 0..self.len() {
            let m = self.mass_centers[k];
            let g = self.geom_centers[k];
            w.write_record([
                self.addresses[k].clone(),
                format!("{:e}", self.masses[k]),
                format!("{:e}", m[0]),
                format!("{:e}", m[1]),
                format!("{:e}", g[0]),
                format!("{:e}", g[1]),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<FeatureSet> {
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header != ["address", "mass", "xm_x", "xm_y", "xg_x", "xg_y"] {
            return Err(Error::parse(path, format!("unexpected header {header:?}")));
        }
        let mut f = FeatureSet {
            addresses: vec![],
            masses: vec![],
            mass_centers: vec![],
            geom_centers: vec![],
        };
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::parse(path, format!("bad number in row {}", line + 1)))
            };
            f.addresses.push(rec.get(0).unwrap_or_default().to_owned());
            f.masses.push(num(1)?);
            f.mass_centers.push([num(2)?, num(3)?]);
            f.geom_centers.push([num(4)?, num(5)?]);
        }
        Ok(f)
    }
}

/// Mass and geometric centers of every cell, in physical coordinates.
pub fn features(d: &GridDensity, part: &CellPartition) -> Result<FeatureSet> {
    if part.dims() != (d.width(), d.height()) {
        return Err(Error::DimensionMismatch(format!(
            "partition of a {:?} grid applied to a {}x{} density",
            part.dims(),
            d.width(),
            d.height()
        )));
    }
    let [ox, oy] = d.origin();
    let h = d.spacing();
    let to_phys = |c: [f64; 2]| [ox + c[0] * h, oy + c[1] * h];
    let n = part.cells().len();
    let mut out = FeatureSet {
        addresses: Vec::with_capacity(n),
        masses: Vec::with_capacity(n),
        mass_centers: Vec::with_capacity(n),
        geom_centers: Vec::with_capacity(n),
    };
    for cell in part.cells() {
        let mut m = [0.0; 3];
        let mut g = [0.0; 3];
        for p in &cell.pieces {
            let c = p.center();
            let area = p.area();
            let mass = p.rho * area;
            m[0] += mass * c[0];
            m[1] += mass * c[1];
            m[2] += mass;
            g[0] += area * c[0];
            g[1] += area * c[1];
            g[2] += area;
        }
        out.addresses.push(cell.address());
        out.masses.push(cell.mass());
        out.mass_centers.push(to_phys([m[0] / m[2], m[1] / m[2]]));
        out.geom_centers.push(to_phys([g[0] / g[2], g[1] / g[2]]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{rasterize, GridFrame, ShapeSpec};
    use crate::slicing::{partition, SlicingSchedule};

    fn disk(n: usize, c: [f64; 2]) -> GridDensity {
        let f = GridFrame::square(n, -2.0, 2.0).unwrap();
        rasterize(&ShapeSpec::disk(c, 1.0).unwrap(), f, 4).unwrap()
    }

    fn feats(d: &GridDensity, n: usize) -> FeatureSet {
        features(d, &partition(d, &SlicingSchedule::new(n)).unwrap()).unwrap()
    }

    #[test]
    fn uniform_square_centers() {
        let f = GridFrame::new(4, 4, [0.0, 0.0], 1.0).unwrap();
        let d = GridDensity::from_weights(f, vec![1.0; 16]).unwrap();
        let fs = feats(&d, 2);
        assert_eq!(fs.mass_centers, vec![[1.0, 1.0], [1.0, 3.0], [3.0, 1.0], [3.0, 3.0]]);
        assert_eq!(fs.geom_centers, fs.mass_centers);
    }

    #[test]
    fn disk_single_cell_center() {
        let d = disk(128, [0.0, 0.0]);
        let fs = feats(&d, 0);
        assert_eq!(fs.addresses, vec![String::new()]);
        let h = d.spacing();
        assert!(fs.mass_centers[0][0].abs() < h && fs.mass_centers[0][1].abs() < h);
    }

    #[test]
    fn weighted_mean_matches_global_mean() {
        let d = disk(64, [0.3, -0.1]);
        for n in 0..6 {
            let fs = feats(&d, n);
            let (a, b) = (fs.mean(), d.mean());
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn integer_shift_moves_features_exactly() {
        let d = disk(128, [0.0, 0.0]);
        let s = d.shift_pixels(7, -3).unwrap();
        let h = d.spacing();
        let (a, b) = (feats(&d, 4), feats(&s, 4));
        for k in 0..a.len() {
            for (ca, cb) in [(a.mass_centers[k], b.mass_centers[k]), (a.geom_centers[k], b.geom_centers[k])] {
                assert!((cb[0] - ca[0] - 7.0 * h).abs() < 1e-12);
                assert!((cb[1] - ca[1] + 3.0 * h).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = disk(64, [0.0, 0.0]);
        let b = disk(32, [0.0, 0.0]);
        let p = partition(&a, &SlicingSchedule::new(1)).unwrap();
        assert!(features(&b, &p).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let fs = feats(&disk(32, [0.1, 0.2]), 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        fs.write_csv(&path).unwrap();
        assert_eq!(FeatureSet::read_csv(&path).unwrap(), fs);
    }
}
