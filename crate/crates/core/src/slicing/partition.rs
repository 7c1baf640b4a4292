use std::collections::BTreeMap;

use super::schedule::{Axis, SlicingSchedule, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::measures::GridDensity;

/// Smallest admissible cell mass, relative to the density's total mass.
const MIN_CELL_MASS: f64 = 1e-12;

/// Relative mass tolerance under which a cut is snapped to a piece boundary.
const TIE_TOLERANCE: f64 = 1e-14;

/// A rectangle of one pixel carrying that pixel's uniform density.
///
/// Coordinates are in pixel-index units: pixel `(i, j)` covers
/// `[i, i + 1] x [j, j + 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Piece {
    pub pixel: usize,
    /// `[[x0, x1], [y0, y1]]`
    pub rect: [[f64; 2]; 2],
    /// Mass per unit pixel area.
    pub rho: f64,
}

impl Piece {
    pub fn area(&self) -> f64 {
        (self.rect[0][1] - self.rect[0][0]) * (self.rect[1][1] - self.rect[1][0])
    }

    pub fn mass(&self) -> f64 {
        self.rho * self.area()
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.rect[0][0] + self.rect[0][1]),
            0.5 * (self.rect[1][0] + self.rect[1][1]),
        ]
    }
}

/// One leaf of the partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    bits: u64,
    depth: usize,
    mass: f64,
    pub(crate) pieces: Vec<Piece>,
}

impl Cell {
    /// Binary address: bit `k` (from the left) is 0 for the side `<= h` of the
    /// level-`k` cut and 1 for the side `> h`.
    pub fn address(&self) -> String {
        address_string(self.bits, self.depth)
    }

    /// The address read as a binary number; it orders cells lexicographically.
    pub fn address_bits(&self) -> u64 {
        self.bits
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Fraction of each pixel's area (and mass) that falls in this cell.
    pub fn pixel_fractions(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for p in &self.pieces {
            *out.entry(p.pixel).or_insert(0.0) += p.area();
        }
        out
    }

    /// Number of pixel pieces in the cell.
    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }
}

pub(crate) fn address_string(bits: u64, depth: usize) -> String {
    (0..depth)
        .map(|k| if bits >> (depth - 1 - k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// The `2^N` equal-mass cells of a density under a slicing schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct CellPartition {
    width: usize,
    height: usize,
    schedule: SlicingSchedule,
    cells: Vec<Cell>,
}

impl CellPartition {
    /// Cells ordered by address.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn schedule(&self) -> SlicingSchedule {
        self.schedule
    }

    pub fn depth(&self) -> usize {
        self.schedule.depth
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Per-pixel sum of fractions over all cells.
    pub fn fraction_sums(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for c in &self.cells {
            for (px, f) in c.pixel_fractions() {
                *out.entry(px).or_insert(0.0) += f;
            }
        }
        out
    }
}

/// Splits `d` into `2^N` cells of equal mass.
///
/// Pixels are treated as squares of uniform density, so the pixel straddling a
/// median is divided into two rectangles carrying exactly the missing mass.
/// When the cumulative mass reaches one half exactly on a pixel boundary, the
/// cut is placed on that boundary.
pub fn partition(d: &GridDensity, sched: &SlicingSchedule) -> Result<CellPartition> {
    if sched.depth > MAX_DEPTH {
        return Err(Error::invalid(format!(
            "slicing depth {} exceeds the maximum {MAX_DEPTH}",
            sched.depth
        )));
    }
    let total = d.total_mass();
    if !(total > 0.0) {
        return Err(Error::invalid("density has zero total mass"));
    }
    let w = d.width();
    let pieces: Vec<Piece> = d
        .mass()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(k, &m)| {
            let (i, j) = ((k % w) as f64, (k / w) as f64);
            Piece {
                pixel: k,
                rect: [[i, i + 1.0], [j, j + 1.0]],
                rho: m,
            }
        })
        .collect();
    let mut cells = vec![Cell {
        bits: 0,
        depth: 0,
        mass: pieces.iter().map(Piece::mass).sum(),
        pieces,
    }];

    for level in 0..sched.depth {
        let axis = sched.axis_at(level);
        let mut next = Vec::with_capacity(cells.len() * 2);
        for cell in cells {
            if cell.mass < MIN_CELL_MASS * total {
                return Err(Error::invalid(format!(
                    "cell {} at level {level} has negligible mass",
                    cell.address()
                )));
            }
            let first = cell.pieces[0].pixel;
            if cell.pieces.iter().all(|p| p.pixel == first) {
                return Err(Error::PartitionTooDeep {
                    address: cell.address(),
                    level,
                });
            }
            let (lo, hi) = split_cell(&cell, axis);
            next.push(lo);
            next.push(hi);
        }
        cells = next;
    }

    Ok(CellPartition {
        width: d.width(),
        height: d.height(),
        schedule: *sched,
        cells,
    })
}

fn split_cell(cell: &Cell, axis: Axis) -> (Cell, Cell) {
    let c = axis.coordinate();
    let h = median(&cell.pieces, c, 0.5 * cell.mass);
    let mut left = Vec::new();
    let mut right = Vec::new();
    for p in &cell.pieces {
        let [lo, hi] = p.rect[c];
        if hi <= h {
            left.push(*p);
        } else if lo >= h {
            right.push(*p);
        } else {
            let mut a = *p;
            let mut b = *p;
            a.rect[c][1] = h;
            b.rect[c][0] = h;
            left.push(a);
            right.push(b);
        }
    }
    let make = |pieces: Vec<Piece>, bit: u64| Cell {
        bits: cell.bits << 1 | bit,
        depth: cell.depth + 1,
        mass: pieces.iter().map(Piece::mass).sum(),
        pieces,
    };
    (make(left, 0), make(right, 1))
}

/// Smallest `h` with `mass{x_c <= h} >= half`.
fn median(pieces: &[Piece], c: usize, half: f64) -> f64 {
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * pieces.len());
    for p in pieces {
        let [lo, hi] = p.rect[c];
        let rate = p.mass() / (hi - lo);
        events.push((lo, rate));
        events.push((hi, -rate));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let tol = TIE_TOLERANCE * half;
    let mut acc = 0.0;
    let mut slope = 0.0;
    let mut cur = events[0].0;
    let mut k = 0;
    while k < events.len() {
        let pos = events[k].0;
        let reached = acc + slope * (pos - cur);
        if reached >= half - tol {
            if (reached - half).abs() <= tol {
                return pos;
            }
            let h = cur + (half - acc) / slope;
            return h.clamp(cur, pos);
        }
        acc = reached;
        cur = pos;
        while k < events.len() && events[k].0 == pos {
            slope += events[k].1;
            k += 1;
        }
        slope = slope.max(0.0);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{rasterize, GridFrame, ShapeSpec};

    fn uniform(n: usize) -> GridDensity {
        GridDensity::from_weights(GridFrame::new(n, n, [0.0, 0.0], 1.0).unwrap(), vec![1.0; n * n])
            .unwrap()
    }

    #[test]
    fn uniform_quadrants() {
        let d = uniform(4);
        let p = partition(&d, &SlicingSchedule::new(2)).unwrap();
        let addrs: Vec<_> = p.cells().iter().map(Cell::address).collect();
        assert_eq!(addrs, ["00", "01", "10", "11"]);
        for c in p.cells() {
            assert!((c.mass() - 0.25).abs() < 1e-15);
            assert_eq!(c.piece_count(), 4);
            assert!(c.pixel_fractions().values().all(|&f| f == 1.0));
        }
        // "00": left half then bottom half
        let px: Vec<_> = p.cells()[0].pixel_fractions().keys().copied().collect();
        assert_eq!(px, [0, 1, 4, 5]);
        let px: Vec<_> = p.cells()[1].pixel_fractions().keys().copied().collect();
        assert_eq!(px, [8, 9, 12, 13]);
    }

    #[test]
    fn fractional_median_pixel() {
        // Three equal columns: the median splits the middle column in half.
        let f = GridFrame::new(3, 1, [0.0, 0.0], 1.0).unwrap();
        let d = GridDensity::from_weights(f, vec![1.0, 1.0, 1.0]).unwrap();
        let p = partition(&d, &SlicingSchedule::new(1)).unwrap();
        let left = p.cells()[0].pixel_fractions();
        assert_eq!(left.len(), 2);
        assert!((left[&1] - 0.5).abs() < 1e-15);
        for c in p.cells() {
            assert!((c.mass() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn tie_on_boundary_splits_no_pixel() {
        let f = GridFrame::new(4, 1, [0.0, 0.0], 1.0).unwrap();
        let d = GridDensity::from_weights(f, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let p = partition(&d, &SlicingSchedule::new(1)).unwrap();
        assert_eq!(p.cells()[0].pixel_fractions().into_iter().collect::<Vec<_>>(), [(0, 1.0)]);
        assert_eq!(p.cells()[1].pixel_fractions().into_iter().collect::<Vec<_>>(), [(3, 1.0)]);
    }

    #[test]
    fn disk_cells_equal_mass_and_fractions_sum() {
        let f = GridFrame::square(128, -2.0, 2.0).unwrap();
        let d = rasterize(&ShapeSpec::disk([0.0, 0.0], 1.0).unwrap(), f, 4).unwrap();
        for n in 0..=6 {
            let p = partition(&d, &SlicingSchedule::new(n)).unwrap();
            assert_eq!(p.cells().len(), 1 << n);
            for c in p.cells() {
                assert!((c.mass() - 1.0 / (1 << n) as f64).abs() < 1e-9);
            }
            for (px, s) in p.fraction_sums() {
                assert!((s - 1.0).abs() < 1e-12, "pixel {px}: {s}");
            }
        }
    }

    #[test]
    fn single_pixel_cannot_be_halved() {
        let f = GridFrame::new(4, 4, [0.0, 0.0], 1.0).unwrap();
        let d = GridDensity::point_mass(f, 2, 1).unwrap();
        assert!(partition(&d, &SlicingSchedule::new(0)).is_ok());
        let err = partition(&d, &SlicingSchedule::new(1)).unwrap_err();
        assert!(matches!(err, Error::PartitionTooDeep { level: 0, .. }));
        let f = GridFrame::new(2, 1, [0.0, 0.0], 1.0).unwrap();
        let d = GridDensity::from_weights(f, vec![1.0, 1.0]).unwrap();
        assert!(partition(&d, &SlicingSchedule::new(1)).is_ok());
        assert!(matches!(
            partition(&d, &SlicingSchedule::new(2)),
            Err(Error::PartitionTooDeep { level: 1, .. })
        ));
    }

    #[test]
    fn address_strings() {
        assert_eq!(address_string(0b101, 3), "101");
        assert_eq!(address_string(1, 4), "0001");
        assert_eq!(address_string(0, 0), "");
    }
}
