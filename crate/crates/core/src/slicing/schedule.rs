use serde::{Deserialize, Serialize};

/// Orientation of a cut line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// A vertical line `x = h`; splits the x coordinate.
    Vertical,
    /// A horizontal line `y = h`; splits the y coordinate.
    Horizontal,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::Vertical => Axis::Horizontal,
            Axis::Horizontal => Axis::Vertical,
        }
    }

    /// Index of the coordinate compared against the cut position.
    pub fn coordinate(self) -> usize {
        match self {
            Axis::Vertical => 0,
            Axis::Horizontal => 1,
        }
    }
}

/// Breadth-first schedule of `depth` levels of axis-aligned cuts.
///
/// Every cell of level `k` is cut along the same axis; axes alternate from
/// level to level, starting with `first_axis`. The schedule yields `2^depth`
/// leaf cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlicingSchedule {
    pub depth: usize,
    pub first_axis: Axis,
}

/// Deepest supported schedule; addresses are stored in a `u64`.
pub const MAX_DEPTH: usize = 24;

impl SlicingSchedule {
    /// `depth` levels starting with a vertical cut.
    pub fn new(depth: usize) -> Self {
        SlicingSchedule {
            depth,
            first_axis: Axis::Vertical,
        }
    }

    pub fn with_first_axis(mut self, axis: Axis) -> Self {
        self.first_axis = axis;
        self
    }

    /// Axis used at level `k` (0-based).
    pub fn axis_at(&self, k: usize) -> Axis {
        if k.is_multiple_of(2) {
            self.first_axis
        } else {
            self.first_axis.other()
        }
    }

    pub fn cell_count(&self) -> usize {
        1 << self.depth
    }
}

impl Default for SlicingSchedule {
    fn default() -> Self {
        SlicingSchedule::new(2)
    }
}
