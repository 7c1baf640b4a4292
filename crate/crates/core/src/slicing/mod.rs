//! Equal-mass recursive partitions, no-collision features and distances.
//!
//! A density is cut at the median of one coordinate, then each half is cut at
//! its own median along the other coordinate, and so on for `N` levels. Two
//! densities sliced with the same schedule have cells that correspond by
//! address; comparing the cell centers gives the no-collision distance.

mod distance;
mod features;
mod partition;
mod schedule;

pub use distance::{
    feature_sets, features_distance_matrix, nc_distance, nc_distance_matrix, Weighting,
};
pub use features::{features, FeatureKind, FeatureSet};
pub use partition::{partition, Cell, CellPartition};
pub use schedule::{Axis, SlicingSchedule, MAX_DEPTH};
