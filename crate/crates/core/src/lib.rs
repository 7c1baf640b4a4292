//! No-collision transportation maps and distances for image-like measures.
//!
//! The crate builds equal-mass recursive partitions of pixel densities, turns
//! them into cell-center features, and compares the resulting distances with
//! exact optimal transport, linearized optimal transport and closed-form
//! Wasserstein formulas. Embedding tools (classical and metric MDS, SVD,
//! Isomap, Procrustes alignment) close the loop from distances to coordinates.
//!
//! ```
//! use nocollide::measures::{apply_transform, rasterize, GridFrame, ShapeSpec, TransformSpec};
//! use nocollide::slicing::{features, nc_distance, partition, FeatureKind, SlicingSchedule, Weighting};
//!
//! let frame = GridFrame::square(64, -2.0, 2.0).unwrap();
//! let disk = ShapeSpec::disk([0.0, 0.0], 1.0).unwrap();
//! let h = frame.spacing;
//! let moved = apply_transform(&disk, &TransformSpec::Translate { theta: [3.0 * h, 4.0 * h] }).unwrap();
//!
//! let sched = SlicingSchedule::new(2);
//! let fa = {
//!     let d = rasterize(&disk, frame, 4).unwrap();
//!     features(&d, &partition(&d, &sched).unwrap()).unwrap()
//! };
//! let fb = {
//!     let d = rasterize(&moved, frame, 4).unwrap();
//!     features(&d, &partition(&d, &sched).unwrap()).unwrap()
//! };
//! let w = nc_distance(&fa, &fb, FeatureKind::MassCenter, 2.0, Weighting::Mass).unwrap();
//! assert!((w - 5.0 * h).abs() < 1e-9);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedding;
pub mod error;
pub mod experiments;
mod matrix;
pub mod measures;
pub mod slicing;
pub mod transport;

pub use error::{Error, Result};
pub use matrix::DistanceMatrix;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/slicing.md")]
    mod slicing {}
    #[doc = include_str!("../../../book/src/transport.md")]
    mod transport {}
    #[doc = include_str!("../../../book/src/embedding.md")]
    mod embedding {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
