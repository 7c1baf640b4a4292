//! Discrete probability measures on pixel grids and as weighted point clouds.

mod cloud;
mod grid;
mod mnist;
mod raster;
mod shape;

pub use cloud::{to_pointcloud, PointCloud};
pub use grid::{list_density_stems, GridDensity, GridFrame, MASS_TOLERANCE};
pub use mnist::load_mnist_idx;
pub use raster::{padded_frame, rasterize, rasterize_all, DEFAULT_SUPERSAMPLE};
pub use shape::{apply_transform, ShapeKind, ShapeSpec, TransformSpec, GAUSSIAN_TRUNCATION};
