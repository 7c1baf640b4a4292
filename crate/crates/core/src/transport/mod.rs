//! Exact and linearized optimal transport, plus closed-form distance oracles.

mod analytic;
mod exact;
mod lot;
mod plan;
mod simplex;

pub use analytic::{
    analytic_lot_rotation, analytic_rotation, analytic_w2_dilation, analytic_w2_rotation,
    analytic_w2_translation, dilation_matrix, quarter_turns, rhombus_witness, rotation_matrix,
    second_moments, shape_second_moments, translation_matrix, OracleKind, RotationOracleParams,
};
pub use exact::{exact_w2, exact_w2_with, ExactOptions, SolveStats};
pub use lot::{
    default_reference, gaussian_reference, lot_distance_matrix, lot_embed, lot_embed_clouds, LotEmbedding,
    DEFAULT_REFERENCE_VARIANCE,
};
pub use plan::{TransportPlan, MARGINAL_TOLERANCE};

use crate::error::Result;
use crate::measures::PointCloud;
use crate::DistanceMatrix;

/// Pairwise exact W2 distances, solved in parallel over pairs.
pub fn exact_w2_matrix(clouds: &[PointCloud]) -> Result<DistanceMatrix> {
    DistanceMatrix::from_fn(clouds.len(), |i, j| exact_w2(&clouds[i], &clouds[j]).map(|r| r.0))
}
