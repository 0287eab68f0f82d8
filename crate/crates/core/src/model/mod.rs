//! Contact matrices, their generators, and one round of spread plus
//! classification.

mod ledger;
mod matrix;
mod network;

pub use ledger::{classify, Death, HealthLedger, HealthState, Transitions};
pub use matrix::ContactMatrix;
pub use network::{
    generate, generate_community_matrix, generate_contact_matrix, CommunitySpec, DiseaseProfile,
    NetworkSpec, SpreadKind,
};

use crate::Result;

/// One spreading step, `x_next = A x`.
pub fn propagate(matrix: &ContactMatrix, x: &[f64]) -> Result<Vec<f64>> {
    matrix.propagate(x)
}

pub fn max_row_sum(matrix: &ContactMatrix) -> f64 {
    matrix.max_row_sum()
}
