//! Uniformity measures for point sets in the unit cube.
//!
//! * [`warnock_l2_squared`] evaluates the squared L2 star discrepancy in
//!   closed form in `O(N^2 d)`.
//! * [`star_discrepancy`] computes the exact star discrepancy by enumerating
//!   the critical grid.
//! * [`local_discrepancy_field`] samples the signed local discrepancy of a
//!   2-D set on a regular grid.
//! * [`hickernell_p2`] sums squared L2 discrepancies over coordinate
//!   projections, exhaustively, over random draws, or over an explicit list.

mod hickernell;
mod local;
mod star;
mod warnock;

use serde::{Deserialize, Serialize};

pub use hickernell::{
    enumerate_projections, hickernell_p2, hickernell_squared, projection_count, sample_projections,
    ProjectionMode, ProjectionSpec, EXHAUSTIVE_MAX_DIM,
};
pub use local::{field_to_csv, local_discrepancy_field};
pub use star::{
    local_discrepancy_at, star_discrepancy, star_discrepancy_with_budget, star_lower_bound, BoxSide,
    StarDiscrepancy, DEFAULT_STAR_BUDGET,
};
pub use warnock::{l2_discrepancy, warnock_l2_squared};

use crate::ProjectionIndexSet;

/// Which quantity a [`DiscrepancyReport`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Star,
    L2,
    L2Squared,
    HickernellP2,
    HickernellRandom,
}

/// Result of a discrepancy evaluation, serialized as
/// `{"measure": ..., "value": ..., "witness": [...]|null, "subsets": [[...]]|null}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub measure: Measure,
    pub value: f64,
    /// Upper corner of the anchored box attaining a star discrepancy.
    pub witness: Option<Vec<f64>>,
    pub subsets: Option<Vec<ProjectionIndexSet>>,
    /// Absent (true) for exact values; false for sampled lower bounds.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub exact: bool,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl DiscrepancyReport {
    pub fn scalar(measure: Measure, value: f64) -> Self {
        Self { measure, value, witness: None, subsets: None, exact: true }
    }
}
