//! Coefficient optimization for hybrid relay-reflecting surfaces.
//!
//! The fixed architecture and the conventional-RIS / relay baselines share
//! one alternating-optimization loop ([`solve_fixed`]); the dynamic
//! architecture runs that loop with every element passive, then picks and
//! powers its active elements by water-filling ([`solve_dynamic`]).

mod ao;
mod baselines;
mod dynamic;
mod terms;

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::surface::{CoefficientState, SurfaceError};

pub use ao::{initial_state, solve_fixed, update_element, ElementUpdate};
pub use baselines::{exhaustive_search, random_phase_baseline};
pub use dynamic::{
    rank_active_candidates, rank_by_merit, solve_dynamic, solve_dynamic_with, waterfill,
    DynamicOptions, WaterfillCandidate, WaterfillResult,
};
pub use terms::{
    all_element_terms, bound_from_terms, element_terms, g_n, g_n_determinant, PerElementTerms,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("other active elements already use {used} W of the {budget} W budget")]
    PowerExhausted { used: f64, budget: f64 },
    #[error("exhaustive search needs {0} evaluations")]
    SearchSpaceTooLarge(u128),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub final_state: CoefficientState,
    /// Rate bound after initialization followed by its value after each sweep.
    pub objective_trace: Vec<f64>,
    pub sweeps: usize,
    /// False when the sweep cap was reached first.
    pub converged: bool,
    /// Dynamic mode only: the water-filled configuration lost rate against
    /// the all-passive one and was discarded.
    pub reverted_to_passive: bool,
}

impl SolveReport {
    pub fn active_count(&self) -> usize {
        self.final_state.active_count()
    }
}
