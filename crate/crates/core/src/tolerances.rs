//! Numerical thresholds shared across the crate.

/// A pivot is treated as zero when its magnitude falls below this fraction of
/// the largest entry of the matrix being factored.
pub const PIVOT_RELATIVE: f64 = 1e-12;

/// Matrices whose largest entry is below this are treated as exactly zero.
pub const ZERO_MATRIX: f64 = 1e-14;

/// Allowed deviation of a vector norm from one.
pub const UNIT_NORM: f64 = 1e-9;

/// Smallest unit-phase real part accepted for a determinant that must be
/// real and positive.
pub const DETERMINANT_PHASE: f64 = 1e-6;

/// Objective gain (bits/s/Hz) between sweeps below which AO stops.
pub const AO_GAIN: f64 = 1e-4;

/// Sweep cap for the alternating optimization.
pub const AO_MAX_SWEEPS: usize = 50;

/// Slack on the active-power budget.
pub const POWER_BUDGET: f64 = 1e-9;

/// Relative width at which the water-level bisection stops.
pub const WATER_LEVEL: f64 = 1e-12;

/// Relative magnitude of an eigenvalue below which it is treated as zero.
pub const DEGENERATE_EIGENVALUE: f64 = 1e-12;

/// Largest exhaustive search space, counted in objective evaluations.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;
