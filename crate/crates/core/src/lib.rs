//! Simulation of MIMO links aided by hybrid relay-reflecting intelligent
//! surfaces: channel synthesis, coefficient optimization for the fixed and
//! dynamic architectures and their baselines, power consumption models, and
//! a Monte-Carlo experiment harness.

pub mod channel;
pub mod experiment;
pub mod linalg;
pub mod optimizer;
pub mod power;
pub mod stream;
pub mod surface;
pub mod tolerances;
