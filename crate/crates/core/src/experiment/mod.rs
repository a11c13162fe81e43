//! Monte-Carlo sweeps over channel realizations, schemes and one swept
//! parameter.

mod config;
mod output;

use std::path::PathBuf;

use log::{debug, warn};
use thiserror::Error;

use crate::channel::{synthesize, ChannelError, ChannelPair};
use crate::linalg::LinalgError;
use crate::optimizer::{
    exhaustive_search, random_phase_baseline, solve_dynamic, solve_fixed, OptimizerError,
    SolveReport,
};
use crate::power::{energy_efficiency, power_dynamic, power_fixed, power_ris, PowerError};
use crate::stream::{Purpose, TrialKey};
use crate::surface::{active_power, spectral_efficiency, SurfaceConfig};

pub use config::{
    preset, ExperimentSpec, ScenarioConfig, Scheme, SweepVariable, DEFAULT_SEED, DEFAULT_TRIALS,
    FAST_TRIALS, FIGURES,
};
pub use output::{format_sig, read_csv, write_csv, write_manifest, Manifest, CSV_HEADER};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error("trial {trial} at {variable} = {value} stayed degenerate after {attempts} draws")]
    ResampleLimit {
        trial: usize,
        variable: SweepVariable,
        value: f64,
        attempts: u64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: malformed row: {message}")]
    Parse { path: PathBuf, message: String },
}

/// Redraws allowed per realization before the sweep is abandoned.
pub const MAX_RESAMPLES: u64 = 16;

/// Outcome of one scheme on one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scheme: Scheme,
    pub sweep_value: f64,
    pub trial: usize,
    pub se: f64,
    pub power_w: f64,
    pub ee: f64,
    pub active_count: usize,
    pub converged: bool,
    /// Redraws needed before the realization was usable.
    pub resamples: u64,
}

/// Per-(scheme, sweep value) averages in CSV column order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub sweep_variable: SweepVariable,
    pub sweep_value: f64,
    pub mean_se_bpshz: f64,
    pub mean_power_w: f64,
    pub mean_ee_bpj: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub figure_id: String,
    pub rows: Vec<SweepRow>,
    /// Ordered by sweep value, trial, then scheme in `ExperimentSpec::schemes` order.
    pub records: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn row(&self, scheme: Scheme, sweep_value: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.sweep_value == sweep_value)
    }

    pub fn records_for(
        &self,
        scheme: Scheme,
        sweep_value: f64,
    ) -> impl Iterator<Item = &TrialRecord> {
        self.records
            .iter()
            .filter(move |r| r.scheme == scheme && r.sweep_value == sweep_value)
    }

    pub fn total_resamples(&self) -> u64 {
        let mut seen = std::collections::BTreeSet::new();
        self.records
            .iter()
            .filter(|r| seen.insert((r.sweep_value.to_bits(), r.trial)))
            .map(|r| r.resamples)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Trials spread over the rayon pool; sequential without the `parallel`
    /// feature.
    #[default]
    Parallel,
}

/// The channel a scheme operates on and its surface configuration.
fn scheme_setup(
    scheme: Scheme,
    s: &ScenarioConfig,
    full: &ChannelPair,
) -> (ChannelPair, SurfaceConfig) {
    let pa = s.p_a_max();
    let b = s.phase_bits;
    match scheme {
        Scheme::AoRis | Scheme::RandomRis => (full.clone(), SurfaceConfig::ris(s.n, b)),
        Scheme::FixedHr | Scheme::ExhaustiveFixed => {
            (full.clone(), SurfaceConfig::fixed(s.n, s.k, pa, b))
        }
        Scheme::DynamicHr | Scheme::ExhaustiveDynamic => {
            (full.clone(), SurfaceConfig::dynamic(s.n, s.k, pa, b))
        }
        Scheme::RelayK => (full.truncate(s.k), SurfaceConfig::relay(s.k, pa, b)),
        Scheme::RisK => (full.truncate(s.k), SurfaceConfig::ris(s.k, b)),
    }
}

fn solve(
    scheme: Scheme,
    ch: &ChannelPair,
    s: &ScenarioConfig,
    cfg: &SurfaceConfig,
    key: TrialKey,
) -> Result<SolveReport, OptimizerError> {
    let params = s.system();
    let mut init = key.rng(Purpose::SolverInit);
    match scheme {
        Scheme::AoRis | Scheme::FixedHr | Scheme::RelayK | Scheme::RisK => {
            solve_fixed(ch, &params, cfg, &mut init)
        }
        Scheme::DynamicHr => solve_dynamic(ch, &params, cfg, &mut init),
        Scheme::RandomRis => {
            random_phase_baseline(ch, &params, cfg, &mut key.rng(Purpose::RandomPhases))
        }
        Scheme::ExhaustiveFixed | Scheme::ExhaustiveDynamic => exhaustive_search(ch, &params, cfg),
    }
}

fn evaluate(
    scheme: Scheme,
    s: &ScenarioConfig,
    full: &ChannelPair,
    key: TrialKey,
) -> Result<(f64, f64, usize, bool), ExperimentError> {
    let (ch, cfg) = scheme_setup(scheme, s, full);
    let params = s.system();
    let report = solve(scheme, &ch, s, &cfg, key)?;
    let state = &report.final_state;
    let se = spectral_efficiency(state, &ch, &params).map_err(OptimizerError::from)?;
    let p_a = active_power(state, &ch, &params);
    let active = state.active_count();
    let breakdown = match scheme {
        Scheme::AoRis | Scheme::RandomRis | Scheme::RisK => {
            power_ris(s.n_t, cfg.n, params.p_bs, &s.power)
        }
        Scheme::FixedHr | Scheme::ExhaustiveFixed | Scheme::RelayK => {
            power_fixed(s.n_t, cfg.k, cfg.n - cfg.k, params.p_bs, p_a, &s.power)
        }
        Scheme::DynamicHr | Scheme::ExhaustiveDynamic => {
            power_dynamic(s.n_t, cfg.n, active, params.p_bs, p_a, &s.power)
        }
    };
    Ok((se, breakdown.total, active, report.converged))
}

fn is_degenerate(e: &ExperimentError) -> bool {
    matches!(
        e,
        ExperimentError::Optimizer(OptimizerError::Linalg(
            LinalgError::SingularMatrix { .. } | LinalgError::NonPositiveDeterminant { .. }
        ))
    )
}

/// Every scheme on one realization, redrawing the channel if any scheme hits
/// a degenerate matrix so all schemes stay paired.
fn run_work_item(
    spec: &ExperimentSpec,
    value: f64,
    trial: usize,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    let scenario = spec.sweep_variable.apply(&spec.scenario, value)?;
    let mut key = TrialKey::new(spec.seed, trial as u64);
    'draw: loop {
        let channels = synthesize(
            &scenario.geometry(),
            &scenario.fading(),
            &scenario.arrays(),
            key,
        )?;
        let mut records = Vec::with_capacity(spec.schemes.len());
        for &scheme in &spec.schemes {
            match evaluate(scheme, &scenario, &channels, key) {
                Ok((se, power_w, active_count, converged)) => {
                    if !converged {
                        debug!(
                            "{scheme} hit the sweep cap on trial {trial} at {} = {value}",
                            spec.sweep_variable
                        );
                    }
                    records.push(TrialRecord {
                        scheme,
                        sweep_value: value,
                        trial,
                        se,
                        power_w,
                        ee: energy_efficiency(se, power_w, &scenario.power)?,
                        active_count,
                        converged,
                        resamples: key.attempt,
                    })
                }
                Err(e) if is_degenerate(&e) => {
                    warn!(
                        "degenerate realization (trial {trial}, attempt {}): {e}",
                        key.attempt
                    );
                    key = key.resample();
                    if key.attempt >= MAX_RESAMPLES {
                        return Err(ExperimentError::ResampleLimit {
                            trial,
                            variable: spec.sweep_variable,
                            value,
                            attempts: key.attempt,
                        });
                    }
                    continue 'draw;
                }
                Err(e) => return Err(e),
            }
        }
        return Ok(records);
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<SweepResult, ExperimentError> {
    run_experiment_with(spec, Execution::default())
}

pub fn run_experiment_with(
    spec: &ExperimentSpec,
    execution: Execution,
) -> Result<SweepResult, ExperimentError> {
    spec.validate()?;
    let items: Vec<(f64, usize)> = spec
        .sweep_values
        .iter()
        .flat_map(|&v| (0..spec.trials).map(move |t| (v, t)))
        .collect();
    let per_item: Vec<Result<Vec<TrialRecord>, ExperimentError>> = match execution {
        Execution::Sequential => items
            .iter()
            .map(|&(v, t)| run_work_item(spec, v, t))
            .collect(),
        Execution::Parallel => run_parallel(spec, &items),
    };
    let mut records = Vec::with_capacity(items.len() * spec.schemes.len());
    for r in per_item {
        records.extend(r?);
    }
    Ok(aggregate(spec, records))
}

#[cfg(feature = "parallel")]
fn run_parallel(
    spec: &ExperimentSpec,
    items: &[(f64, usize)],
) -> Vec<Result<Vec<TrialRecord>, ExperimentError>> {
    use rayon::prelude::*;
    items
        .par_iter()
        .map(|&(v, t)| run_work_item(spec, v, t))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_parallel(
    spec: &ExperimentSpec,
    items: &[(f64, usize)],
) -> Vec<Result<Vec<TrialRecord>, ExperimentError>> {
    items
        .iter()
        .map(|&(v, t)| run_work_item(spec, v, t))
        .collect()
}

/// Means in trial order, so the sums do not depend on scheduling.
fn aggregate(spec: &ExperimentSpec, records: Vec<TrialRecord>) -> SweepResult {
    let mut rows = Vec::new();
    for &scheme in &spec.schemes {
        for &value in &spec.sweep_values {
            let mut n = 0usize;
            let (mut se, mut p, mut ee) = (0.0, 0.0, 0.0);
            for r in records
                .iter()
                .filter(|r| r.scheme == scheme && r.sweep_value == value)
            {
                n += 1;
                se += r.se;
                p += r.power_w;
                ee += r.ee;
            }
            let m = n.max(1) as f64;
            rows.push(SweepRow {
                scheme,
                sweep_variable: spec.sweep_variable,
                sweep_value: value,
                mean_se_bpshz: se / m,
                mean_power_w: p / m,
                mean_ee_bpj: ee / m,
                trials: n,
                seed: spec.seed,
            });
        }
    }
    SweepResult {
        figure_id: spec.figure_id.clone(),
        rows,
        records,
    }
}
