//! Reference schemes: exhaustive search over quantized phases and random
//! phases.

use std::f64::consts::TAU;

use rand::Rng;

use super::ao::check_dimensions;
use super::{OptimizerError, SolveReport};
use crate::channel::ChannelPair;
use crate::linalg::{ComplexMatrix, C64};
use crate::surface::{
    phase_grid, se_upper_bound, spectral_efficiency, CoefficientState, SurfaceConfig, SurfaceMode,
    SystemParams,
};
use crate::tolerances;

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..k.min(n) {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&l: &usize| l + 1);
            for i in start..n {
                let mut t: Vec<usize> = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Active sets and amplitudes the search ranges over. The budget is split
/// evenly in power across each set; for the dynamic architecture sets that
/// would leave an element at amplitude one or below are skipped.
fn amplitude_patterns(
    cfg: &SurfaceConfig,
    channels: &ChannelPair,
    params: &SystemParams,
) -> Vec<CoefficientState> {
    let sets = match cfg.mode {
        SurfaceMode::DynamicHr => subsets_up_to(cfg.n, cfg.k),
        _ => vec![cfg.initial_active_set()],
    };
    let mut patterns = Vec::new();
    'sets: for set in sets {
        let mut state =
            CoefficientState::with_active_set(cfg.n, &set).expect("indices are in range");
        let share = cfg.p_a_max / set.len().max(1) as f64;
        for &n in &set {
            let a = (share / params.xi(channels, n)).sqrt();
            if cfg.mode == SurfaceMode::DynamicHr && a <= 1.0 {
                continue 'sets;
            }
            state.set_amplitude(n, a).expect("active element");
        }
        patterns.push(state);
    }
    patterns
}

/// Best exact spectral efficiency over every quantized phase tuple and every
/// admissible active set.
pub fn exhaustive_search(
    channels: &ChannelPair,
    params: &SystemParams,
    cfg: &SurfaceConfig,
) -> Result<SolveReport, OptimizerError> {
    check_dimensions(cfg, channels)?;
    if cfg.phase_bits == 0 {
        return Err(OptimizerError::InvalidConfig(
            "exhaustive search needs quantized phases".into(),
        ));
    }
    let q = 1u128 << cfg.phase_bits;
    let patterns = amplitude_patterns(cfg, channels, params);
    let size = q
        .checked_pow(cfg.n as u32)
        .and_then(|t| t.checked_mul(patterns.len() as u128))
        .unwrap_or(u128::MAX);
    if size > tolerances::EXHAUSTIVE_LIMIT as u128 {
        return Err(OptimizerError::SearchSpaceTooLarge(size));
    }

    let grid = phase_grid(cfg.phase_bits);
    let q = grid.len();
    let unit: Vec<C64> = grid.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let outers: Vec<ComplexMatrix> = (0..cfg.n)
        .map(|n| ComplexMatrix::outer(&channels.r(n), &channels.t(n)))
        .collect();

    let mut best: Option<(f64, CoefficientState)> = None;
    let mut digits = vec![0usize; cfg.n];
    for base in &patterns {
        // precompute the amplitude-weighted outer products of this pattern
        let weighted: Vec<ComplexMatrix> = (0..cfg.n)
            .map(|n| outers[n].scale_real(base.amplitude(n)))
            .collect();
        let noise = crate::surface::noise_covariance(base, &channels.h_r);
        let noise_logdet = crate::linalg::logdet(&noise)?;
        digits.iter_mut().for_each(|d| *d = 0);
        loop {
            let mut g = ComplexMatrix::zeros(channels.n_r(), channels.n_t());
            for n in 0..cfg.n {
                g += &weighted[n].scale(unit[digits[n]]);
            }
            let total = &noise + &g.gram().scale_real(params.rho());
            let se = (crate::linalg::logdet(&total)? - noise_logdet).max(0.0);
            if best.as_ref().is_none_or(|b| se > b.0) {
                let mut s = base.clone();
                for (n, &d) in digits.iter().enumerate() {
                    s.set_phase(n, grid[d]);
                }
                best = Some((se, s));
            }
            // odometer
            let mut i = 0;
            while i < cfg.n {
                digits[i] += 1;
                if digits[i] < q {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == cfg.n {
                break;
            }
        }
    }
    let (_, state) =
        best.ok_or_else(|| OptimizerError::InvalidConfig("no admissible configuration".into()))?;
    let f = se_upper_bound(&state, channels, params)?;
    debug_assert!(spectral_efficiency(&state, channels, params)? <= f + 1e-9);
    Ok(SolveReport {
        final_state: state,
        objective_trace: vec![f],
        sweeps: 0,
        converged: true,
        reverted_to_passive: false,
    })
}

/// Conventional RIS with phases drawn uniformly from the phase grid, or from
/// `[0, 2π)` for continuous phases.
pub fn random_phase_baseline(
    channels: &ChannelPair,
    params: &SystemParams,
    cfg: &SurfaceConfig,
    rng: &mut impl Rng,
) -> Result<SolveReport, OptimizerError> {
    check_dimensions(cfg, channels)?;
    let mut state = CoefficientState::passive(cfg.n);
    for n in 0..cfg.n {
        let theta = if cfg.phase_bits == 0 {
            rng.random_range(0.0..TAU)
        } else {
            let q = 1u64 << cfg.phase_bits;
            TAU * rng.random_range(0..q) as f64 / q as f64
        };
        state.set_phase(n, theta);
    }
    let f = se_upper_bound(&state, channels, params)?;
    Ok(SolveReport {
        final_state: state,
        objective_trace: vec![f],
        sweeps: 0,
        converged: true,
        reverted_to_passive: false,
    })
}
