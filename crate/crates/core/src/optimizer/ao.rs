//! Alternating optimization over the surface coefficients, one element at a
//! time with the others held fixed.

use std::f64::consts::TAU;

use rand::Rng;

use super::terms::{g_n, PerElementTerms, TermBuilder};
use super::{OptimizerError, SolveReport};
use crate::channel::ChannelPair;
use crate::linalg::C64;
use crate::surface::{
    quantize_phase, se_upper_bound, CoefficientState, SurfaceConfig, SurfaceMode, SystemParams,
};
use crate::tolerances;

/// Result of one element update.
#[derive(Debug, Clone)]
pub struct ElementUpdate {
    /// Terms the update was computed from, at the element's new amplitude.
    pub terms: PerElementTerms,
    /// False when the candidate phase would have lowered `g_n` and the old
    /// phase was kept.
    pub accepted: bool,
}

/// Updates element `n` of `state` in place.
pub fn update_element(
    n: usize,
    state: &mut CoefficientState,
    channels: &ChannelPair,
    params: &SystemParams,
    cfg: &SurfaceConfig,
) -> Result<ElementUpdate, OptimizerError> {
    let mut builder = TermBuilder::new(channels, params, state);
    update_cached(n, state, &mut builder, cfg)
}

pub(crate) fn update_cached(
    n: usize,
    state: &mut CoefficientState,
    builder: &mut TermBuilder<'_>,
    cfg: &SurfaceConfig,
) -> Result<ElementUpdate, OptimizerError> {
    let active = state.is_active(n);
    let amplitude = if active {
        let others: f64 = state
            .active_indices()
            .into_iter()
            .filter(|&i| i != n)
            .map(|i| state.amplitude(i).powi(2) * builder.xi(i))
            .sum();
        if others > cfg.p_a_max + tolerances::POWER_BUDGET {
            return Err(OptimizerError::PowerExhausted {
                used: others,
                budget: cfg.p_a_max,
            });
        }
        ((cfg.p_a_max - others).max(0.0) / builder.xi(n)).sqrt()
    } else {
        1.0
    };

    let terms = builder.terms(n, active, amplitude)?;
    let old_phase = state.phase(n);
    let mut accepted = false;
    let mut phase = old_phase;
    if !terms.degenerate {
        let candidate = quantize_phase(-terms.lambda_n.arg(), cfg.phase_bits);
        let g_new = g_n(C64::from_polar(amplitude, candidate), &terms);
        let g_old = g_n(C64::from_polar(amplitude, old_phase), &terms);
        if g_new >= g_old {
            phase = candidate;
            accepted = true;
        }
    }
    if active {
        state.set_amplitude(n, amplitude)?;
    }
    state.set_phase(n, phase);
    builder.set(n, state.coefficient(n), active);
    Ok(ElementUpdate { terms, accepted })
}

/// Random starting point: phases uniform over the phase grid (or `[0, 2π)`
/// for continuous phases) and the active budget split evenly in power.
pub fn initial_state(
    cfg: &SurfaceConfig,
    channels: &ChannelPair,
    params: &SystemParams,
    rng: &mut impl Rng,
) -> Result<CoefficientState, OptimizerError> {
    let active = cfg.initial_active_set();
    let mut state = CoefficientState::with_active_set(cfg.n, &active)?;
    for n in 0..cfg.n {
        let theta = if cfg.phase_bits == 0 {
            rng.random_range(0.0..TAU)
        } else {
            let q = 1u64 << cfg.phase_bits;
            TAU * rng.random_range(0..q) as f64 / q as f64
        };
        state.set_phase(n, theta);
    }
    let k = active.len() as f64;
    for &n in &active {
        state.set_amplitude(n, (cfg.p_a_max / (k * params.xi(channels, n))).sqrt())?;
    }
    Ok(state)
}

pub(crate) fn check_dimensions(
    cfg: &SurfaceConfig,
    channels: &ChannelPair,
) -> Result<(), OptimizerError> {
    cfg.validate()?;
    if cfg.n != channels.n_elements() {
        return Err(OptimizerError::InvalidConfig(format!(
            "surface has {} elements but the channel has {}",
            cfg.n,
            channels.n_elements()
        )));
    }
    Ok(())
}

/// Sweeps every element until the bound gains less than the convergence
/// threshold over a sweep, or the sweep cap is hit.
pub(crate) fn run_sweeps(
    mut state: CoefficientState,
    channels: &ChannelPair,
    params: &SystemParams,
    cfg: &SurfaceConfig,
) -> Result<SolveReport, OptimizerError> {
    let mut builder = TermBuilder::new(channels, params, &state);
    let mut trace = vec![se_upper_bound(&state, channels, params)?];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < tolerances::AO_MAX_SWEEPS {
        for n in 0..state.len() {
            update_cached(n, &mut state, &mut builder, cfg)?;
        }
        builder.refresh(&state);
        sweeps += 1;
        let f = se_upper_bound(&state, channels, params)?;
        let gain = f - trace[trace.len() - 1];
        trace.push(f);
        if gain < tolerances::AO_GAIN {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        final_state: state,
        objective_trace: trace,
        sweeps,
        converged,
        reverted_to_passive: false,
    })
}

/// Fixed active set: conventional RIS (`K = 0`), fixed HR-RIS, or relay.
pub fn solve_fixed(
    channels: &ChannelPair,
    params: &SystemParams,
    cfg: &SurfaceConfig,
    rng: &mut impl Rng,
) -> Result<SolveReport, OptimizerError> {
    check_dimensions(cfg, channels)?;
    if cfg.mode == SurfaceMode::DynamicHr {
        return Err(OptimizerError::InvalidConfig(
            "use solve_dynamic for the dynamic architecture".into(),
        ));
    }
    let state = initial_state(cfg, channels, params, rng)?;
    run_sweeps(state, channels, params, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::linalg::ComplexMatrix;
    use crate::optimizer::g_n_determinant;
    use crate::surface::{active_power, phase_grid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64, n: usize) -> (ChannelPair, SystemParams) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = ChannelPair::new(
            ComplexMatrix::from_fn(n, 3, |_, _| complex_gaussian(&mut rng) * 0.1),
            ComplexMatrix::from_fn(2, n, |_, _| complex_gaussian(&mut rng) * 0.1),
        )
        .unwrap();
        (
            ch,
            SystemParams {
                p_bs: 1.0,
                sigma2: 0.01,
            },
        )
    }

    #[test]
    fn passive_update_keeps_unit_amplitude() {
        let (ch, p) = instance(1, 5);
        let cfg = SurfaceConfig::ris(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = initial_state(&cfg, &ch, &p, &mut rng).unwrap();
        update_element(3, &mut s, &ch, &p, &cfg).unwrap();
        assert_eq!(s.amplitude(3), 1.0);
    }

    #[test]
    fn single_active_element_takes_the_whole_budget() {
        let (ch, p) = instance(3, 5);
        let cfg = SurfaceConfig::fixed(5, 1, 0.5, 0);
        let mut s = CoefficientState::with_active_set(5, &[0]).unwrap();
        update_element(0, &mut s, &ch, &p, &cfg).unwrap();
        let expected = (0.5 / p.xi(&ch, 0)).sqrt();
        assert!((s.amplitude(0) - expected).abs() < 1e-12);
    }

    #[test]
    fn update_beats_every_grid_phase() {
        let (ch, p) = instance(4, 6);
        let cfg = SurfaceConfig::fixed(6, 2, 0.3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = initial_state(&cfg, &ch, &p, &mut rng).unwrap();
        for n in 0..6 {
            let up = update_element(n, &mut s, &ch, &p, &cfg).unwrap();
            let best = g_n_determinant(s.coefficient(n), &up.terms).unwrap();
            for theta in phase_grid(2) {
                let alt =
                    g_n_determinant(C64::from_polar(s.amplitude(n), theta), &up.terms).unwrap();
                assert!(alt <= best + 1e-9, "element {n}: {alt} > {best}");
            }
        }
    }

    #[test]
    fn solve_respects_budget_and_is_monotone() {
        let (ch, p) = instance(6, 8);
        let cfg = SurfaceConfig::fixed(8, 3, 0.2, 0);
        let rep = solve_fixed(&ch, &p, &cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert!(active_power(&rep.final_state, &ch, &p) <= 0.2 + 1e-9);
        for w in rep.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn zero_active_elements_matches_ris() {
        let (ch, p) = instance(8, 7);
        let fixed = solve_fixed(
            &ch,
            &p,
            &SurfaceConfig::fixed(7, 0, 1.0, 2),
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        let ris = solve_fixed(
            &ch,
            &p,
            &SurfaceConfig::ris(7, 2),
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        assert_eq!(fixed.final_state, ris.final_state);
        assert_eq!(fixed.objective_trace, ris.objective_trace);
    }
}
