//! Dynamic architecture: passive AO, then activation by merit ratio and
//! water-filled amplitudes.

use rand::Rng;

use super::ao::{check_dimensions, initial_state, run_sweeps};
use super::terms::{all_element_terms, PerElementTerms};
use super::{OptimizerError, SolveReport};
use crate::channel::ChannelPair;
use crate::surface::{spectral_efficiency, SurfaceConfig, SurfaceMode, SystemParams};
use crate::tolerances;

/// Orders `ratios` descending; equal ratios keep ascending index order.
pub fn rank_by_merit(ratios: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ratios.len()).collect();
    idx.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]).then(a.cmp(&b)));
    idx
}

/// Element indices by `ζ_n/ξ_n`, best first.
pub fn rank_active_candidates(terms: &[PerElementTerms]) -> Vec<usize> {
    let ratios: Vec<f64> = terms.iter().map(|t| t.zeta_n / t.xi_n).collect();
    rank_by_merit(&ratios)
        .into_iter()
        .map(|i| terms[i].index)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterfillCandidate {
    pub index: usize,
    pub zeta: f64,
    pub xi: f64,
}

impl WaterfillCandidate {
    fn floor(&self) -> f64 {
        self.xi / self.zeta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillResult {
    /// `(element index, p_n)` in candidate order.
    pub allocations: Vec<(usize, f64)>,
    /// `1/μ`
    pub water_level: f64,
    /// `μ`; infinite when there is nothing to allocate.
    pub mu: f64,
}

impl WaterfillResult {
    pub fn total(&self) -> f64 {
        self.allocations.iter().map(|a| a.1).sum()
    }

    pub fn power_of(&self, index: usize) -> Option<f64> {
        self.allocations.iter().find(|a| a.0 == index).map(|a| a.1)
    }
}

/// Maximizes `Σ log₂(1 + ζ_n p_n/ξ_n)` subject to `Σ p_n ≤ budget`.
///
/// The water level is bracketed by bisection on the spent-power residual and
/// then solved exactly on the resulting set of powered candidates.
pub fn waterfill(
    candidates: &[WaterfillCandidate],
    budget: f64,
) -> Result<WaterfillResult, OptimizerError> {
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(OptimizerError::InvalidConfig(format!(
            "water-filling budget {budget}"
        )));
    }
    if let Some(c) = candidates
        .iter()
        .find(|c| !(c.zeta > 0.0 && c.xi > 0.0 && c.floor().is_finite()))
    {
        return Err(OptimizerError::InvalidConfig(format!(
            "candidate {} has ζ = {}, ξ = {}",
            c.index, c.zeta, c.xi
        )));
    }
    if candidates.is_empty() {
        return Ok(WaterfillResult {
            allocations: Vec::new(),
            water_level: 0.0,
            mu: f64::INFINITY,
        });
    }
    let spent = |level: f64| {
        candidates
            .iter()
            .map(|c| (level - c.floor()).max(0.0))
            .sum::<f64>()
    };
    let lowest = candidates
        .iter()
        .map(|c| c.floor())
        .fold(f64::INFINITY, f64::min);

    let mut lo = lowest;
    let mut hi = lowest + budget;
    while hi - lo > tolerances::WATER_LEVEL * hi.max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if spent(mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // `hi` never undershoots the level, so its powered set can only be too
    // large; drop floors that the exact level does not clear
    let mut floors: Vec<f64> = candidates
        .iter()
        .map(|c| c.floor())
        .filter(|&f| f < hi)
        .collect();
    floors.sort_by(f64::total_cmp);
    let mut level = lowest;
    while !floors.is_empty() {
        let exact = (budget + floors.iter().sum::<f64>()) / floors.len() as f64;
        if exact > floors[floors.len() - 1] {
            level = exact;
            break;
        }
        floors.pop();
    }
    let allocations = candidates
        .iter()
        .map(|c| (c.index, (level - c.floor()).max(0.0)))
        .collect();
    Ok(WaterfillResult {
        allocations,
        water_level: level,
        mu: 1.0 / level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DynamicOptions {
    /// Water-fill again over the remaining candidates whenever elements are
    /// left with amplitude at most one.
    pub reallocate_clipped: bool,
    /// Fall back to the all-passive state if activation lowers the rate.
    pub dominance_guard: bool,
}

impl Default for DynamicOptions {
    fn default() -> Self {
        Self {
            reallocate_clipped: false,
            dominance_guard: true,
        }
    }
}

pub fn solve_dynamic(
    channels: &ChannelPair,
    params: &SystemParams,
    cfg: &SurfaceConfig,
    rng: &mut impl Rng,
) -> Result<SolveReport, OptimizerError> {
    solve_dynamic_with(channels, params, cfg, DynamicOptions::default(), rng)
}

pub fn solve_dynamic_with(
    channels: &ChannelPair,
    params: &SystemParams,
    cfg: &SurfaceConfig,
    options: DynamicOptions,
    rng: &mut impl Rng,
) -> Result<SolveReport, OptimizerError> {
    check_dimensions(cfg, channels)?;
    if cfg.mode != SurfaceMode::DynamicHr {
        return Err(OptimizerError::InvalidConfig(format!(
            "{:?} is not the dynamic architecture",
            cfg.mode
        )));
    }
    let passive_cfg = SurfaceConfig {
        mode: SurfaceMode::Ris,
        k: 0,
        active_set: None,
        ..cfg.clone()
    };
    let start = initial_state(&passive_cfg, channels, params, rng)?;
    let mut report = run_sweeps(start, channels, params, &passive_cfg)?;
    if cfg.k == 0 || cfg.p_a_max == 0.0 {
        return Ok(report);
    }
    let passive = report.final_state.clone();

    let terms = all_element_terms(&passive, channels, params)?;
    let mut candidates: Vec<WaterfillCandidate> = rank_active_candidates(&terms)
        .into_iter()
        .filter(|&n| terms[n].zeta_n > 0.0)
        .take(cfg.k)
        .map(|n| WaterfillCandidate {
            index: n,
            zeta: terms[n].zeta_n,
            xi: terms[n].xi_n,
        })
        .collect();

    let mut powered = Vec::new();
    loop {
        let wf = waterfill(&candidates, cfg.p_a_max)?;
        powered.clear();
        for (c, &(n, p)) in candidates.iter().zip(&wf.allocations) {
            let a2 = p / c.xi;
            if a2 > 1.0 {
                powered.push((n, a2.sqrt()));
            }
        }
        if !options.reallocate_clipped || powered.len() == candidates.len() || powered.is_empty() {
            break;
        }
        candidates.retain(|c| powered.iter().any(|&(n, _)| n == c.index));
    }

    let mut state = passive.clone();
    for &(n, amplitude) in &powered {
        state.activate(n, amplitude)?;
    }
    if options.dominance_guard && !powered.is_empty() {
        let with = spectral_efficiency(&state, channels, params)?;
        let without = spectral_efficiency(&passive, channels, params)?;
        if with < without {
            report.reverted_to_passive = true;
            return Ok(report);
        }
    }
    report.final_state = state;
    Ok(report)
}
