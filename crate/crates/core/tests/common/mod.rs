#![allow(dead_code)]

use hrris::channel::{complex_gaussian, ChannelPair};
use hrris::linalg::ComplexMatrix;
use hrris::surface::{CoefficientState, SystemParams};
use rand::Rng;

/// Gaussian channels with per-link gains spread over several decades so both
/// noise- and signal-dominated regimes show up.
pub fn random_channels(rng: &mut impl Rng, n: usize, n_t: usize, n_r: usize) -> ChannelPair {
    let gt = 10f64.powf(rng.random_range(-1.5..0.5));
    let gr = 10f64.powf(rng.random_range(-1.5..0.5));
    ChannelPair::new(
        ComplexMatrix::from_fn(n, n_t, |_, _| complex_gaussian(rng) * gt),
        ComplexMatrix::from_fn(n_r, n, |_, _| complex_gaussian(rng) * gr),
    )
    .unwrap()
}

pub fn random_params(rng: &mut impl Rng) -> SystemParams {
    SystemParams {
        p_bs: 10f64.powf(rng.random_range(-1.0..1.0)),
        sigma2: 10f64.powf(rng.random_range(-1.5..0.0)),
    }
}

pub fn random_dims(rng: &mut impl Rng) -> (usize, usize, usize) {
    (
        rng.random_range(1..10),
        rng.random_range(1..5),
        rng.random_range(1..4),
    )
}

/// Random phases, each element active with probability `p_active` and a
/// random amplitude in `[0, 4)`.
pub fn random_state(rng: &mut impl Rng, n: usize, p_active: f64) -> CoefficientState {
    let mut s = CoefficientState::passive(n);
    for i in 0..n {
        s.set_phase(i, rng.random_range(0.0..std::f64::consts::TAU));
        if rng.random_bool(p_active) {
            s.activate(i, rng.random_range(0.0..4.0)).unwrap();
        }
    }
    s
}

fn sum_log(gains: &[f64], p: &[f64]) -> f64 {
    gains.iter().zip(p).map(|(g, p)| (1.0 + g * p).log2()).sum()
}

/// Brute-force maximum of `Σ log₂(1 + g_i p_i)` over `{p ≥ 0, Σp = budget}`:
/// a uniform simplex grid, then repeated finer grids centred on the best
/// point so far. On each grid one coordinate is implied by the budget; the
/// refinements imply the currently largest one so the others can move
/// freely around the optimum.
pub fn grid_sum_log(gains: &[f64], budget: f64) -> (f64, Vec<f64>) {
    let d = gains.len();
    assert!(d >= 1);
    if d == 1 || budget == 0.0 {
        let mut p = vec![0.0; d];
        p[0] = budget;
        return (sum_log(gains, &p), p);
    }
    let free = d - 1;
    let mut best_p = vec![budget / d as f64; d];
    let mut best = sum_log(gains, &best_p);

    let visit = |implied: usize,
                 center: &[f64],
                 half: f64,
                 per_axis: usize,
                 best: &mut f64,
                 best_p: &mut Vec<f64>| {
        let others: Vec<usize> = (0..d).filter(|&i| i != implied).collect();
        let mid = (per_axis / 2) as f64;
        let step = half / mid;
        let mut idx = vec![0usize; free];
        let mut p = vec![0.0; d];
        loop {
            let mut rest = budget;
            let mut ok = true;
            for (j, &i) in others.iter().enumerate() {
                let v = center[i] + step * (idx[j] as f64 - mid);
                if v < 0.0 {
                    ok = false;
                    break;
                }
                p[i] = v;
                rest -= v;
            }
            if ok && rest >= 0.0 {
                p[implied] = rest;
                let val = sum_log(gains, &p);
                if val > *best {
                    *best = val;
                    best_p.copy_from_slice(&p);
                }
            }
            let mut j = 0;
            while j < free {
                idx[j] += 1;
                if idx[j] < per_axis {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == free {
                break;
            }
        }
    };

    // coarse pass over the whole simplex
    let per_axis = ((1_000_000f64).powf(1.0 / free as f64).floor() as usize).max(3) | 1;
    visit(
        0,
        &vec![budget / 2.0; d],
        budget / 2.0,
        per_axis,
        &mut best,
        &mut best_p,
    );
    let mut half = 2.0 * budget / (per_axis - 1) as f64;
    let per_axis = ((200_000f64).powf(1.0 / free as f64).floor() as usize).max(5) | 1;
    while half > 1e-13 * budget {
        let implied = (0..d)
            .max_by(|&a, &b| best_p[a].total_cmp(&best_p[b]))
            .unwrap();
        let center = best_p.clone();
        visit(implied, &center, half, per_axis, &mut best, &mut best_p);
        half *= 4.0 / (per_axis - 1) as f64;
    }
    (best, best_p)
}
