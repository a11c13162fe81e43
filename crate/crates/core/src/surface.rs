//! Surface coefficient state and the link quantities evaluated on it:
//! noise covariance, exact spectral efficiency, its upper bound, and the
//! transmit power drawn by the active elements.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::channel::ChannelPair;
use crate::linalg::{logdet, ComplexMatrix, LinalgError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("element {0} is passive; its amplitude is fixed to one")]
    PassiveAmplitude(usize),
    #[error("invalid amplitude {1} for element {0}")]
    InvalidAmplitude(usize, f64),
    #[error("element index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("invalid surface configuration: {0}")]
    InvalidConfig(String),
}

/// How the surface elements are operated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceMode {
    /// All elements passive.
    Ris,
    /// A fixed set of `K` active elements.
    FixedHr,
    /// Up to `K` active elements chosen per realization.
    DynamicHr,
    /// Every element active (`N = K`).
    Relay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfig {
    pub n: usize,
    pub k: usize,
    pub mode: SurfaceMode,
    /// Zero-based active positions for [`SurfaceMode::FixedHr`]; `None`
    /// selects the first `k` elements.
    pub active_set: Option<Vec<usize>>,
    /// Active-element power budget, watts.
    pub p_a_max: f64,
    /// Phase resolution in bits; 0 means continuous phases.
    pub phase_bits: u32,
}

impl SurfaceConfig {
    pub fn ris(n: usize, phase_bits: u32) -> Self {
        Self {
            n,
            k: 0,
            mode: SurfaceMode::Ris,
            active_set: None,
            p_a_max: 0.0,
            phase_bits,
        }
    }

    pub fn fixed(n: usize, k: usize, p_a_max: f64, phase_bits: u32) -> Self {
        Self {
            n,
            k,
            mode: SurfaceMode::FixedHr,
            active_set: None,
            p_a_max,
            phase_bits,
        }
    }

    pub fn dynamic(n: usize, k: usize, p_a_max: f64, phase_bits: u32) -> Self {
        Self {
            mode: SurfaceMode::DynamicHr,
            ..Self::fixed(n, k, p_a_max, phase_bits)
        }
    }

    pub fn relay(k: usize, p_a_max: f64, phase_bits: u32) -> Self {
        Self {
            mode: SurfaceMode::Relay,
            ..Self::fixed(k, k, p_a_max, phase_bits)
        }
    }

    /// Active set the solver starts from.
    pub fn initial_active_set(&self) -> Vec<usize> {
        match self.mode {
            SurfaceMode::Ris | SurfaceMode::DynamicHr => Vec::new(),
            SurfaceMode::Relay => (0..self.n).collect(),
            SurfaceMode::FixedHr => self
                .active_set
                .clone()
                .unwrap_or_else(|| (0..self.k).collect()),
        }
    }

    pub fn validate(&self) -> Result<(), SurfaceError> {
        let bad = |m: String| Err(SurfaceError::InvalidConfig(m));
        if self.n == 0 {
            return bad("surface needs at least one element".into());
        }
        if !(self.p_a_max >= 0.0 && self.p_a_max.is_finite()) {
            return bad(format!("p_a_max = {}", self.p_a_max));
        }
        if self.phase_bits > 16 {
            return bad(format!("{} phase bits", self.phase_bits));
        }
        if self.k > self.n {
            return bad(format!("K = {} exceeds N = {}", self.k, self.n));
        }
        match self.mode {
            SurfaceMode::Relay if self.k != self.n => {
                bad("a relay has every element active".into())
            }
            SurfaceMode::FixedHr => {
                let set = self.initial_active_set();
                let mut sorted = set.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != set.len()
                    || set.len() != self.k
                    || set.iter().any(|&i| i >= self.n)
                {
                    return bad(format!(
                        "active set {set:?} is not {} distinct elements of {}",
                        self.k, self.n
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// BS transmit power and receiver noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Watts per transmit antenna (`E[xxᴴ] = P_BS·I`).
    pub p_bs: f64,
    /// Noise power at the surface and at the MS, watts.
    pub sigma2: f64,
}

impl SystemParams {
    pub fn rho(&self) -> f64 {
        self.p_bs / self.sigma2
    }

    /// `ξ_n = σ² + P_BS‖t_n‖²`, the power an active element spends per unit
    /// squared gain.
    pub fn xi(&self, channels: &ChannelPair, n: usize) -> f64 {
        let t2: f64 = channels.h_t.row(n).iter().map(|z| z.norm_sqr()).sum();
        self.sigma2 + self.p_bs * t2
    }
}

/// Per-element amplitudes and phases plus the active set.
///
/// Passive elements always have unit amplitude; the setters enforce it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    active: Vec<bool>,
}

impl CoefficientState {
    /// All elements passive with zero phase.
    pub fn passive(n: usize) -> Self {
        Self {
            amplitudes: vec![1.0; n],
            phases: vec![0.0; n],
            active: vec![false; n],
        }
    }

    /// Unit amplitudes with the given elements marked active.
    pub fn with_active_set(n: usize, active: &[usize]) -> Result<Self, SurfaceError> {
        let mut s = Self::passive(n);
        for &i in active {
            if i >= n {
                return Err(SurfaceError::IndexOutOfRange(i));
            }
            s.active[i] = true;
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn amplitude(&self, n: usize) -> f64 {
        self.amplitudes[n]
    }

    pub fn phase(&self, n: usize) -> f64 {
        self.phases[n]
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn is_active(&self, n: usize) -> bool {
        self.active[n]
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.active[i]).collect()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// `α_n = |α_n|·e^{jθ_n}`
    pub fn coefficient(&self, n: usize) -> C64 {
        C64::from_polar(self.amplitudes[n], self.phases[n])
    }

    pub fn coefficients(&self) -> Vec<C64> {
        (0..self.len()).map(|n| self.coefficient(n)).collect()
    }

    /// Stores `theta` reduced to `[0, 2π)`.
    pub fn set_phase(&mut self, n: usize, theta: f64) {
        self.phases[n] = wrap_phase(theta);
    }

    pub fn set_amplitude(&mut self, n: usize, amplitude: f64) -> Result<(), SurfaceError> {
        if n >= self.len() {
            return Err(SurfaceError::IndexOutOfRange(n));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(SurfaceError::InvalidAmplitude(n, amplitude));
        }
        if !self.active[n] && amplitude != 1.0 {
            return Err(SurfaceError::PassiveAmplitude(n));
        }
        self.amplitudes[n] = amplitude;
        Ok(())
    }

    pub fn activate(&mut self, n: usize, amplitude: f64) -> Result<(), SurfaceError> {
        if n >= self.len() {
            return Err(SurfaceError::IndexOutOfRange(n));
        }
        self.active[n] = true;
        self.set_amplitude(n, amplitude)
    }

    /// Turns element `n` into a passive reflector with unit amplitude.
    pub fn deactivate(&mut self, n: usize) {
        self.active[n] = false;
        self.amplitudes[n] = 1.0;
    }

    /// `Υ = diag(α)`
    pub fn upsilon(&self) -> ComplexMatrix {
        ComplexMatrix::diag(&self.coefficients())
    }

    /// Passive part `Φ` of `Υ`.
    pub fn phi(&self) -> ComplexMatrix {
        let d: Vec<C64> = (0..self.len())
            .map(|n| {
                if self.active[n] {
                    C64::new(0.0, 0.0)
                } else {
                    self.coefficient(n)
                }
            })
            .collect();
        ComplexMatrix::diag(&d)
    }

    /// Active part `Ψ` of `Υ`.
    pub fn psi(&self) -> ComplexMatrix {
        let d: Vec<C64> = (0..self.len())
            .map(|n| {
                if self.active[n] {
                    self.coefficient(n)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        ComplexMatrix::diag(&d)
    }
}

pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// `R = I + H_rΨΨᴴH_rᴴ`
pub fn noise_covariance(state: &CoefficientState, h_r: &ComplexMatrix) -> ComplexMatrix {
    let mut r = ComplexMatrix::identity(h_r.rows());
    for n in state.active_indices() {
        let rn = h_r.column(n);
        let a2 = state.amplitude(n).powi(2);
        r.add_outer(C64::new(a2, 0.0), &rn, &rn);
    }
    // exact Hermitian symmetry
    (&r + &r.adjoint()).scale_real(0.5)
}

/// `H_rΥH_t`, the cascaded `N_r × N_t` channel.
pub fn cascaded_channel(state: &CoefficientState, channels: &ChannelPair) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(channels.n_r(), channels.n_t());
    for n in 0..state.len() {
        g.add_outer(state.coefficient(n), &channels.r(n), &channels.t(n));
    }
    g
}

fn signal_plus_noise(
    state: &CoefficientState,
    channels: &ChannelPair,
    params: &SystemParams,
) -> (ComplexMatrix, ComplexMatrix) {
    let r = noise_covariance(state, &channels.h_r);
    let s = cascaded_channel(state, channels)
        .gram()
        .scale_real(params.rho());
    let total = &r + &s;
    (r, total)
}

/// Exact spectral efficiency `f₀ = log₂|R + ρGGᴴ| − log₂|R|`, bits/s/Hz.
pub fn spectral_efficiency(
    state: &CoefficientState,
    channels: &ChannelPair,
    params: &SystemParams,
) -> Result<f64, LinalgError> {
    let (r, total) = signal_plus_noise(state, channels, params);
    Ok((logdet(&total)? - logdet(&r)?).max(0.0))
}

/// Upper bound `f = log₂|R + ρGGᴴ|`, equal to `f₀` with no active elements.
pub fn se_upper_bound(
    state: &CoefficientState,
    channels: &ChannelPair,
    params: &SystemParams,
) -> Result<f64, LinalgError> {
    let (_, total) = signal_plus_noise(state, channels, params);
    logdet(&total)
}

/// Transmit power of the active elements, `Σ_{n∈A} |α_n|²ξ_n`, watts.
pub fn active_power(
    state: &CoefficientState,
    channels: &ChannelPair,
    params: &SystemParams,
) -> f64 {
    state
        .active_indices()
        .into_iter()
        .map(|n| state.amplitude(n).powi(2) * params.xi(channels, n))
        .sum()
}

/// Nearest point of `{2πq/2^b}` in circular distance; ties go to the smaller
/// grid value. `bits = 0` leaves `theta` unchanged.
pub fn quantize_phase(theta: f64, bits: u32) -> f64 {
    if bits == 0 {
        return theta;
    }
    let q = 1u64 << bits;
    let step = TAU / q as f64;
    let w = wrap_phase(theta);
    let lo = ((w / step).floor() as u64).min(q - 1);
    let hi = (lo + 1) % q;
    let d_lo = w - lo as f64 * step;
    let d_hi = (lo + 1) as f64 * step - w;
    let pick = if d_lo < d_hi {
        lo
    } else if d_hi < d_lo {
        hi
    } else {
        lo.min(hi)
    };
    pick as f64 * step
}

/// All `2^b` quantized phases, ascending.
pub fn phase_grid(bits: u32) -> Vec<f64> {
    let q = 1u64 << bits;
    (0..q).map(|i| TAU * i as f64 / q as f64).collect()
}
