//! Total power consumption of the BS plus surface, and energy efficiency.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerError {
    #[error("power must be positive, got {0} W")]
    NonPositivePower(f64),
    #[error("invalid power model: {0}")]
    InvalidParams(String),
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> Result<f64, PowerError> {
    if watts > 0.0 {
        Ok(10.0 * watts.log10() + 30.0)
    } else {
        Err(PowerError::NonPositivePower(watts))
    }
}

/// Hardware power figures, watts unless noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModelParams {
    /// BS amplifier efficiency.
    pub tau_bs: f64,
    /// Active-element amplifier efficiency.
    pub tau_a: f64,
    /// Per BS antenna.
    pub p_bs_dynamic: f64,
    pub p_bs_static: f64,
    /// Per active element.
    pub p_a_dynamic: f64,
    pub p_a_static: f64,
    /// Per passive element.
    pub p_passive: f64,
    /// Per element switch of the dynamic architecture.
    pub p_switch: f64,
    pub bandwidth_hz: f64,
}

impl Default for PowerModelParams {
    fn default() -> Self {
        Self {
            tau_bs: 0.5,
            tau_a: 0.5,
            p_bs_dynamic: dbm_to_watts(40.0),
            p_bs_static: dbm_to_watts(35.0),
            p_a_dynamic: dbm_to_watts(35.0),
            p_a_static: dbm_to_watts(30.0),
            p_passive: 5e-3,
            p_switch: 5e-3,
            bandwidth_hz: 10e6,
        }
    }
}

impl PowerModelParams {
    pub fn validate(&self) -> Result<(), PowerError> {
        for (name, tau) in [("tau_bs", self.tau_bs), ("tau_a", self.tau_a)] {
            if !(tau > 0.0 && tau <= 1.0) {
                return Err(PowerError::InvalidParams(format!(
                    "{name} = {tau} is outside (0, 1]"
                )));
            }
        }
        let powers = [
            ("p_bs_dynamic", self.p_bs_dynamic),
            ("p_bs_static", self.p_bs_static),
            ("p_a_dynamic", self.p_a_dynamic),
            ("p_a_static", self.p_a_static),
            ("p_passive", self.p_passive),
            ("p_switch", self.p_switch),
        ];
        for (name, p) in powers {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(PowerError::InvalidParams(format!("{name} = {p}")));
            }
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(PowerError::InvalidParams(format!(
                "bandwidth {} Hz",
                self.bandwidth_hz
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PowerComponent {
    BsAmplifier,
    SurfaceAmplifier,
    Circuit,
    PassiveElements,
    Switches,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerBreakdown {
    pub total: f64,
    pub components: BTreeMap<PowerComponent, f64>,
}

impl PowerBreakdown {
    fn from_components(components: BTreeMap<PowerComponent, f64>) -> Self {
        Self {
            total: components.values().sum(),
            components,
        }
    }

    pub fn component(&self, c: PowerComponent) -> f64 {
        self.components.get(&c).copied().unwrap_or(0.0)
    }
}

/// Fixed HR-RIS with `k` active and `m` passive elements; `p_a` is the power
/// the active elements actually transmit.
pub fn power_fixed(
    n_t: usize,
    k: usize,
    m: usize,
    p_bs: f64,
    p_a: f64,
    params: &PowerModelParams,
) -> PowerBreakdown {
    let circuit = n_t as f64 * params.p_bs_dynamic
        + k as f64 * params.p_a_dynamic
        + params.p_bs_static
        + params.p_a_static;
    PowerBreakdown::from_components(BTreeMap::from([
        (PowerComponent::BsAmplifier, p_bs / params.tau_bs),
        (PowerComponent::SurfaceAmplifier, p_a / params.tau_a),
        (PowerComponent::Circuit, circuit),
        (PowerComponent::PassiveElements, m as f64 * params.p_passive),
    ]))
}

/// Dynamic HR-RIS with `active_count` of its `n` elements switched to active.
pub fn power_dynamic(
    n_t: usize,
    n: usize,
    active_count: usize,
    p_bs: f64,
    p_a: f64,
    params: &PowerModelParams,
) -> PowerBreakdown {
    assert!(
        active_count <= n,
        "{active_count} active elements on a surface of {n}"
    );
    let mut b = power_fixed(n_t, active_count, n - active_count, p_bs, p_a, params);
    b.components
        .insert(PowerComponent::Switches, n as f64 * params.p_switch);
    PowerBreakdown::from_components(b.components)
}

/// Conventional RIS with `n` passive elements.
pub fn power_ris(n_t: usize, n: usize, p_bs: f64, params: &PowerModelParams) -> PowerBreakdown {
    PowerBreakdown::from_components(BTreeMap::from([
        (PowerComponent::BsAmplifier, p_bs / params.tau_bs),
        (
            PowerComponent::Circuit,
            n_t as f64 * params.p_bs_dynamic + params.p_bs_static,
        ),
        (PowerComponent::PassiveElements, n as f64 * params.p_passive),
    ]))
}

/// Extra power of a fixed HR-RIS over a RIS of the same size:
/// `P_a/τ_a + K(P_a,dyn − P_p) + P_a,static`.
pub fn delta_power_fixed(k: usize, p_a: f64, params: &PowerModelParams) -> f64 {
    p_a / params.tau_a + k as f64 * (params.p_a_dynamic - params.p_passive) + params.p_a_static
}

/// Extra power of a dynamic HR-RIS over a RIS of `n` elements, including the
/// `N·P_SW` drawn by the switches.
pub fn delta_power_dynamic(
    n: usize,
    active_count: usize,
    p_a: f64,
    params: &PowerModelParams,
) -> f64 {
    delta_power_fixed(active_count, p_a, params) + n as f64 * params.p_switch
}

/// `W·SE/P`, bits per joule.
pub fn energy_efficiency(
    se: f64,
    total_power: f64,
    params: &PowerModelParams,
) -> Result<f64, PowerError> {
    if total_power > 0.0 {
        Ok(params.bandwidth_hz * se / total_power)
    } else {
        Err(PowerError::NonPositivePower(total_power))
    }
}
