//! Scenario and sweep descriptions, figure presets, and their text form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::channel::{ArrayGeometry, FadingConfig, GeometryConfig};
use crate::power::{dbm_to_watts, PowerModelParams};
use crate::surface::SystemParams;

/// Physical setup shared by every scheme of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub n: usize,
    pub k: usize,
    pub p_bs_dbm: f64,
    pub p_a_max_dbm: f64,
    pub sigma2_dbm: f64,
    pub surface_x: f64,
    pub ms_x: f64,
    pub ms_y: f64,
    pub beta0_db: f64,
    pub epsilon_t: f64,
    pub epsilon_r: f64,
    pub kappa_t: f64,
    pub kappa_r: f64,
    /// 0 selects continuous phases.
    pub phase_bits: u32,
    pub power: PowerModelParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_t: 32,
            n_r: 2,
            n: 50,
            k: 1,
            p_bs_dbm: 30.0,
            p_a_max_dbm: 0.0,
            sigma2_dbm: -80.0,
            surface_x: 51.0,
            ms_x: 40.0,
            ms_y: 2.0,
            beta0_db: -30.0,
            epsilon_t: 2.2,
            epsilon_r: 2.8,
            kappa_t: f64::INFINITY,
            kappa_r: 0.0,
            phase_bits: 2,
            power: PowerModelParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn geometry(&self) -> GeometryConfig {
        GeometryConfig {
            surface_x: self.surface_x,
            ms_x: self.ms_x,
            ms_y: self.ms_y,
        }
    }

    pub fn fading(&self) -> FadingConfig {
        FadingConfig {
            beta0: 10f64.powf(self.beta0_db / 10.0),
            epsilon_t: self.epsilon_t,
            epsilon_r: self.epsilon_r,
            kappa_t: self.kappa_t,
            kappa_r: self.kappa_r,
        }
    }

    pub fn arrays(&self) -> ArrayGeometry {
        ArrayGeometry::new(self.n_t, self.n_r, self.n)
    }

    pub fn system(&self) -> SystemParams {
        SystemParams {
            p_bs: dbm_to_watts(self.p_bs_dbm),
            sigma2: dbm_to_watts(self.sigma2_dbm),
        }
    }

    pub fn p_a_max(&self) -> f64 {
        dbm_to_watts(self.p_a_max_dbm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Passive surface, phases by alternating optimization.
    AoRis,
    /// Passive surface, random phases.
    RandomRis,
    FixedHr,
    DynamicHr,
    /// `K` elements, all active.
    RelayK,
    /// `K` elements, all passive.
    RisK,
    ExhaustiveFixed,
    ExhaustiveDynamic,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::AoRis,
        Scheme::RandomRis,
        Scheme::FixedHr,
        Scheme::DynamicHr,
        Scheme::RelayK,
        Scheme::RisK,
        Scheme::ExhaustiveFixed,
        Scheme::ExhaustiveDynamic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::AoRis => "ao_ris",
            Scheme::RandomRis => "random_ris",
            Scheme::FixedHr => "fixed_hr",
            Scheme::DynamicHr => "dynamic_hr",
            Scheme::RelayK => "relay_k",
            Scheme::RisK => "ris_k",
            Scheme::ExhaustiveFixed => "exhaustive_fixed",
            Scheme::ExhaustiveDynamic => "exhaustive_dynamic",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PBsDbm,
    PAMaxDbm,
    K,
    N,
    SurfaceX,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::PBsDbm,
        SweepVariable::PAMaxDbm,
        SweepVariable::K,
        SweepVariable::N,
        SweepVariable::SurfaceX,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::PBsDbm => "p_bs_dbm",
            SweepVariable::PAMaxDbm => "p_a_max_dbm",
            SweepVariable::K => "k",
            SweepVariable::N => "n",
            SweepVariable::SurfaceX => "surface_x",
        }
    }

    /// `base` with this variable set to `value`.
    pub fn apply(
        self,
        base: &ScenarioConfig,
        value: f64,
    ) -> Result<ScenarioConfig, ExperimentError> {
        let count = |v: f64| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(ExperimentError::Config(format!(
                    "{} must be a whole number, got {v}",
                    self.name()
                )))
            }
        };
        let mut s = base.clone();
        match self {
            SweepVariable::PBsDbm => s.p_bs_dbm = value,
            SweepVariable::PAMaxDbm => s.p_a_max_dbm = value,
            SweepVariable::K => s.k = count(value)?,
            SweepVariable::N => s.n = count(value)?,
            SweepVariable::SurfaceX => s.surface_x = value,
        }
        Ok(s)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepVariable::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown sweep variable `{s}`")))
    }
}

pub const DEFAULT_TRIALS: usize = 100;
pub const FAST_TRIALS: usize = 25;
pub const DEFAULT_SEED: u64 = 2021;

/// One sweep: every scheme evaluated at every sweep value over `trials`
/// channel realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub figure_id: String,
    pub schemes: Vec<Scheme>,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub scenario: ScenarioConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            figure_id: "custom".into(),
            schemes: vec![
                Scheme::RandomRis,
                Scheme::AoRis,
                Scheme::FixedHr,
                Scheme::DynamicHr,
            ],
            sweep_variable: SweepVariable::PBsDbm,
            sweep_values: vec![30.0],
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            scenario: ScenarioConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let spec: Self =
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a flat key-value config: `preset = "<sweep id>"` picks the
    /// starting point (the built-in defaults otherwise), sweep keys such as
    /// `trials` or `sweep_values` replace those of the base sweep, `power.<field>`
    /// sets the power model and any other key is a scenario field.
    pub fn from_config(text: &str) -> Result<Self, ExperimentError> {
        let config_err = |m: String| ExperimentError::Config(m);
        let flat: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        let base = match flat.get("preset") {
            None => Self::default(),
            Some(toml::Value::String(id)) => {
                let mut specs = preset(id)?;
                if specs.len() != 1 {
                    let ids: Vec<_> = specs.iter().map(|s| s.figure_id.as_str()).collect();
                    return Err(config_err(format!(
                        "preset `{id}` holds several sweeps, pick one of {ids:?}"
                    )));
                }
                specs.remove(0)
            }
            Some(v) => return Err(config_err(format!("preset must be a string, got {v}"))),
        };
        let mut tree = toml::Table::try_from(&base).map_err(|e| config_err(e.to_string()))?;
        let mut scenario = match tree.remove("scenario") {
            Some(toml::Value::Table(t)) => t,
            _ => unreachable!("spec serializes its scenario as a table"),
        };
        for (key, value) in flat {
            match key.as_str() {
                "preset" => {}
                "figure_id" | "schemes" | "sweep_variable" | "sweep_values" | "trials" | "seed" => {
                    tree.insert(key, value);
                }
                "power" => {
                    let toml::Value::Table(fields) = value else {
                        return Err(config_err(
                            "power settings are written as power.<field> = value".into(),
                        ));
                    };
                    let Some(toml::Value::Table(power)) = scenario.get_mut("power") else {
                        unreachable!("scenario serializes its power model as a table");
                    };
                    power.extend(fields);
                }
                _ => {
                    scenario.insert(key, value);
                }
            }
        }
        tree.insert("scenario".into(), toml::Value::Table(scenario));
        let spec: Self = tree
            .try_into()
            .map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(format!("{}: {m}", self.figure_id)));
        if self.sweep_values.is_empty() {
            return bad("no sweep values".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("no schemes".into());
        }
        if let Err(e) = self.scenario.power.validate() {
            return bad(e.to_string());
        }
        for &v in &self.sweep_values {
            let s = self.sweep_variable.apply(&self.scenario, v)?;
            if s.n == 0 || s.n_t == 0 || s.n_r == 0 {
                return bad(format!("empty array at {} = {v}", self.sweep_variable));
            }
            if let Err(e) = s.fading().validate() {
                return bad(e.to_string());
            }
            for &scheme in &self.schemes {
                let needs_k = matches!(
                    scheme,
                    Scheme::FixedHr
                        | Scheme::DynamicHr
                        | Scheme::ExhaustiveFixed
                        | Scheme::ExhaustiveDynamic
                );
                if needs_k && s.k > s.n {
                    return bad(format!("K = {} exceeds N = {} for {scheme}", s.k, s.n));
                }
                if matches!(scheme, Scheme::RelayK | Scheme::RisK) && (s.k == 0 || s.k > s.n) {
                    return bad(format!("{scheme} needs 1 ≤ K ≤ N, got K = {}", s.k));
                }
                if matches!(scheme, Scheme::ExhaustiveFixed | Scheme::ExhaustiveDynamic)
                    && s.phase_bits == 0
                {
                    return bad(format!("{scheme} needs quantized phases"));
                }
            }
        }
        Ok(())
    }
}

fn steps(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

const ACTIVE_BUDGETS_DBM: [f64; 3] = [-10.0, 0.0, 10.0];

fn budget_label(p: f64) -> String {
    format!("pa{p}dBm")
}

fn per_budget(figure: &str, base: ExperimentSpec) -> Vec<ExperimentSpec> {
    ACTIVE_BUDGETS_DBM
        .iter()
        .map(|&p| {
            let mut s = base.clone();
            s.figure_id = format!("{figure}_{}", budget_label(p));
            s.scenario.p_a_max_dbm = p;
            s
        })
        .collect()
}

pub const FIGURES: [&str; 7] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

/// Sweeps reproducing one figure. Accepts a figure name (`fig4`) or a single
/// sweep id (`fig4_pa0dBm`).
pub fn preset(id: &str) -> Result<Vec<ExperimentSpec>, ExperimentError> {
    let figure = id.split('_').next().unwrap_or(id);
    let all = figure_specs(figure)?;
    if figure == id {
        return Ok(all);
    }
    let one: Vec<_> = all.into_iter().filter(|s| s.figure_id == id).collect();
    if one.is_empty() {
        return Err(ExperimentError::Config(format!("unknown preset `{id}`")));
    }
    Ok(one)
}

fn figure_specs(figure: &str) -> Result<Vec<ExperimentSpec>, ExperimentError> {
    use Scheme::*;
    let base = ExperimentSpec::default();
    let p_bs_range = steps(0.0, 40.0, 5.0);
    let k_range = steps(1.0, 50.0, 1.0);
    let specs = match figure {
        "fig3" => per_budget(
            figure,
            ExperimentSpec {
                schemes: vec![FixedHr, DynamicHr, ExhaustiveFixed, ExhaustiveDynamic],
                sweep_values: p_bs_range,
                scenario: ScenarioConfig {
                    n_t: 4,
                    n: 4,
                    ..ScenarioConfig::default()
                },
                ..base
            },
        ),
        "fig4" | "fig8" => per_budget(
            figure,
            ExperimentSpec {
                sweep_values: p_bs_range,
                ..base
            },
        ),
        "fig5" => [40.0, 100.0]
            .iter()
            .map(|&ms_x| ExperimentSpec {
                figure_id: format!("fig5_ms{ms_x}"),
                sweep_variable: SweepVariable::SurfaceX,
                sweep_values: steps(10.0, 100.0, 10.0),
                scenario: ScenarioConfig {
                    k: 4,
                    ms_x,
                    ..ScenarioConfig::default()
                },
                ..base.clone()
            })
            .collect(),
        "fig6" => per_budget(
            figure,
            ExperimentSpec {
                schemes: vec![RandomRis, AoRis, FixedHr, DynamicHr, RelayK, RisK],
                sweep_variable: SweepVariable::K,
                sweep_values: k_range,
                ..base
            },
        ),
        "fig7" => per_budget(
            figure,
            ExperimentSpec {
                sweep_variable: SweepVariable::N,
                sweep_values: steps(20.0, 200.0, 20.0),
                ..base
            },
        ),
        "fig9" => per_budget(
            figure,
            ExperimentSpec {
                sweep_variable: SweepVariable::K,
                sweep_values: k_range,
                ..base
            },
        ),
        _ => {
            return Err(ExperimentError::Config(format!(
                "unknown figure `{figure}`; expected one of {FIGURES:?}"
            )))
        }
    };
    Ok(specs)
}
