//! JSON run configurations. Frequencies and rates are given as ν = ω/2π in
//! MHz, times in ns and temperatures in mK; [`ParamsConfig::to_system`]
//! converts to the rad/s, seconds and kelvin used internally.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::observables::GridSpec;

/// rad/s per MHz of ν.
pub const RAD_PER_MHZ: f64 = 2.0 * PI * 1e6;
pub const SECONDS_PER_NS: f64 = 1e-9;
pub const KELVIN_PER_MK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub omega0: f64,
    pub omega: f64,
    pub g1: f64,
    pub g2: f64,
    #[serde(rename = "Omega1")]
    pub drive1: f64,
    #[serde(rename = "Omega2")]
    pub drive2: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// mK.
    pub temperature: f64,
    pub magnon_trunc: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity_trunc: Option<usize>,
}

/// Parameter names accepted as sweep axes, in config units.
pub const SWEEPABLE: [&str; 10] =
    ["omega0", "omega", "g1", "g2", "Omega1", "Omega2", "kappa", "gamma", "temperature", "magnon_trunc"];

impl ParamsConfig {
    /// The parameter values shared by every preset: ω₀/2π = 7.5 GHz,
    /// ω/2π = 7.2 GHz, g₁/2π = 36 MHz, g₂/2π = 36.6 MHz, κ/2π = 1 MHz,
    /// γ/2π = 20 kHz, T = 10 mK. Drives are set per preset.
    pub fn baseline() -> Self {
        Self {
            omega0: 7500.0,
            omega: 7200.0,
            g1: 36.0,
            g2: 36.6,
            drive1: 0.0,
            drive2: 0.0,
            kappa: 1.0,
            gamma: 0.02,
            temperature: 10.0,
            magnon_trunc: 20,
            cavity_trunc: None,
        }
    }

    /// G/2π = g₁g₂/Δ in MHz.
    pub fn coupling_mhz(&self) -> f64 {
        self.g1 * self.g2 / (self.omega0 - self.omega)
    }

    pub fn to_system(&self) -> SystemParams {
        SystemParams {
            omega0: self.omega0 * RAD_PER_MHZ,
            omega: self.omega * RAD_PER_MHZ,
            g1: self.g1 * RAD_PER_MHZ,
            g2: self.g2 * RAD_PER_MHZ,
            drive1: self.drive1 * RAD_PER_MHZ,
            drive2: self.drive2 * RAD_PER_MHZ,
            kappa: self.kappa * RAD_PER_MHZ,
            gamma: self.gamma * RAD_PER_MHZ,
            temperature: self.temperature * KELVIN_PER_MK,
            magnon_trunc: self.magnon_trunc,
            cavity_trunc: self.cavity_trunc,
        }
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "omega0" => self.omega0,
            "omega" => self.omega,
            "g1" => self.g1,
            "g2" => self.g2,
            "Omega1" => self.drive1,
            "Omega2" => self.drive2,
            "kappa" => self.kappa,
            "gamma" => self.gamma,
            "temperature" => self.temperature,
            "magnon_trunc" => self.magnon_trunc as f64,
            _ => return Err(unknown_parameter(name)),
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "omega0" => self.omega0 = value,
            "omega" => self.omega = value,
            "g1" => self.g1 = value,
            "g2" => self.g2 = value,
            "Omega1" => self.drive1 = value,
            "Omega2" => self.drive2 = value,
            "kappa" => self.kappa = value,
            "gamma" => self.gamma = value,
            "temperature" => self.temperature = value,
            "magnon_trunc" => {
                if !(value >= 2.0 && value.fract() == 0.0) {
                    return Err(Error::Configuration(format!("magnon_trunc must be an integer >= 2, got {value}")));
                }
                self.magnon_trunc = value as usize;
            }
            _ => return Err(unknown_parameter(name)),
        }
        Ok(())
    }
}

fn unknown_parameter(name: &str) -> Error {
    Error::Configuration(format!("unknown parameter '{name}', expected one of {}", SWEEPABLE.join(", ")))
}

/// Which Hamiltonian drives the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Two-tone driven qubit–magnon model in the frame of the first drive.
    FullEq3,
    /// Effective two-magnon (parametric) Hamiltonian.
    EffectiveEq9,
    /// Undriven cavity–magnon–qubit Hamiltonian, in the frame rotating at ω.
    TripartiteEq1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    QubitEMagnonVac,
    QubitGMagnonVac,
}

/// Columns of the time-series table after `t_ns`.
pub const OBSERVABLES: [&str; 6] = ["V_min", "theta_opt", "S_dB", "n_magnon", "qubit_excitation", "purity"];

fn all_observables() -> Vec<String> {
    OBSERVABLES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: ParamsConfig,
    pub model: ModelKind,
    pub dissipation: bool,
    /// ns.
    pub t_final: f64,
    /// Samples on the uniform grid `[0, t_final]`, endpoints included.
    pub n_samples: usize,
    pub initial_state: InitialState,
    #[serde(default = "all_observables")]
    pub outputs: Vec<String>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Configuration(format!("t_final must be positive, got {}", self.t_final)));
        }
        if self.n_samples < 2 {
            return Err(Error::Configuration(format!("n_samples must be at least 2, got {}", self.n_samples)));
        }
        if self.model == ModelKind::TripartiteEq1 && self.params.cavity_trunc.is_none() {
            return Err(Error::Configuration("model tripartite_eq1 requires params.cavity_trunc".into()));
        }
        if self.model != ModelKind::TripartiteEq1 && self.params.cavity_trunc.is_some() {
            return Err(Error::Configuration("cavity_trunc is only used by model tripartite_eq1".into()));
        }
        if let Some(bad) = self.outputs.iter().find(|o| !OBSERVABLES.contains(&o.as_str())) {
            return Err(Error::Configuration(format!(
                "unknown output '{bad}', expected any of {}",
                OBSERVABLES.join(", ")
            )));
        }
        self.params.to_system().validate()
    }

    /// Sample times in ns.
    pub fn times_ns(&self) -> Vec<f64> {
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples).map(|k| self.t_final * k as f64 / last).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Unit in which an axis lists its values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AxisUnit {
    /// The parameter's own config unit (MHz, mK, levels).
    #[default]
    #[serde(rename = "config")]
    Config,
    /// Multiples of the effective coupling G of the grid point.
    #[serde(rename = "G")]
    Coupling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub unit: AxisUnit,
}

impl SweepAxis {
    /// CSV column header.
    pub fn column(&self) -> String {
        match self.unit {
            AxisUnit::Config => self.name.clone(),
            AxisUnit::Coupling => format!("{}_over_G", self.name),
        }
    }
}

/// Scalar extracted from each grid point's time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduce {
    /// Largest S_dB over the sampled times (squeezing at the optimal time).
    #[default]
    MaxSDb,
    /// S_dB at t_final.
    FinalSDb,
    /// V_min at t_final.
    FinalVMin,
}

impl Reduce {
    pub fn column(self) -> &'static str {
        match self {
            Reduce::MaxSDb => "S_dB_max",
            Reduce::FinalSDb => "S_dB_final",
            Reduce::FinalVMin => "V_min_final",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ScenarioConfig,
    pub axes: Vec<SweepAxis>,
    #[serde(default)]
    pub reduce: Reduce,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Configuration(format!("a sweep needs 1 or 2 axes, got {}", self.axes.len())));
        }
        for axis in &self.axes {
            if !SWEEPABLE.contains(&axis.name.as_str()) {
                return Err(unknown_parameter(&axis.name));
            }
            if axis.values.is_empty() {
                return Err(Error::Configuration(format!("axis '{}' has no values", axis.name)));
            }
            if axis.unit == AxisUnit::Coupling && ["omega0", "omega", "g1", "g2", "magnon_trunc"].contains(&axis.name.as_str()) {
                return Err(Error::Configuration(format!("axis '{}' cannot be given in units of G", axis.name)));
            }
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(Error::Configuration("sweep axes must be distinct".into()));
        }
        self.base.validate()
    }

    /// Grid points in row-major order (last axis fastest), as axis values.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut points: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    /// Scenario for one grid point.
    pub fn scenario_at(&self, point: &[f64]) -> Result<ScenarioConfig> {
        let mut cfg = self.base.clone();
        // Axes in config units first so that G reflects the point's couplings.
        for (axis, &v) in self.axes.iter().zip(point) {
            if axis.unit == AxisUnit::Config {
                cfg.params.set(&axis.name, v)?;
            }
        }
        let g = cfg.params.coupling_mhz();
        for (axis, &v) in self.axes.iter().zip(point) {
            if axis.unit == AxisUnit::Coupling {
                cfg.params.set(&axis.name, v * g)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    pub scenario: ScenarioConfig,
    /// Snapshot time in ns.
    pub t: f64,
    #[serde(default)]
    pub grid: GridSpec,
}

impl WignerConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if !(self.t >= 0.0 && self.t <= self.scenario.t_final) {
            return Err(Error::Configuration(format!(
                "Wigner time {} ns lies outside [0, {}] ns",
                self.t, self.scenario.t_final
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
