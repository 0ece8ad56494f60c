//! Built-in configurations, one per reference plot.

use serde::Serialize;

use super::config::{
    AxisUnit, InitialState, ModelKind, ParamsConfig, Reduce, ScenarioConfig, SweepAxis, SweepConfig, WignerConfig,
};
use crate::error::{Error, Result};
use crate::observables::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PresetConfig {
    Scenario(ScenarioConfig),
    Sweep(SweepConfig),
    Wigner(WignerConfig),
}

impl PresetConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            PresetConfig::Scenario(_) => "scenario",
            PresetConfig::Sweep(_) => "sweep",
            PresetConfig::Wigner(_) => "wigner",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: PresetConfig,
}

pub const PRESET_NAMES: [&str; 8] = ["fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig4-inset", "fig5a", "fig5b"];

/// Baseline with Ω₁ and Ω₂ given in units of G.
fn params(drive1_over_g: f64, drive2_over_g: f64, magnon_trunc: usize) -> ParamsConfig {
    let base = ParamsConfig::baseline();
    let g = base.coupling_mhz();
    ParamsConfig { drive1: drive1_over_g * g, drive2: drive2_over_g * g, magnon_trunc, ..base }
}

fn scenario(p: ParamsConfig, dissipation: bool, t_final: f64, n_samples: usize) -> ScenarioConfig {
    ScenarioConfig {
        params: p,
        model: ModelKind::FullEq3,
        dissipation,
        t_final,
        n_samples,
        initial_state: InitialState::QubitEMagnonVac,
        outputs: super::config::OBSERVABLES.iter().map(|s| s.to_string()).collect(),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn sweep(base: ScenarioConfig, axes: Vec<SweepAxis>) -> SweepConfig {
    SweepConfig { base, axes, reduce: Reduce::MaxSDb }
}

fn axis(name: &str, values: Vec<f64>, unit: AxisUnit) -> SweepAxis {
    SweepAxis { name: name.into(), values, unit }
}

// Sweeps take the optimum-time reduction on a 5 ns grid. The optimum falls
// well inside 600 ns across the preset ranges.
const SWEEP_WINDOW_NS: f64 = 600.0;
const SWEEP_SAMPLES: usize = 121;
const SWEEP_TRUNC: usize = 25;

pub fn preset(name: &str) -> Result<Preset> {
    let (description, config) = match name {
        "fig2a" => (
            "V_min(t) without dissipation, Omega1 = 10 Omega2 = 100 G",
            PresetConfig::Scenario(scenario(params(100.0, 10.0, 20), false, 600.0, 601)),
        ),
        "fig2b" => (
            "V_min(t) without dissipation, Omega1 = 10 Omega2 = 50 G",
            PresetConfig::Scenario(scenario(params(50.0, 5.0, 40), false, 600.0, 601)),
        ),
        "fig3a" => (
            "V_min(t) with kappa/2pi = 1 MHz, gamma/2pi = 20 kHz, T = 10 mK, Omega1 = 10 Omega2 = 50 G",
            PresetConfig::Scenario(scenario(params(50.0, 5.0, 20), true, 1000.0, 601)),
        ),
        "fig3b" => (
            "Magnon Wigner function at t = 300 ns for the fig3a parameters",
            PresetConfig::Wigner(WignerConfig {
                scenario: scenario(params(50.0, 5.0, 20), true, 300.0, 301),
                t: 300.0,
                grid: GridSpec::default(),
            }),
        ),
        "fig4" => (
            "Optimal-time squeezing versus Omega2 in [G, 15G] at Omega1 = 10 G, with dissipation",
            PresetConfig::Sweep(sweep(
                scenario(params(10.0, 1.0, SWEEP_TRUNC), true, SWEEP_WINDOW_NS, SWEEP_SAMPLES),
                vec![axis("Omega2", linspace(1.0, 15.0, 11), AxisUnit::Coupling)],
            )),
        ),
        "fig4-inset" => (
            "Optimal-time squeezing versus Omega1 at Omega2 = 3 G, with dissipation",
            PresetConfig::Sweep(sweep(
                scenario(params(10.0, 3.0, SWEEP_TRUNC), true, SWEEP_WINDOW_NS, SWEEP_SAMPLES),
                vec![axis("Omega1", linspace(1.0, 21.0, 11), AxisUnit::Coupling)],
            )),
        ),
        "fig5a" => (
            "Optimal-time squeezing versus kappa and gamma at T = 10 mK, Omega1 = 10 G, Omega2 = 3 G",
            PresetConfig::Sweep(sweep(
                scenario(params(10.0, 3.0, SWEEP_TRUNC), true, SWEEP_WINDOW_NS, SWEEP_SAMPLES),
                vec![
                    axis("kappa", linspace(0.0, 2.0, 5), AxisUnit::Config),
                    axis("gamma", linspace(0.0, 0.1, 5), AxisUnit::Config),
                ],
            )),
        ),
        "fig5b" => (
            "Optimal-time squeezing versus temperature in [10, 510] mK, Omega1 = 10 G, Omega2 = 3 G",
            PresetConfig::Sweep(sweep(
                scenario(params(10.0, 3.0, SWEEP_TRUNC), true, SWEEP_WINDOW_NS, SWEEP_SAMPLES),
                vec![axis("temperature", linspace(10.0, 510.0, 11), AxisUnit::Config)],
            )),
        ),
        _ => {
            return Err(Error::Configuration(format!(
                "unknown preset '{name}', available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let name = PRESET_NAMES.iter().copied().find(|n| *n == name).expect("matched above");
    Ok(Preset { name, description, config })
}

pub fn all_presets() -> Vec<Preset> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("built-in preset")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for p in all_presets() {
            match &p.config {
                PresetConfig::Scenario(c) => c.validate().unwrap(),
                PresetConfig::Sweep(c) => c.validate().unwrap(),
                PresetConfig::Wigner(c) => c.validate().unwrap(),
            }
        }
        assert!(preset("fig6").is_err());
    }

    #[test]
    fn presets_carry_reference_values() {
        for p in all_presets() {
            let params = match &p.config {
                PresetConfig::Scenario(c) => c.params,
                PresetConfig::Sweep(c) => c.base.params,
                PresetConfig::Wigner(c) => c.scenario.params,
            };
            assert_eq!(
                (params.omega0, params.omega, params.g1, params.g2, params.kappa, params.gamma, params.temperature),
                (7500.0, 7200.0, 36.0, 36.6, 1.0, 0.02, 10.0),
                "{}",
                p.name
            );
        }
        let PresetConfig::Scenario(fig2a) = preset("fig2a").unwrap().config else { panic!() };
        assert!((fig2a.params.drive1 - 100.0 * 4.392).abs() < 1e-9);
        assert!((fig2a.params.drive2 - 10.0 * 4.392).abs() < 1e-9);
        assert!(!fig2a.dissipation);
    }

    #[test]
    fn shown_json_parses_back() {
        for p in all_presets() {
            let text = serde_json::to_string(&p.config).unwrap();
            match &p.config {
                PresetConfig::Scenario(c) => assert_eq!(&ScenarioConfig::from_json(&text).unwrap(), c),
                PresetConfig::Sweep(c) => assert_eq!(&SweepConfig::from_json(&text).unwrap(), c),
                PresetConfig::Wigner(c) => assert_eq!(&WignerConfig::from_json(&text).unwrap(), c),
            }
        }
    }
}
