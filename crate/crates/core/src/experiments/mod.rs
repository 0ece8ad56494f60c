//! Figure-level scenarios: configuration, presets, runs, sweeps, Wigner
//! snapshots, validation reports and CSV output.

pub mod config;
pub mod presets;
pub mod run;
pub mod table;
pub mod validate;

pub use config::{
    AxisUnit, InitialState, ModelKind, ParamsConfig, Reduce, ScenarioConfig, SweepAxis, SweepConfig, WignerConfig,
};
pub use presets::{all_presets, preset, Preset, PresetConfig, PRESET_NAMES};
pub use run::{
    compare_models, compare_pair, emit_wigner, run_scenario, run_sweep, simulate_at, Comparison, Simulation,
    SweepResult, TimeSeries, WignerOutput,
};
pub use table::{format_number, Table};
pub use validate::{validate, CheckStatus, ValidationReport};
