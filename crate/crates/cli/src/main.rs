use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use magnon_squeeze::experiments::{
    all_presets, compare_models, emit_wigner, preset, run_scenario, run_sweep, validate, PresetConfig,
    ScenarioConfig, SweepConfig, WignerConfig,
};
use magnon_squeeze::Error;

/// Magnon squeezing simulator: time series, model comparisons, sweeps,
/// Wigner snapshots and validation reports.
#[derive(Parser)]
#[command(name = "magsq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of the squeezing diagnostics.
    Run(Source),
    /// Full driven model against the effective two-magnon model.
    Compare(Source),
    /// Optimal-time squeezing over a parameter grid.
    Sweep(Source),
    /// Magnon Wigner function at one instant, plus a JSON sidecar.
    Wigner(Source),
    /// Approximation, truncation, step-size and dispersive checks as JSON.
    Validate(Source),
    /// Built-in preset configurations.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset as JSON, usable as a --config file.
    Show { name: String },
}

#[derive(Args)]
struct Source {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name (see `magsq preset list`).
    #[arg(long)]
    preset: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Affects wall time only.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

/// Exit status for a failure: 2 configuration, 3 non-convergence, 4 truncation.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. }) => 3,
        Some(Error::Truncation(_)) => 4,
        Some(Error::InvalidState(_)) => 3,
        _ => 2,
    }
}

fn config_error(msg: String) -> anyhow::Error {
    anyhow!(Error::Configuration(msg))
}

fn read_config(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))
}

fn load_preset(name: &str) -> anyhow::Result<PresetConfig> {
    Ok(preset(name)?.config)
}

fn scenario(src: &Source) -> anyhow::Result<ScenarioConfig> {
    if let Some(path) = &src.config {
        return Ok(ScenarioConfig::from_json(&read_config(path)?)?);
    }
    match load_preset(src.preset.as_deref().unwrap_or_default())? {
        PresetConfig::Scenario(c) => Ok(c),
        PresetConfig::Wigner(c) => Ok(c.scenario),
        PresetConfig::Sweep(_) => Err(config_error("this is a sweep preset; use `magsq sweep`".into())),
    }
}

fn sweep_config(src: &Source) -> anyhow::Result<SweepConfig> {
    if let Some(path) = &src.config {
        return Ok(SweepConfig::from_json(&read_config(path)?)?);
    }
    match load_preset(src.preset.as_deref().unwrap_or_default())? {
        PresetConfig::Sweep(c) => Ok(c),
        _ => Err(config_error("not a sweep preset".into())),
    }
}

fn wigner_config(src: &Source) -> anyhow::Result<WignerConfig> {
    if let Some(path) = &src.config {
        return Ok(WignerConfig::from_json(&read_config(path)?)?);
    }
    match load_preset(src.preset.as_deref().unwrap_or_default())? {
        PresetConfig::Wigner(c) => Ok(c),
        _ => Err(config_error("not a Wigner preset".into())),
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let src = match &cli.command {
        Command::Preset { action } => {
            match action {
                PresetAction::List => {
                    for p in all_presets() {
                        println!("{:<11} {:<9} {}", p.name, p.config.kind(), p.description);
                    }
                }
                PresetAction::Show { name } => println!("{}", serde_json::to_string_pretty(&load_preset(name)?)?),
            }
            return Ok(());
        }
        Command::Run(s) | Command::Compare(s) | Command::Sweep(s) | Command::Wigner(s) | Command::Validate(s) => s,
    };
    if src.threads > 0 {
        // Only the first call can configure the global pool; ignore a repeat.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(src.threads).build_global();
    }
    let out = src.out.as_deref();
    match &cli.command {
        Command::Run(_) => {
            let series = run_scenario(&scenario(src)?)?;
            for w in &series.warnings {
                eprintln!("warning: {w}");
            }
            emit(out, &series.table().to_csv()?)
        }
        Command::Compare(_) => {
            let cmp = compare_models(&scenario(src)?)?;
            eprintln!("max |V_min_full - V_min_eff| = {:.6e}", cmp.max_abs_dev);
            emit(out, &cmp.table().to_csv()?)
        }
        Command::Sweep(_) => {
            let res = run_sweep(&sweep_config(src)?, src.threads)?;
            let failed = res.points.iter().filter(|p| p.error.is_some()).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} grid points failed; see the error column", res.points.len());
            }
            emit(out, &res.table().to_csv()?)
        }
        Command::Wigner(_) => {
            let w = emit_wigner(&wigner_config(src)?)?;
            let sidecar = serde_json::to_string_pretty(&w.sidecar)?;
            match out {
                Some(path) => {
                    emit(Some(path), &w.table().to_csv()?)?;
                    let side = path.with_extension("json");
                    if side == path {
                        bail!(config_error(format!("{} cannot hold both the grid and its sidecar", path.display())));
                    }
                    emit(Some(&side), &format!("{sidecar}\n"))
                }
                None => {
                    eprintln!("{sidecar}");
                    emit(None, &w.table().to_csv()?)
                }
            }
        }
        Command::Validate(_) => {
            let report = validate(&scenario(src)?);
            emit(out, &format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
        Command::Preset { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
