//! Scenario execution: time series, model comparison, sweeps and Wigner snapshots.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{
    InitialState, ModelKind, Reduce, ScenarioConfig, SweepConfig, WignerConfig, KELVIN_PER_MK, SECONDS_PER_NS,
};
use super::table::{Cell, Table};
use crate::dynamics::{
    collapse_terms_with_occupations, evolve_master, evolve_unitary, LindbladGenerator,
};
use crate::error::{Error, Result};
use crate::model::{
    build_driven_jc, build_tripartite_shifted, derive_params, rwa_validity_report, thermal_occupation,
    ParametricModel, QubitBranch, SystemParams, TimeDependentHamiltonian,
};
use crate::observables::{
    scalar_observables_from_reduced, squeezing_db, wigner, ScalarObservables, WignerGrid,
};
use crate::operators::{
    fock_ket, kron_vec, partial_trace, partial_trace_pure, qubit_excited, qubit_ground, ComplexMatrix, Factor,
    HilbertLayout,
};

/// Population allowed in the two highest magnon Fock levels of any snapshot.
pub const TOP_LEVEL_POPULATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorSummary {
    pub step_size_s: f64,
    pub halvings: usize,
    pub residual: f64,
}

/// Raw output of one integration.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub layout: HilbertLayout,
    pub times_s: Vec<f64>,
    pub states: States,
    pub integrator: IntegratorSummary,
}

#[derive(Debug, Clone)]
pub enum States {
    Pure(Vec<Vec<C64>>),
    Mixed(Vec<ComplexMatrix>),
}

impl Simulation {
    pub fn len(&self) -> usize {
        self.times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_s.is_empty()
    }

    /// Reduced magnon state and qubit excitation at snapshot `k`.
    pub fn reduced(&self, k: usize) -> Result<(ComplexMatrix, f64, f64)> {
        match &self.states {
            States::Pure(psi) => {
                let rho_m = partial_trace_pure(&psi[k], Factor::Magnon, &self.layout)?;
                let rho_q = partial_trace_pure(&psi[k], Factor::Qubit, &self.layout)?;
                let norm: f64 = psi[k].iter().map(|z| z.norm_sqr()).sum();
                Ok((rho_m, rho_q[(0, 0)].re, norm * norm))
            }
            States::Mixed(rho) => {
                let rho_m = partial_trace(&rho[k], Factor::Magnon, &self.layout)?;
                let rho_q = partial_trace(&rho[k], Factor::Qubit, &self.layout)?;
                Ok((rho_m, rho_q[(0, 0)].re, rho[k].purity()))
            }
        }
    }
}

fn layout_for(cfg: &ScenarioConfig) -> Result<HilbertLayout> {
    let n = cfg.params.magnon_trunc;
    match cfg.model {
        ModelKind::TripartiteEq1 => {
            let n_a = cfg.params.cavity_trunc.ok_or_else(|| {
                Error::Configuration("model tripartite_eq1 requires params.cavity_trunc".into())
            })?;
            HilbertLayout::tripartite(n, n_a)
        }
        _ => HilbertLayout::qubit_magnon(n),
    }
}

fn hamiltonian_for(cfg: &ScenarioConfig, p: &SystemParams, layout: &HilbertLayout) -> Result<TimeDependentHamiltonian> {
    match cfg.model {
        ModelKind::FullEq3 => build_driven_jc(p, layout),
        ModelKind::EffectiveEq9 => {
            let branch = match cfg.initial_state {
                InitialState::QubitEMagnonVac => QubitBranch::Excited,
                InitialState::QubitGMagnonVac => QubitBranch::Ground,
            };
            ParametricModel::from_derived(&derive_params(p)?, branch)?.hamiltonian(layout)
        }
        ModelKind::TripartiteEq1 => {
            TimeDependentHamiltonian::from_static(layout.clone(), build_tripartite_shifted(p, layout, p.omega)?)
        }
    }
}

fn initial_ket(cfg: &ScenarioConfig, layout: &HilbertLayout) -> Result<Vec<C64>> {
    let qubit = match cfg.initial_state {
        InitialState::QubitEMagnonVac => qubit_excited(),
        InitialState::QubitGMagnonVac => qubit_ground(),
    };
    let mut psi = kron_vec(&qubit, &fock_ket(layout.magnon_dim(), 0)?);
    if let Some(n_a) = layout.cavity_dim() {
        psi = kron_vec(&psi, &fock_ket(n_a, 0)?);
    }
    Ok(psi)
}

/// Integrates a scenario at the given times (ns), returning full-system states.
pub fn simulate_at(cfg: &ScenarioConfig, times_ns: &[f64]) -> Result<Simulation> {
    cfg.validate()?;
    let p = cfg.params.to_system();
    let layout = layout_for(cfg)?;
    let h = hamiltonian_for(cfg, &p, &layout)?;
    let psi0 = initial_ket(cfg, &layout)?;
    let times_s: Vec<f64> = times_ns.iter().map(|t| t * SECONDS_PER_NS).collect();
    if cfg.dissipation {
        let nbar = thermal_occupation(p.omega, cfg.params.temperature * KELVIN_PER_MK)?;
        let gen = LindbladGenerator::new(h, collapse_terms_with_occupations(&p, nbar, nbar, &layout)?)?;
        let rec = evolve_master(&gen, &ComplexMatrix::outer(&psi0), &times_s)?;
        rec.check_physical()?;
        Ok(Simulation {
            layout,
            times_s,
            states: States::Mixed(rec.states),
            integrator: IntegratorSummary {
                step_size_s: rec.step_size_used,
                halvings: rec.halvings,
                residual: rec.residual,
            },
        })
    } else {
        let rec = evolve_unitary(&h, &psi0, &times_s)?;
        Ok(Simulation {
            layout,
            times_s,
            states: States::Pure(rec.states),
            integrator: IntegratorSummary {
                step_size_s: rec.step_size_used,
                halvings: rec.halvings,
                residual: rec.residual,
            },
        })
    }
}

fn check_truncation(rho_m: &ComplexMatrix, t_ns: f64) -> Result<()> {
    let n = rho_m.rows();
    let top = rho_m[(n - 1, n - 1)].re + rho_m[(n - 2, n - 2)].re;
    if top > TOP_LEVEL_POPULATION_TOL {
        return Err(Error::Truncation(format!(
            "population {top:.2e} in the top two of {n} magnon levels at t = {t_ns} ns; raise magnon_trunc"
        )));
    }
    Ok(())
}

/// Time series of the squeezing diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times_ns: Vec<f64>,
    pub rows: Vec<ScalarObservables>,
    pub outputs: Vec<String>,
    /// Approximation-validity warnings for the configured parameters.
    pub warnings: Vec<String>,
    pub integrator: IntegratorSummary,
}

impl TimeSeries {
    pub fn v_min(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.v_min).collect()
    }

    pub fn s_db(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.s_db).collect()
    }

    pub fn table(&self) -> Table {
        let mut header = vec!["t_ns".to_string()];
        header.extend(self.outputs.iter().cloned());
        let mut table = Table::new(header);
        for (t, r) in self.times_ns.iter().zip(&self.rows) {
            let mut row = vec![Cell::Num(*t)];
            for name in &self.outputs {
                row.push(Cell::Num(match name.as_str() {
                    "V_min" => r.v_min,
                    "theta_opt" => r.theta_opt,
                    "S_dB" => r.s_db,
                    "n_magnon" => r.n_magnon,
                    "qubit_excitation" => r.qubit_excitation.unwrap_or(f64::NAN),
                    "purity" => r.purity,
                    other => unreachable!("output '{other}' rejected by validation"),
                }));
            }
            table.push(row);
        }
        table
    }
}

/// Approximation warnings for a scenario's parameters.
pub fn scenario_warnings(cfg: &ScenarioConfig) -> Vec<String> {
    match cfg.model {
        ModelKind::TripartiteEq1 => Vec::new(),
        _ => rwa_validity_report(&cfg.params.to_system()).map(|r| r.warnings()).unwrap_or_default(),
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<TimeSeries> {
    let times_ns = cfg.times_ns();
    let sim = simulate_at(cfg, &times_ns)?;
    let mut rows = Vec::with_capacity(sim.len());
    for (k, &t) in times_ns.iter().enumerate() {
        let (rho_m, excitation, purity) = sim.reduced(k)?;
        check_truncation(&rho_m, t)?;
        rows.push(scalar_observables_from_reduced(&rho_m, Some(excitation), purity)?);
    }
    Ok(TimeSeries {
        times_ns,
        rows,
        outputs: cfg.outputs.clone(),
        warnings: scenario_warnings(cfg),
        integrator: sim.integrator,
    })
}

// ---------------------------------------------------------------------------
// Model comparison

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub times_ns: Vec<f64>,
    pub v_min_a: Vec<f64>,
    pub v_min_b: Vec<f64>,
    pub max_abs_dev: f64,
}

impl Comparison {
    pub fn abs_dev(&self) -> Vec<f64> {
        self.v_min_a.iter().zip(&self.v_min_b).map(|(a, b)| (a - b).abs()).collect()
    }

    /// Largest deviation over samples with `t ≤ t_max_ns`.
    pub fn max_abs_dev_until(&self, t_max_ns: f64) -> f64 {
        self.times_ns
            .iter()
            .zip(self.abs_dev())
            .filter(|(t, _)| **t <= t_max_ns)
            .map(|(_, d)| d)
            .fold(0.0, f64::max)
    }

    pub fn table(&self) -> Table {
        let header = ["t_ns", "V_min_full", "V_min_eff", "abs_dev"].map(String::from).to_vec();
        let mut table = Table::new(header);
        for (i, d) in self.abs_dev().into_iter().enumerate() {
            table.push(vec![
                Cell::Num(self.times_ns[i]),
                Cell::Num(self.v_min_a[i]),
                Cell::Num(self.v_min_b[i]),
                Cell::Num(d),
            ]);
        }
        table
    }
}

/// Compares V_min of two scenarios sampled on the same time grid.
pub fn compare_pair(a: &ScenarioConfig, b: &ScenarioConfig) -> Result<Comparison> {
    if a.times_ns() != b.times_ns() {
        return Err(Error::Configuration("compared scenarios must share t_final and n_samples".into()));
    }
    let (ra, rb) = rayon::join(|| run_scenario(a), || run_scenario(b));
    let (ra, rb) = (ra?, rb?);
    let max_abs_dev = ra.v_min().iter().zip(rb.v_min()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(Comparison { times_ns: ra.times_ns.clone(), v_min_a: ra.v_min(), v_min_b: rb.v_min(), max_abs_dev })
}

/// Runs the configuration under the full driven model and the effective
/// two-magnon model; the `model` field of `cfg` is ignored.
pub fn compare_models(cfg: &ScenarioConfig) -> Result<Comparison> {
    let full = ScenarioConfig { model: ModelKind::FullEq3, ..cfg.clone() };
    let eff = ScenarioConfig { model: ModelKind::EffectiveEq9, ..cfg.clone() };
    compare_pair(&full, &eff)
}

// ---------------------------------------------------------------------------
// Sweeps

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub axis_values: Vec<f64>,
    pub value: Option<f64>,
    /// Sample time at which the reduction was taken.
    pub t_ns: Option<f64>,
    /// Magnon levels of the last attempt.
    pub magnon_trunc: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis_columns: Vec<String>,
    pub value_column: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn table(&self) -> Table {
        let mut header = self.axis_columns.clone();
        header.extend([self.value_column.clone(), "t_ns".into(), "magnon_trunc".into(), "error".into()]);
        let mut table = Table::new(header);
        for p in &self.points {
            let mut row: Vec<Cell> = p.axis_values.iter().map(|v| Cell::Num(*v)).collect();
            row.push(p.value.map_or(Cell::Empty, Cell::Num));
            row.push(p.t_ns.map_or(Cell::Empty, Cell::Num));
            row.push(Cell::Text(p.magnon_trunc.to_string()));
            row.push(p.error.clone().map_or(Cell::Empty, Cell::Text));
            table.push(row);
        }
        table
    }
}

fn reduce_series(series: &TimeSeries, reduce: Reduce) -> (f64, f64) {
    let last = series.rows.len() - 1;
    match reduce {
        Reduce::MaxSDb => {
            // First maximum, so ties resolve identically on every run.
            let mut best = 0;
            for (k, r) in series.rows.iter().enumerate() {
                if r.s_db > series.rows[best].s_db {
                    best = k;
                }
            }
            (series.rows[best].s_db, series.times_ns[best])
        }
        Reduce::FinalSDb => (series.rows[last].s_db, series.times_ns[last]),
        Reduce::FinalVMin => (series.rows[last].v_min, series.times_ns[last]),
    }
}

/// Levels added when a sweep point overflows its truncation.
pub const SWEEP_TRUNC_STEP: usize = 10;

/// Runs one grid point, retrying with more magnon levels (up to twice the
/// configured truncation) when the state reaches the top of the Fock space.
fn sweep_point(cfg: &SweepConfig, point: &[f64]) -> SweepPoint {
    let failed = |n: usize, e: Error| SweepPoint {
        axis_values: point.to_vec(),
        value: None,
        t_ns: None,
        magnon_trunc: n,
        error: Some(e.to_string()),
    };
    let mut scenario = match cfg.scenario_at(point) {
        Ok(s) => s,
        Err(e) => return failed(cfg.base.params.magnon_trunc, e),
    };
    let cap = 2 * scenario.params.magnon_trunc;
    loop {
        let n = scenario.params.magnon_trunc;
        match run_scenario(&scenario) {
            Ok(series) => {
                let (value, t) = reduce_series(&series, cfg.reduce);
                return SweepPoint {
                    axis_values: point.to_vec(),
                    value: Some(value),
                    t_ns: Some(t),
                    magnon_trunc: n,
                    error: None,
                };
            }
            Err(Error::Truncation(_)) if n + SWEEP_TRUNC_STEP <= cap => {
                scenario.params.magnon_trunc = n + SWEEP_TRUNC_STEP;
            }
            Err(e) => return failed(n, e),
        }
    }
}

/// Runs every grid point, concurrently on `threads` workers (0 = all cores).
/// Rows come back in grid order whatever the completion order.
pub fn run_sweep(cfg: &SweepConfig, threads: usize) -> Result<SweepResult> {
    cfg.validate()?;
    let grid = cfg.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start worker pool: {e}")))?;
    let points = pool.install(|| grid.par_iter().map(|pt| sweep_point(cfg, pt)).collect());
    Ok(SweepResult {
        axis_columns: cfg.axes.iter().map(|a| a.column()).collect(),
        value_column: cfg.reduce.column().to_string(),
        points,
    })
}

// ---------------------------------------------------------------------------
// Wigner snapshots

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WignerSidecar {
    pub t_ns: f64,
    #[serde(rename = "V_min")]
    pub v_min: f64,
    pub theta_opt: f64,
    #[serde(rename = "S_dB")]
    pub s_db: f64,
    /// Riemann sum of the emitted grid.
    pub integral: f64,
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerOutput {
    pub grid: WignerGrid,
    pub sidecar: WignerSidecar,
}

impl WignerOutput {
    pub fn table(&self) -> Table {
        let mut table = Table::new(["x", "p", "W"].map(String::from).to_vec());
        for (ix, x) in self.grid.x_axis.iter().enumerate() {
            for (ip, p) in self.grid.p_axis.iter().enumerate() {
                table.push(vec![Cell::Num(*x), Cell::Num(*p), Cell::Num(self.grid.at(ix, ip))]);
            }
        }
        table
    }
}

pub fn emit_wigner(cfg: &WignerConfig) -> Result<WignerOutput> {
    cfg.validate()?;
    let times_ns = if cfg.t > 0.0 { vec![0.0, cfg.t] } else { vec![0.0] };
    let sim = simulate_at(&cfg.scenario, &times_ns)?;
    let (rho_m, excitation, purity) = sim.reduced(times_ns.len() - 1)?;
    let scalars = scalar_observables_from_reduced(&rho_m, Some(excitation), purity)?;
    let grid = wigner(&rho_m, &cfg.grid)?;
    debug_assert!((squeezing_db(scalars.v_min)? - scalars.s_db).abs() < 1e-12);
    let sidecar = WignerSidecar {
        t_ns: cfg.t,
        v_min: scalars.v_min,
        theta_opt: scalars.theta_opt,
        s_db: scalars.s_db,
        integral: grid.integral(),
        peak: grid.max(),
    };
    Ok(WignerOutput { grid, sidecar })
}
