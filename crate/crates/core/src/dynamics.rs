//! Lindblad and Schrödinger integration with fixed-step RK4 and step-halving
//! verification.
//!
//! The integrators share one step-size contract: the base step satisfies
//! `h · max(‖H‖, |phase rates|, collapse rates) ≤ 0.02`, the run is repeated
//! at `h/2`, and the finer result is accepted once successive runs agree to
//! `1e-6` in the max-entry norm over all snapshots. Up to four halvings are
//! attempted.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DerivedParams, SystemParams, TimeDependentHamiltonian};
use crate::operators::{
    embed, fock_annihilation, hermitian_spectral_norm, sigma_minus, ComplexMatrix, Factor, HilbertLayout,
};

/// A collapse operator `o` with rate `r`, contributing `r·(oρo† − ½{o†o, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseTerm {
    pub op: ComplexMatrix,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    pub hamiltonian: TimeDependentHamiltonian,
    pub collapse_terms: Vec<CollapseTerm>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: TimeDependentHamiltonian, collapse_terms: Vec<CollapseTerm>) -> Result<Self> {
        let n = hamiltonian.dim();
        for term in &collapse_terms {
            if !(term.rate >= 0.0 && term.rate.is_finite()) {
                return Err(Error::InvalidInput(format!("collapse rate must be non-negative, got {}", term.rate)));
            }
            if term.op.rows() != n || term.op.cols() != n {
                return Err(Error::InvalidDimension(format!(
                    "{}x{} collapse operator against a Hamiltonian of dimension {n}",
                    term.op.rows(),
                    term.op.cols()
                )));
            }
        }
        Ok(Self { hamiltonian, collapse_terms })
    }

    pub fn unitary(hamiltonian: TimeDependentHamiltonian) -> Self {
        Self { hamiltonian, collapse_terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}

/// `(m, κ(n̄_m+1)), (m†, κn̄_m), (σ⁻, γ(n̄_q+1)), (σ⁺, γn̄_q)`, restricted to the
/// factors present in `layout`.
pub fn standard_collapse_terms(
    p: &SystemParams,
    d: &DerivedParams,
    layout: &HilbertLayout,
) -> Result<Vec<CollapseTerm>> {
    collapse_terms_with_occupations(p, d.nbar_m, d.nbar_q, layout)
}

/// As [`standard_collapse_terms`] with explicit thermal occupations, for
/// configurations where χ (and hence [`DerivedParams`]) is undefined.
pub fn collapse_terms_with_occupations(
    p: &SystemParams,
    nbar_m: f64,
    nbar_q: f64,
    layout: &HilbertLayout,
) -> Result<Vec<CollapseTerm>> {
    let m = embed(&fock_annihilation(layout.magnon_dim())?, Factor::Magnon, layout)?;
    let md = m.dagger();
    let mut terms = vec![
        CollapseTerm { op: m, rate: p.kappa * (nbar_m + 1.0) },
        CollapseTerm { op: md, rate: p.kappa * nbar_m },
    ];
    if layout.has(Factor::Qubit) {
        let sm = embed(&sigma_minus(), Factor::Qubit, layout)?;
        let sp = sm.dagger();
        terms.push(CollapseTerm { op: sm, rate: p.gamma * (nbar_q + 1.0) });
        terms.push(CollapseTerm { op: sp, rate: p.gamma * nbar_q });
    }
    Ok(terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorSettings {
    /// Upper bound on `h · (fastest rate)` for the base step.
    pub max_phase_per_step: f64,
    /// Required agreement between successive halvings, max-entry norm.
    pub tolerance: f64,
    pub max_halvings: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self { max_phase_per_step: 0.02, tolerance: 1e-6, max_halvings: 4 }
    }
}

/// Density-matrix snapshots from [`evolve_master`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    /// Largest step of the accepted (finest) run, seconds.
    pub step_size_used: f64,
    pub truncation_used: usize,
    pub halvings: usize,
    /// Max-entry difference between the accepted run and the previous one.
    pub residual: f64,
    /// Largest `‖ρ − ρ†‖_max` seen before per-step symmetrization.
    pub max_hermiticity_defect: f64,
}

impl EvolutionRecord {
    /// Checks trace, Hermiticity and positivity of every snapshot with the
    /// integration tolerances (trace and eigenvalues to 1e-6, Hermiticity to 1e-8).
    pub fn check_physical(&self) -> Result<()> {
        for (t, rho) in self.times.iter().zip(&self.states) {
            rho.check_density_matrix(1e-8, 1e-6, 1e-6)
                .map_err(|e| Error::InvalidState(format!("snapshot at t = {t:e} s: {e}")))?;
        }
        if self.max_hermiticity_defect > 1e-8 {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {:.3e} before symmetrization",
                self.max_hermiticity_defect
            )));
        }
        Ok(())
    }
}

/// State-vector snapshots from [`evolve_unitary`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateRecord {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub step_size_used: f64,
    pub truncation_used: usize,
    pub halvings: usize,
    pub residual: f64,
}

// ---------------------------------------------------------------------------
// Sparse evaluation of the generator

/// CSR matrix whose values are a time-dependent combination of fixed value
/// arrays over a shared sparsity pattern.
struct ModulatedSparse {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    /// One value array per term, aligned with `col`.
    term_values: Vec<Vec<C64>>,
    term_rates: Vec<f64>,
}

impl ModulatedSparse {
    /// `terms` are `(matrix, phase rate)`; a rate of zero marks a static term.
    fn new(n: usize, terms: &[(ComplexMatrix, f64)]) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        row_ptr.push(0);
        for r in 0..n {
            for c in 0..n {
                if terms.iter().any(|(m, _)| m[(r, c)] != C64::new(0.0, 0.0)) {
                    col.push(c);
                }
            }
            row_ptr.push(col.len());
        }
        let term_values = terms
            .iter()
            .map(|(m, _)| {
                let mut vals = Vec::with_capacity(col.len());
                for r in 0..n {
                    for &c in &col[row_ptr[r]..row_ptr[r + 1]] {
                        vals.push(m[(r, c)]);
                    }
                }
                vals
            })
            .collect();
        Self { n, row_ptr, col, term_values, term_rates: terms.iter().map(|(_, w)| *w).collect() }
    }

    fn values_at(&self, t: f64, out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (vals, &rate) in self.term_values.iter().zip(&self.term_rates) {
            let f = if rate == 0.0 { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, rate * t) };
            for (o, v) in out.iter_mut().zip(vals) {
                *o += f * v;
            }
        }
    }

    fn is_static(&self) -> bool {
        self.term_rates.iter().all(|&r| r == 0.0)
    }
}

/// `out = A · X` for CSR `A` (pattern from `sp`, values `vals`) and dense
/// row-major `X` with `width` columns.
fn sparse_dense(sp: &ModulatedSparse, vals: &[C64], x: &[C64], width: usize, out: &mut [C64]) {
    for r in 0..sp.n {
        let out_row = &mut out[r * width..(r + 1) * width];
        out_row.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for idx in sp.row_ptr[r]..sp.row_ptr[r + 1] {
            let a = vals[idx];
            let x_row = &x[sp.col[idx] * width..(sp.col[idx] + 1) * width];
            for (o, b) in out_row.iter_mut().zip(x_row) {
                *o += a * b;
            }
        }
    }
}

/// Right-hand side of the master equation, written with the effective
/// non-Hermitian `K = H − (i/2)Σ r o†o` as `−i(Kρ − (Kρ)†) + Σ r oρo†`.
struct MasterRhs {
    n: usize,
    k: ModulatedSparse,
    jumps: Vec<(ModulatedSparse, f64)>,
    k_vals: Vec<C64>,
    y: Vec<C64>,
    w: Vec<C64>,
    wt: Vec<C64>,
    z: Vec<C64>,
}

impl MasterRhs {
    fn new(gen: &LindbladGenerator) -> Self {
        let n = gen.dim();
        let mut terms: Vec<(ComplexMatrix, f64)> = Vec::new();
        let mut static_part = ComplexMatrix::zeros(n, n);
        for term in gen.hamiltonian.terms() {
            let rate = term.modulation.rate();
            if rate == 0.0 {
                static_part += &term.op;
            } else {
                terms.push((term.op.clone(), rate));
            }
        }
        let mut jumps = Vec::new();
        for CollapseTerm { op, rate } in &gen.collapse_terms {
            if *rate == 0.0 {
                continue;
            }
            let odo = &op.dagger() * op;
            static_part += &odo.scale(C64::new(0.0, -0.5 * rate));
            jumps.push((ModulatedSparse::new(n, &[(op.clone(), 0.0)]), *rate));
        }
        terms.insert(0, (static_part, 0.0));
        let k = ModulatedSparse::new(n, &terms);
        let nnz = k.col.len();
        let mut k_vals = vec![C64::new(0.0, 0.0); nnz];
        if k.is_static() {
            k.values_at(0.0, &mut k_vals);
        }
        Self {
            n,
            k,
            jumps,
            k_vals,
            y: vec![C64::new(0.0, 0.0); n * n],
            w: vec![C64::new(0.0, 0.0); n * n],
            wt: vec![C64::new(0.0, 0.0); n * n],
            z: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    fn eval(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        let n = self.n;
        if !self.k.is_static() {
            self.k.values_at(t, &mut self.k_vals);
        }
        sparse_dense(&self.k, &self.k_vals, rho, n, &mut self.y);
        let minus_i = C64::new(0.0, -1.0);
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] = minus_i * (self.y[r * n + c] - self.y[c * n + r].conj());
            }
        }
        for (op, rate) in &self.jumps {
            let vals = &op.term_values[0];
            sparse_dense(op, vals, rho, n, &mut self.w);
            // wt = w†, so o·wt = oρo†.
            for r in 0..n {
                for c in 0..n {
                    self.wt[c * n + r] = self.w[r * n + c].conj();
                }
            }
            sparse_dense(op, vals, &self.wt, n, &mut self.z);
            for (o, z) in out.iter_mut().zip(&self.z) {
                *o += *rate * z;
            }
        }
    }
}

struct SchrodingerRhs {
    h: ModulatedSparse,
    vals: Vec<C64>,
}

impl SchrodingerRhs {
    fn new(h: &TimeDependentHamiltonian) -> Self {
        let terms: Vec<(ComplexMatrix, f64)> =
            h.terms().iter().map(|t| (t.op.clone(), t.modulation.rate())).collect();
        let sp = ModulatedSparse::new(h.dim(), &terms);
        let mut vals = vec![C64::new(0.0, 0.0); sp.col.len()];
        if sp.is_static() {
            sp.values_at(0.0, &mut vals);
        }
        Self { h: sp, vals }
    }

    fn eval(&mut self, t: f64, psi: &[C64], out: &mut [C64]) {
        if !self.h.is_static() {
            self.h.values_at(t, &mut self.vals);
        }
        sparse_dense(&self.h, &self.vals, psi, 1, out);
        for o in out.iter_mut() {
            *o = C64::new(o.im, -o.re);
        }
    }
}

// ---------------------------------------------------------------------------
// RK4 driver

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidInput("no output times requested".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidInput(format!("output times must start at 0, got {}", times[0])));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("output times must be finite and strictly ascending".into()));
    }
    Ok(())
}

struct RunOutput {
    snapshots: Vec<Vec<C64>>,
    max_step: f64,
    max_defect: f64,
}

/// Integrates `y' = f(t, y)` with classical RK4, taking `ceil(Δt/h_max)·2^level`
/// equal steps between consecutive output times. `post_step` may project the
/// state after each step and returns a defect measure that is tracked.
fn rk4_run(
    times: &[f64],
    y0: &[C64],
    h_max: f64,
    level: usize,
    rhs: &mut dyn FnMut(f64, &[C64], &mut [C64]),
    post_step: &mut dyn FnMut(&mut [C64]) -> f64,
) -> RunOutput {
    let len = y0.len();
    let mut y = y0.to_vec();
    let mut k1 = vec![C64::new(0.0, 0.0); len];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let mut snapshots = Vec::with_capacity(times.len());
    snapshots.push(y.clone());
    let mut max_step: f64 = 0.0;
    let mut max_defect: f64 = 0.0;
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let span = t1 - t0;
        let steps = ((span / h_max).ceil().max(1.0) as usize) << level;
        let h = span / steps as f64;
        max_step = max_step.max(h);
        for s in 0..steps {
            let t = t0 + s as f64 * h;
            rhs(t, &y, &mut k1);
            for i in 0..len {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            rhs(t + 0.5 * h, &tmp, &mut k2);
            for i in 0..len {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            rhs(t + 0.5 * h, &tmp, &mut k3);
            for i in 0..len {
                tmp[i] = y[i] + h * k3[i];
            }
            rhs(t + h, &tmp, &mut k4);
            let sixth = h / 6.0;
            for i in 0..len {
                y[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
            max_defect = max_defect.max(post_step(&mut y));
        }
        snapshots.push(y.clone());
    }
    RunOutput { snapshots, max_step, max_defect }
}

fn max_snapshot_diff(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

struct Converged {
    run: RunOutput,
    halvings: usize,
    residual: f64,
}

fn run_with_halving(
    settings: &IntegratorSettings,
    mut run: impl FnMut(usize) -> RunOutput,
) -> Result<Converged> {
    let mut prev = run(0);
    let mut residual = f64::INFINITY;
    for level in 1..=settings.max_halvings {
        let cur = run(level);
        residual = max_snapshot_diff(&prev.snapshots, &cur.snapshots);
        if residual <= settings.tolerance {
            return Ok(Converged { run: cur, halvings: level, residual });
        }
        prev = cur;
    }
    Err(Error::NonConvergence { halvings: settings.max_halvings, residual })
}

/// Spectral-norm estimate of `H(t)`: the largest `‖H(t)‖₂` over eight samples
/// spanning one period of the fastest modulation.
pub fn hamiltonian_norm_estimate(h: &TimeDependentHamiltonian) -> Result<f64> {
    let rate = h.max_modulation_rate();
    if h.is_static() || rate == 0.0 {
        return hermitian_spectral_norm(&h.evaluate(0.0));
    }
    let period = 2.0 * std::f64::consts::PI / rate;
    let mut worst: f64 = 0.0;
    for k in 0..8 {
        worst = worst.max(hermitian_spectral_norm(&h.evaluate(period * k as f64 / 8.0))?);
    }
    Ok(worst)
}

fn base_step(gen: &LindbladGenerator, settings: &IntegratorSettings) -> Result<f64> {
    let mut fastest = hamiltonian_norm_estimate(&gen.hamiltonian)?.max(gen.hamiltonian.max_modulation_rate());
    for term in &gen.collapse_terms {
        fastest = fastest.max(term.rate);
    }
    Ok(if fastest > 0.0 { settings.max_phase_per_step / fastest } else { f64::INFINITY })
}

/// Integrates the master equation and returns `ρ(t)` at each requested time.
pub fn evolve_master(gen: &LindbladGenerator, rho0: &ComplexMatrix, times: &[f64]) -> Result<EvolutionRecord> {
    evolve_master_with(gen, rho0, times, &IntegratorSettings::default())
}

pub fn evolve_master_with(
    gen: &LindbladGenerator,
    rho0: &ComplexMatrix,
    times: &[f64],
    settings: &IntegratorSettings,
) -> Result<EvolutionRecord> {
    let n = gen.dim();
    if rho0.rows() != n || rho0.cols() != n {
        return Err(Error::InvalidState(format!(
            "{}x{} initial state for a generator of dimension {n}",
            rho0.rows(),
            rho0.cols()
        )));
    }
    rho0.check_density_matrix(crate::operators::HERMITIAN_TOL, crate::operators::TRACE_TOL, crate::operators::POSITIVITY_TOL)?;
    check_times(times)?;
    let h_max = base_step(gen, settings)?;
    let mut rhs = MasterRhs::new(gen);
    let converged = run_with_halving(settings, |level| {
        let mut f = |t: f64, y: &[C64], out: &mut [C64]| rhs.eval(t, y, out);
        let mut symmetrize = |y: &mut [C64]| {
            let mut defect: f64 = 0.0;
            for r in 0..n {
                for c in r..n {
                    let a = y[r * n + c];
                    let b = y[c * n + r];
                    defect = defect.max((a - b.conj()).norm());
                    let avg = 0.5 * (a + b.conj());
                    y[r * n + c] = avg;
                    y[c * n + r] = avg.conj();
                }
            }
            defect
        };
        rk4_run(times, rho0.as_slice(), h_max, level, &mut f, &mut symmetrize)
    })?;
    let states = converged
        .run
        .snapshots
        .into_iter()
        .map(|v| ComplexMatrix::from_vec(n, n, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvolutionRecord {
        times: times.to_vec(),
        states,
        step_size_used: converged.run.max_step,
        truncation_used: gen.hamiltonian.layout().magnon_dim(),
        halvings: converged.halvings,
        residual: converged.residual,
        max_hermiticity_defect: converged.run.max_defect,
    })
}

/// Integrates the Schrödinger equation `iψ' = H(t)ψ`.
pub fn evolve_unitary(h: &TimeDependentHamiltonian, psi0: &[C64], times: &[f64]) -> Result<StateRecord> {
    evolve_unitary_with(h, psi0, times, &IntegratorSettings::default())
}

pub fn evolve_unitary_with(
    h: &TimeDependentHamiltonian,
    psi0: &[C64],
    times: &[f64],
    settings: &IntegratorSettings,
) -> Result<StateRecord> {
    if psi0.len() != h.dim() {
        return Err(Error::InvalidState(format!("ket of length {} for dimension {}", psi0.len(), h.dim())));
    }
    let norm: f64 = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidState(format!("initial ket has norm² {norm}")));
    }
    check_times(times)?;
    let gen = LindbladGenerator::unitary(h.clone());
    let h_max = base_step(&gen, settings)?;
    let mut rhs = SchrodingerRhs::new(h);
    let converged = run_with_halving(settings, |level| {
        let mut f = |t: f64, y: &[C64], out: &mut [C64]| rhs.eval(t, y, out);
        rk4_run(times, psi0, h_max, level, &mut f, &mut |_| 0.0)
    })?;
    Ok(StateRecord {
        times: times.to_vec(),
        states: converged.run.snapshots,
        step_size_used: converged.run.max_step,
        truncation_used: h.layout().magnon_dim(),
        halvings: converged.halvings,
        residual: converged.residual,
    })
}

// ---------------------------------------------------------------------------
// Truncation convergence

/// Drift below which successive truncations are considered converged.
pub const TRUNCATION_DRIFT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationRow {
    pub magnon_trunc: usize,
    pub value: f64,
    /// `|value − previous value|`; absent for the first row.
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationScan {
    pub rows: Vec<TruncationRow>,
    /// Smallest truncation from which every later drift is within tolerance.
    pub converged_at: Option<usize>,
}

impl TruncationScan {
    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }
}

/// Evaluates `observable` (typically `V_min` at the final time) at each
/// truncation and reports the drift between successive values.
pub fn truncation_scan(
    truncations: &[usize],
    mut observable: impl FnMut(usize) -> Result<f64>,
) -> Result<TruncationScan> {
    if truncations.len() < 2 {
        return Err(Error::InvalidInput("truncation scan needs at least two truncations".into()));
    }
    let mut rows: Vec<TruncationRow> = Vec::with_capacity(truncations.len());
    for &n in truncations {
        let value = observable(n)?;
        let drift = rows.last().map(|prev| (value - prev.value).abs());
        rows.push(TruncationRow { magnon_trunc: n, value, drift });
    }
    let mut converged_at = None;
    for i in (1..rows.len()).rev() {
        if rows[i].drift.is_some_and(|d| d <= TRUNCATION_DRIFT_TOL) {
            converged_at = Some(rows[i - 1].magnon_trunc);
        } else {
            break;
        }
    }
    Ok(TruncationScan { rows, converged_at })
}
