//! Squeezing diagnostics of the magnon mode: quadrature covariance matrix,
//! minimum variance, optimal angle, squeezing in dB and the Wigner function.
//!
//! Quadratures are `X₁ = (m + m†)/√2` and `X₂ = i(m† − m)/√2`, so the vacuum
//! variance is ½ in every direction.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{partial_trace, partial_trace_pure, ComplexMatrix, Factor, HilbertLayout};

/// Vacuum variance of any quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

// Snapshot tolerances: integrated states carry small trace and positivity
// drift, so these match the integrator's guarantees rather than the strict
// density-matrix tolerances of the operator layer.
const STATE_HERM_TOL: f64 = 1e-8;
const STATE_TRACE_TOL: f64 = 1e-6;
const STATE_POS_TOL: f64 = 1e-6;

/// Symmetric 2×2 quadrature covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCM {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl QuadratureCM {
    pub fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    /// Variance of `cos θ·X₁ + sin θ·X₂`.
    pub fn variance_at(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * c * self.s11 + s * s * self.s22 + 2.0 * s * c * self.s12
    }

    /// CM of the quadratures rotated by `phi`.
    pub fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self {
            s11: c * c * self.s11 + 2.0 * s * c * self.s12 + s * s * self.s22,
            s12: (c * c - s * s) * self.s12 + s * c * (self.s22 - self.s11),
            s22: s * s * self.s11 - 2.0 * s * c * self.s12 + c * c * self.s22,
        }
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.s11 >= 0.0 && self.s22 >= 0.0 && self.det() >= -1e-9
    }
}

/// First and second moments `⟨m⟩`, `⟨m²⟩`, `⟨m†m⟩` of a magnon density matrix.
fn magnon_moments(rho: &ComplexMatrix) -> (C64, C64, f64) {
    let n = rho.rows();
    let mut m1 = C64::new(0.0, 0.0);
    let mut m2 = C64::new(0.0, 0.0);
    let mut num = 0.0;
    for k in 0..n {
        num += k as f64 * rho[(k, k)].re;
        // Tr(ρ m) = Σ_k ρ_{k+1,k} √(k+1).
        if k + 1 < n {
            m1 += rho[(k + 1, k)] * ((k + 1) as f64).sqrt();
        }
        if k + 2 < n {
            m2 += rho[(k + 2, k)] * (((k + 1) * (k + 2)) as f64).sqrt();
        }
    }
    (m1, m2, num)
}

/// `σ_jk = ½⟨X_jX_k + X_kX_j⟩ − ⟨X_j⟩⟨X_k⟩` of a reduced magnon state.
///
/// Second moments use the canonical commutator `[m, m†] = 1`, so the top
/// truncation level does not pick up the spurious `−N` of truncated matrices.
pub fn covariance_matrix(rho_magnon: &ComplexMatrix) -> Result<QuadratureCM> {
    rho_magnon.check_density_matrix(STATE_HERM_TOL, STATE_TRACE_TOL, STATE_POS_TOL)?;
    let (m1, m2, num) = magnon_moments(rho_magnon);
    let x1 = 2f64.sqrt() * m1.re;
    let x2 = 2f64.sqrt() * m1.im;
    Ok(QuadratureCM {
        s11: num + 0.5 + m2.re - x1 * x1,
        s12: m2.im - x1 * x2,
        s22: num + 0.5 - m2.re - x2 * x2,
    })
}

/// Smaller eigenvalue of the CM.
pub fn min_variance(cm: &QuadratureCM) -> f64 {
    let mean = 0.5 * (cm.s11 + cm.s22);
    let radius = (0.25 * (cm.s11 - cm.s22).powi(2) + cm.s12 * cm.s12).sqrt();
    mean - radius
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalAngle {
    /// Quadrature angle in `(−π/2, π/2]` attaining the minimum variance.
    pub theta: f64,
    /// Set when every quadrature has the same variance; `theta` is then 0.
    pub isotropic: bool,
}

/// Angle θ minimizing `Var(cos θ·X₁ + sin θ·X₂)`.
pub fn optimal_angle(cm: &QuadratureCM) -> OptimalAngle {
    let radius = (0.25 * (cm.s11 - cm.s22).powi(2) + cm.s12 * cm.s12).sqrt();
    if radius <= 1e-14 * (cm.s11.abs() + cm.s22.abs()).max(f64::MIN_POSITIVE) {
        return OptimalAngle { theta: 0.0, isotropic: true };
    }
    let mut theta = 0.5 * (2.0 * cm.s12).atan2(cm.s11 - cm.s22) - FRAC_PI_2;
    // The arctangent branch can land on the anti-squeezed axis.
    if cm.variance_at(theta + FRAC_PI_2) < cm.variance_at(theta) {
        theta += FRAC_PI_2;
    }
    while theta <= -FRAC_PI_2 {
        theta += PI;
    }
    while theta > FRAC_PI_2 {
        theta -= PI;
    }
    OptimalAngle { theta, isotropic: false }
}

/// `S = −10·log₁₀(V_min / ½)`; positive below vacuum noise.
pub fn squeezing_db(v_min: f64) -> Result<f64> {
    if !(v_min > 0.0) {
        return Err(Error::InvalidInput(format!("variance must be positive, got {v_min}")));
    }
    Ok(-10.0 * (v_min / VACUUM_VARIANCE).log10())
}

// ---------------------------------------------------------------------------
// Wigner function

/// Rectangular phase-space grid in quadrature units (`α = (x + ip)/√2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
    /// Fock levels kept in the displaced-parity sum; chosen from the grid
    /// extent when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_cutoff: Option<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -4.0, x_max: 4.0, nx: 101, p_min: -4.0, p_max: 4.0, np: 101, fock_cutoff: None }
    }
}

impl GridSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            nx: points,
            p_min: -half_width,
            p_max: half_width,
            np: points,
            fock_cutoff: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bounds = [self.x_min, self.x_max, self.p_min, self.p_max];
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("grid bounds must be finite".into()));
        }
        if self.nx < 2 || self.np < 2 || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::InvalidInput("grid needs at least 2 points per axis and increasing bounds".into()));
        }
        Ok(())
    }

    fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect()
    }

    /// Largest |α| on the grid.
    fn max_alpha(&self) -> f64 {
        let x = self.x_min.abs().max(self.x_max.abs());
        let p = self.p_min.abs().max(self.p_max.abs());
        ((x * x + p * p) / 2.0).sqrt()
    }
}

/// Norm lost by the finite displaced-parity sum beyond which evaluation fails.
pub const WIGNER_NORM_LOSS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// `W(x_i, p_j)` at index `i·np + j`.
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p_axis.len() + ip]
    }

    /// Riemann sum `Σ W·dx·dp`.
    pub fn integral(&self) -> f64 {
        let dx = self.x_axis[1] - self.x_axis[0];
        let dp = self.p_axis[1] - self.p_axis[0];
        self.values.iter().sum::<f64>() * dx * dp
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Real and imaginary parts of `α^k` for `k < count`.
fn powers(z: C64, count: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(count);
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..count {
        out.push(acc);
        acc *= z;
    }
    out
}

/// Displacement matrix elements `⟨j|D(α)|n⟩` for `j < rows`, `n < cols`,
/// column-major (`out[n·rows + j]`), via associated Laguerre polynomials:
/// `⟨a+k|D|a⟩ = e^{−|α|²/2} √(a!/(a+k)!) α^k L_a^{(k)}(|α|²)` and
/// `⟨a|D|a+k⟩ = e^{−|α|²/2} √(a!/(a+k)!) (−α*)^k L_a^{(k)}(|α|²)`.
pub fn displacement_elements(alpha: C64, rows: usize, cols: usize) -> Vec<C64> {
    let x = alpha.norm_sqr();
    let r = alpha.norm();
    let pre = (-0.5 * x).exp();
    let max_k = rows.max(cols);
    let pow_lower = powers(alpha / r.max(f64::MIN_POSITIVE), max_k);
    let pow_upper = powers(-alpha.conj() / r.max(f64::MIN_POSITIVE), max_k);
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    let max_a = rows.min(cols);
    let mut lag = vec![0.0; max_a];
    for k in 0..max_k {
        // L_a^{(k)}(x) for a < max_a by upward recurrence in the degree.
        let kf = k as f64;
        for a in 0..max_a {
            lag[a] = match a {
                0 => 1.0,
                1 => 1.0 + kf - x,
                _ => {
                    let af = (a - 1) as f64;
                    ((2.0 * af + 1.0 + kf - x) * lag[a - 1] - (af + kf) * lag[a - 2]) / (af + 1.0)
                }
            };
        }
        // c = r^k √(a!/(a+k)!), built multiplicatively to stay in range.
        for a in 0..max_a {
            let mut c = pre;
            for i in 1..=k {
                c *= r / ((a + i) as f64).sqrt();
            }
            let mag = c * lag[a];
            let (lo_row, lo_col) = (a + k, a);
            if lo_row < rows && lo_col < cols {
                out[lo_col * rows + lo_row] = pow_lower[k] * mag;
            }
            if k > 0 {
                let (up_row, up_col) = (a, a + k);
                if up_row < rows && up_col < cols {
                    out[up_col * rows + up_row] = pow_upper[k] * mag;
                }
            }
        }
    }
    out
}

fn default_cutoff(state_dim: usize, max_alpha: f64) -> usize {
    state_dim + (max_alpha * max_alpha + 10.0 * max_alpha).ceil() as usize + 20
}

/// Wigner function of a magnon state from the displaced parity
/// `Σ_n (−1)^n ⟨n|D†(α) ρ D(α)|n⟩`. The parity carries a `1/π` prefactor,
/// not the `2/π` of the `d²α` measure, so that `∫W dx dp = 1` with
/// `dx dp = 2 d²α` and the vacuum peak is `1/π`.
pub fn wigner(rho_magnon: &ComplexMatrix, grid: &GridSpec) -> Result<WignerGrid> {
    grid.validate()?;
    rho_magnon.check_density_matrix(STATE_HERM_TOL, STATE_TRACE_TOL, STATE_POS_TOL)?;
    let n = rho_magnon.rows();
    let cutoff = grid.fock_cutoff.unwrap_or_else(|| default_cutoff(n, grid.max_alpha()));
    if cutoff < n {
        return Err(Error::Truncation(format!("Wigner cutoff {cutoff} is below the state dimension {n}")));
    }
    let trace = rho_magnon.trace().re;
    let x_axis = GridSpec::axis(grid.x_min, grid.x_max, grid.nx);
    let p_axis = GridSpec::axis(grid.p_min, grid.p_max, grid.np);
    let points: Vec<(f64, f64)> = x_axis.iter().flat_map(|&x| p_axis.iter().map(move |&p| (x, p))).collect();
    let evaluated: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&(x, p)| displaced_parity(rho_magnon, C64::new(x, p) / 2f64.sqrt(), cutoff))
        .collect();
    let mut values = Vec::with_capacity(evaluated.len());
    for ((x, p), (w, kept)) in points.iter().zip(evaluated) {
        let loss = (trace - kept).abs();
        if loss > WIGNER_NORM_LOSS_TOL {
            return Err(Error::Truncation(format!(
                "displacement to (x, p) = ({x}, {p}) leaves {loss:.2e} of the norm beyond {cutoff} Fock levels"
            )));
        }
        values.push(w);
    }
    Ok(WignerGrid { x_axis, p_axis, values })
}

/// Returns `(W(α), Σ_n ⟨n|D†ρD|n⟩)` with `n < cutoff`.
fn displaced_parity(rho: &ComplexMatrix, alpha: C64, cutoff: usize) -> (f64, f64) {
    let n = rho.rows();
    let d = displacement_elements(alpha, n, cutoff);
    let mut parity_sum = 0.0;
    let mut kept = 0.0;
    let mut u = vec![C64::new(0.0, 0.0); n];
    for col in 0..cutoff {
        let v = &d[col * n..(col + 1) * n];
        for (i, ui) in u.iter_mut().enumerate() {
            let row = &rho.as_slice()[i * n..(i + 1) * n];
            *ui = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        let val: f64 = v.iter().zip(&u).map(|(a, b)| (a.conj() * b).re).sum();
        kept += val;
        parity_sum += if col % 2 == 0 { val } else { -val };
    }
    (parity_sum / PI, kept)
}

// ---------------------------------------------------------------------------
// Per-snapshot scalars

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarObservables {
    pub v_min: f64,
    pub theta_opt: f64,
    pub s_db: f64,
    pub n_magnon: f64,
    /// `⟨e|ρ_q|e⟩`; absent when the layout has no qubit.
    pub qubit_excitation: Option<f64>,
    /// `Tr ρ²` of the full state.
    pub purity: f64,
}

/// Diagnostics from an already reduced magnon state.
pub fn scalar_observables_from_reduced(
    rho_m: &ComplexMatrix,
    qubit_excitation: Option<f64>,
    purity: f64,
) -> Result<ScalarObservables> {
    let cm = covariance_matrix(rho_m)?;
    let v_min = min_variance(&cm);
    let (_, _, n_magnon) = magnon_moments(rho_m);
    Ok(ScalarObservables {
        v_min,
        theta_opt: optimal_angle(&cm).theta,
        s_db: squeezing_db(v_min)?,
        n_magnon,
        qubit_excitation,
        purity,
    })
}

/// All scalar diagnostics of a full-system density matrix.
pub fn scalar_observables(rho: &ComplexMatrix, layout: &HilbertLayout) -> Result<ScalarObservables> {
    let rho_m = if layout.factors().len() == 1 { rho.clone() } else { partial_trace(rho, Factor::Magnon, layout)? };
    let excitation = if layout.has(Factor::Qubit) {
        Some(partial_trace(rho, Factor::Qubit, layout)?[(0, 0)].re)
    } else {
        None
    };
    scalar_observables_from_reduced(&rho_m, excitation, rho.purity())
}

/// As [`scalar_observables`] for a pure state.
pub fn scalar_observables_pure(psi: &[C64], layout: &HilbertLayout) -> Result<ScalarObservables> {
    let rho_m = partial_trace_pure(psi, Factor::Magnon, layout)?;
    let excitation = if layout.has(Factor::Qubit) {
        Some(partial_trace_pure(psi, Factor::Qubit, layout)?[(0, 0)].re)
    } else {
        None
    };
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    scalar_observables_from_reduced(&rho_m, excitation, norm * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{expm, fock_annihilation, fock_ket, kron_vec, qubit_excited};
    use proptest::prelude::*;

    fn coherent_dm(n: usize, alpha: C64) -> ComplexMatrix {
        let mut v = Vec::with_capacity(n);
        let mut amp = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for k in 0..n {
            v.push(amp);
            amp = amp * alpha / ((k + 1) as f64).sqrt();
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        ComplexMatrix::outer(&v.iter().map(|z| z / norm.sqrt()).collect::<Vec<_>>())
    }

    /// Squeezed vacuum `S(r)|0⟩` with `S(r) = exp(r(m² − m†²)/2)`, squeezed along X₁.
    fn squeezed_vacuum(n: usize, r: f64) -> ComplexMatrix {
        let m = fock_annihilation(n).unwrap();
        let gen = (&(&m * &m) - &(&m.dagger() * &m.dagger())).scale_re(0.5 * r);
        let psi = expm(&gen).unwrap().apply(&fock_ket(n, 0).unwrap()).unwrap();
        ComplexMatrix::outer(&psi)
    }

    fn thermal_dm(n: usize, nbar: f64) -> ComplexMatrix {
        let q = nbar / (1.0 + nbar);
        let mut diag: Vec<C64> = (0..n).map(|k| C64::new(q.powi(k as i32) / (1.0 + nbar), 0.0)).collect();
        let total: f64 = diag.iter().map(|z| z.re).sum();
        diag.iter_mut().for_each(|z| *z /= total);
        ComplexMatrix::diagonal(&diag)
    }

    #[test]
    fn vacuum_and_coherent_covariance() {
        let vac = ComplexMatrix::outer(&fock_ket(10, 0).unwrap());
        let cm = covariance_matrix(&vac).unwrap();
        assert_eq!(cm, QuadratureCM { s11: 0.5, s12: 0.0, s22: 0.5 });
        let coh = covariance_matrix(&coherent_dm(60, C64::new(1.2, -0.7))).unwrap();
        assert!((coh.s11 - 0.5).abs() < 1e-10 && (coh.s22 - 0.5).abs() < 1e-10 && coh.s12.abs() < 1e-10);
    }

    #[test]
    fn squeezed_vacuum_covariance() {
        // Analytic: (½e^{−2r}, 0, ½e^{2r}).
        let r = 0.6;
        let cm = covariance_matrix(&squeezed_vacuum(60, r)).unwrap();
        assert!((cm.s11 - 0.5 * (-2.0 * r).exp()).abs() < 1e-10, "{cm:?}");
        assert!((cm.s22 - 0.5 * (2.0 * r).exp()).abs() < 1e-10);
        assert!(cm.s12.abs() < 1e-10);
        assert!((cm.det() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn covariance_rejects_non_state() {
        assert!(matches!(covariance_matrix(&ComplexMatrix::identity(3)), Err(Error::InvalidState(_))));
    }

    #[test]
    fn min_variance_cases() {
        assert_eq!(min_variance(&QuadratureCM { s11: 0.5, s12: 0.0, s22: 0.5 }), 0.5);
        assert!((min_variance(&QuadratureCM { s11: 0.3, s12: 0.0, s22: 0.7 }) - 0.3).abs() < 1e-15);
        let r: f64 = 0.4;
        let sq = QuadratureCM { s11: 0.5 * (-2.0 * r).exp(), s12: 0.0, s22: 0.5 * (2.0 * r).exp() };
        for phi in [0.1, 0.9, 2.3, -1.2] {
            assert!((min_variance(&sq.rotated(phi)) - 0.5 * (-2.0 * r).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_angle_cases() {
        let a = optimal_angle(&QuadratureCM { s11: 0.3, s12: 0.0, s22: 0.7 });
        assert!(a.theta.abs() < 1e-15 && !a.isotropic);
        let b = optimal_angle(&QuadratureCM { s11: 0.7, s12: 0.0, s22: 0.3 });
        assert!((b.theta.abs() - FRAC_PI_2).abs() < 1e-15);
        let c = optimal_angle(&QuadratureCM { s11: 0.5, s12: 0.0, s22: 0.5 });
        assert_eq!(c, OptimalAngle { theta: 0.0, isotropic: true });
    }

    #[test]
    fn squeezing_db_values() {
        assert_eq!(squeezing_db(0.5).unwrap(), 0.0);
        assert!((squeezing_db(0.31).unwrap() - 2.076).abs() < 1e-3);
        assert!((squeezing_db(0.05).unwrap() - 10.0).abs() < 1e-12);
        assert!(squeezing_db(0.0).is_err());
        assert!(squeezing_db(-0.1).is_err());
        let vac = ComplexMatrix::outer(&fock_ket(5, 0).unwrap());
        assert_eq!(squeezing_db(min_variance(&covariance_matrix(&vac).unwrap())).unwrap(), 0.0);
    }

    #[test]
    fn displacement_elements_match_matrix_exponential() {
        let n = 70;
        let alpha = C64::new(1.3, -0.8);
        let m = fock_annihilation(n).unwrap();
        let d = expm(&(&m.dagger().scale(alpha) - &m.scale(alpha.conj()))).unwrap();
        let rows = 12;
        let cols = 30;
        let fast = displacement_elements(alpha, rows, cols);
        for j in 0..rows {
            for k in 0..cols {
                assert!((fast[k * rows + j] - d[(j, k)]).norm() < 1e-10, "({j},{k})");
            }
        }
    }

    #[test]
    fn wigner_special_states() {
        let grid = GridSpec { x_min: -1.0, x_max: 1.0, nx: 3, p_min: -1.0, p_max: 1.0, np: 3, fock_cutoff: None };
        let vac = wigner(&ComplexMatrix::outer(&fock_ket(8, 0).unwrap()), &grid).unwrap();
        assert!((vac.at(1, 1) - 1.0 / PI).abs() < 1e-12);
        // Gaussian e^{−(x²+p²)}/π.
        assert!((vac.at(0, 2) - (-2.0f64).exp() / PI).abs() < 1e-12);
        let one = wigner(&ComplexMatrix::outer(&fock_ket(8, 1).unwrap()), &grid).unwrap();
        assert!((one.at(1, 1) + 1.0 / PI).abs() < 1e-12);
        let nbar = 0.7;
        let th = wigner(&thermal_dm(60, nbar), &grid).unwrap();
        assert!((th.at(1, 1) - 1.0 / (PI * (2.0 * nbar + 1.0))).abs() < 1e-9);
    }

    #[test]
    fn wigner_matches_double_displacement_identity() {
        // Independent route: W ∝ Σ_ij ρ_ij (−1)^i ⟨j|D(2α)|i⟩, with
        // D from the matrix exponential on a large truncation.
        let rho = squeezed_vacuum(20, 0.5);
        let big = 90;
        let m = fock_annihilation(big).unwrap();
        let grid = GridSpec { x_min: -2.0, x_max: 1.5, nx: 3, p_min: -0.5, p_max: 2.0, np: 4, fock_cutoff: None };
        let w = wigner(&rho, &grid).unwrap();
        for (ix, &x) in w.x_axis.iter().enumerate() {
            for (ip, &p) in w.p_axis.iter().enumerate() {
                let beta = C64::new(x, p) * 2f64.sqrt();
                let d = expm(&(&m.dagger().scale(beta) - &m.scale(beta.conj()))).unwrap();
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..20 {
                    for j in 0..20 {
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        acc += rho[(i, j)] * sign * d[(j, i)];
                    }
                }
                let oracle = acc.re / PI;
                assert!((w.at(ix, ip) - oracle).abs() < 1e-9, "({x},{p}): {} vs {oracle}", w.at(ix, ip));
            }
        }
    }

    #[test]
    fn wigner_default_grid_normalization() {
        let w = wigner(&squeezed_vacuum(30, 0.3), &GridSpec::default()).unwrap();
        assert!((w.integral() - 1.0).abs() < 2e-2, "{}", w.integral());
        let fine = wigner(&ComplexMatrix::outer(&fock_ket(30, 0).unwrap()), &GridSpec::square(5.0, 121)).unwrap();
        assert!((fine.integral() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn wigner_flags_small_cutoff() {
        let grid = GridSpec { fock_cutoff: Some(12), ..GridSpec::square(4.0, 5) };
        let err = wigner(&ComplexMatrix::outer(&fock_ket(10, 0).unwrap()), &grid).unwrap_err();
        assert!(matches!(err, Error::Truncation(_)));
    }

    #[test]
    fn scalar_observables_simple_states() {
        let layout = HilbertLayout::qubit_magnon(6).unwrap();
        let psi = kron_vec(&qubit_excited(), &fock_ket(6, 0).unwrap());
        let s = scalar_observables(&ComplexMatrix::outer(&psi), &layout).unwrap();
        assert_eq!(s.v_min, 0.5);
        assert_eq!(s.qubit_excitation, Some(1.0));
        assert!((s.purity - 1.0).abs() < 1e-15);
        let sp = scalar_observables_pure(&psi, &layout).unwrap();
        assert_eq!(sp, s);

        let mixed_q = ComplexMatrix::diagonal(&[C64::new(0.5, 0.0), C64::new(0.5, 0.0)]);
        let rho = mixed_q.kron(&ComplexMatrix::outer(&fock_ket(6, 0).unwrap()));
        let s = scalar_observables(&rho, &layout).unwrap();
        assert!((s.purity - 0.5).abs() < 1e-15);
        assert_eq!(s.qubit_excitation, Some(0.5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn optimal_angle_attains_minimum(
            a in 0.05f64..3.0,
            b in 0.05f64..3.0,
            phi in -3.2f64..3.2,
        ) {
            let cm = QuadratureCM { s11: a, s12: 0.0, s22: b }.rotated(phi);
            let vmin = min_variance(&cm);
            let angle = optimal_angle(&cm);
            prop_assert!((cm.variance_at(angle.theta) - vmin).abs() < 1e-12);
            for k in 0..100 {
                let theta = -PI + 2.0 * PI * k as f64 / 100.0;
                prop_assert!(cm.variance_at(angle.theta) <= cm.variance_at(theta) + 1e-12);
            }
        }

        #[test]
        fn min_variance_rotation_invariant(
            a in 0.05f64..3.0,
            b in 0.05f64..3.0,
            c in -0.5f64..0.5,
            phi in -3.2f64..3.2,
        ) {
            let cm = QuadratureCM { s11: a, s12: c * (a * b).sqrt(), s22: b };
            prop_assert!((min_variance(&cm) - min_variance(&cm.rotated(phi))).abs() < 1e-12);
        }
    }
}
