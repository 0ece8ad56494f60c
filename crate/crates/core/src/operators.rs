//! Dense complex matrices and the qubit / Fock-space operators built on them.
//!
//! Every composite space uses the fixed tensor order
//! `qubit ⊗ magnon [⊗ cavity]`. Qubit basis index 0 is `|e⟩` and index 1 is
//! `|g⟩`, so `σ_z = diag(+1, −1)`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Absolute tolerance on `|M_ij − conj(M_ji)|` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `|Tr ρ − 1|` for a density matrix.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue tolerated in a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; fails unless `rows·cols == data.len()`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::InvalidDimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidDimension("ragged rows".into()));
        }
        Ok(Self::from_fn(n_rows, n_cols, |r, c| C64::new(rows[r][c], 0.0)))
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn outer(psi: &[C64]) -> Self {
        Self::from_fn(psi.len(), psi.len(), |r, c| psi[r] * psi[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::InvalidDimension(format!(
                "vector of length {} against {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `A·B − B·A`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.matmul(other)? - &other.matmul(self)?)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum; an upper bound on the spectral norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |M_ij − conj(M_ji)|`; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| 0.5 * (self[(r, c)] + self[(c, r)].conj()))
    }

    /// `Tr(ρ²)` for Hermitian input, computed as the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Checks trace, Hermiticity and positivity with the given tolerances.
    pub fn check_density_matrix(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::InvalidState(format!("{}x{} matrix is not square", self.rows, self.cols)));
        }
        let defect = self.hermiticity_defect();
        if defect > herm_tol {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidState(format!("trace {:.12} + {:.3e}i differs from 1", tr.re, tr.im)));
        }
        let min_eig = hermitian_eigenvalues(&self.hermitian_part())?[0];
        if min_eig < -pos_tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(())
    }

    pub fn is_density_matrix(&self) -> bool {
        self.check_density_matrix(HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL).is_ok()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

fn assert_same_shape(a: &ComplexMatrix, b: &ComplexMatrix) {
    assert!(
        a.rows == b.rows && a.cols == b.cols,
        "shape mismatch: {}x{} vs {}x{}",
        a.rows,
        a.cols,
        b.rows,
        b.cols
    );
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_same_shape(self, rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self + &rhs
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_same_shape(self, rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_same_shape(self, rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self - &rhs
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale_re(rhs)
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on inner-dimension mismatch; use [`ComplexMatrix::matmul`] for a `Result`.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

// ---------------------------------------------------------------------------
// Hilbert space layout

/// One tensor factor of the composite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    Qubit,
    Magnon,
    Cavity,
}

/// Tensor-product layout in the fixed order qubit ⊗ magnon ⊗ cavity, with
/// absent factors skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLayout {
    factors: Vec<(Factor, usize)>,
}

impl HilbertLayout {
    pub const QUBIT_DIM: usize = 2;

    /// qubit ⊗ magnon.
    pub fn qubit_magnon(magnon_dim: usize) -> Result<Self> {
        check_fock_dim(magnon_dim, "magnon")?;
        Ok(Self { factors: vec![(Factor::Qubit, Self::QUBIT_DIM), (Factor::Magnon, magnon_dim)] })
    }

    /// qubit ⊗ magnon ⊗ cavity.
    pub fn tripartite(magnon_dim: usize, cavity_dim: usize) -> Result<Self> {
        check_fock_dim(magnon_dim, "magnon")?;
        check_fock_dim(cavity_dim, "cavity")?;
        Ok(Self {
            factors: vec![
                (Factor::Qubit, Self::QUBIT_DIM),
                (Factor::Magnon, magnon_dim),
                (Factor::Cavity, cavity_dim),
            ],
        })
    }

    /// The magnon mode alone.
    pub fn magnon_only(magnon_dim: usize) -> Result<Self> {
        check_fock_dim(magnon_dim, "magnon")?;
        Ok(Self { factors: vec![(Factor::Magnon, magnon_dim)] })
    }

    pub fn factors(&self) -> &[(Factor, usize)] {
        &self.factors
    }

    pub fn has(&self, factor: Factor) -> bool {
        self.factors.iter().any(|(f, _)| *f == factor)
    }

    pub fn dim_of(&self, factor: Factor) -> Option<usize> {
        self.factors.iter().find(|(f, _)| *f == factor).map(|(_, d)| *d)
    }

    pub fn magnon_dim(&self) -> usize {
        self.dim_of(Factor::Magnon).expect("every layout carries a magnon factor")
    }

    pub fn cavity_dim(&self) -> Option<usize> {
        self.dim_of(Factor::Cavity)
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    fn position(&self, factor: Factor) -> Result<usize> {
        self.factors
            .iter()
            .position(|(f, _)| *f == factor)
            .ok_or_else(|| Error::InvalidDimension(format!("layout has no {factor:?} factor")))
    }
}

fn check_fock_dim(n: usize, what: &str) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("{what} truncation must be at least 2, got {n}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Elementary operators

/// Bosonic annihilation operator truncated to `n` Fock levels:
/// `⟨k|m|k+1⟩ = √(k+1)`.
pub fn fock_annihilation(n: usize) -> Result<ComplexMatrix> {
    check_fock_dim(n, "Fock")?;
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..n - 1 {
        m[(k, k + 1)] = C64::new(((k + 1) as f64).sqrt(), 0.0);
    }
    Ok(m)
}

pub fn fock_creation(n: usize) -> Result<ComplexMatrix> {
    Ok(fock_annihilation(n)?.dagger())
}

pub fn fock_number(n: usize) -> Result<ComplexMatrix> {
    check_fock_dim(n, "Fock")?;
    Ok(ComplexMatrix::diagonal(&(0..n).map(|k| C64::new(k as f64, 0.0)).collect::<Vec<_>>()))
}

/// `σ⁻ = |g⟩⟨e|`.
pub fn sigma_minus() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(2, 2);
    s[(1, 0)] = C64::new(1.0, 0.0);
    s
}

/// `σ⁺ = |e⟩⟨g|`.
pub fn sigma_plus() -> ComplexMatrix {
    sigma_minus().dagger()
}

/// `σ_z = |e⟩⟨e| − |g⟩⟨g|`.
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)])
}

/// Kets of the qubit basis.
pub fn qubit_excited() -> Vec<C64> {
    vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
}

pub fn qubit_ground() -> Vec<C64> {
    vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
}

/// Fock ket `|k⟩` in an `n`-level truncation.
pub fn fock_ket(n: usize, k: usize) -> Result<Vec<C64>> {
    if k >= n {
        return Err(Error::InvalidDimension(format!("Fock state |{k}⟩ outside {n}-level truncation")));
    }
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[k] = C64::new(1.0, 0.0);
    Ok(v)
}

/// Kronecker product of kets.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Places `op` on `slot` with identities on every other factor of `layout`.
pub fn embed(op: &ComplexMatrix, slot: Factor, layout: &HilbertLayout) -> Result<ComplexMatrix> {
    let pos = layout.position(slot)?;
    let slot_dim = layout.factors[pos].1;
    if !op.is_square() || op.rows() != slot_dim {
        return Err(Error::InvalidDimension(format!(
            "{}x{} operator does not fit the {slot:?} factor of dimension {slot_dim}",
            op.rows(),
            op.cols()
        )));
    }
    let left: usize = layout.factors[..pos].iter().map(|(_, d)| d).product();
    let right: usize = layout.factors[pos + 1..].iter().map(|(_, d)| d).product();
    Ok(ComplexMatrix::identity(left).kron(op).kron(&ComplexMatrix::identity(right)))
}

/// Reduced density matrix of the `keep` factor.
pub fn partial_trace(rho: &ComplexMatrix, keep: Factor, layout: &HilbertLayout) -> Result<ComplexMatrix> {
    let total = layout.total_dim();
    if !rho.is_square() || rho.rows() != total {
        return Err(Error::InvalidDimension(format!(
            "{}x{} matrix on a layout of dimension {total}",
            rho.rows(),
            rho.cols()
        )));
    }
    let pos = layout.position(keep)?;
    let d = layout.factors[pos].1;
    let left: usize = layout.factors[..pos].iter().map(|(_, d)| d).product();
    let right: usize = layout.factors[pos + 1..].iter().map(|(_, d)| d).product();
    let mut out = ComplexMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..left {
                for r in 0..right {
                    let i = (l * d + a) * right + r;
                    let j = (l * d + b) * right + r;
                    acc += rho[(i, j)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density matrix of `keep` for the pure state `psi`, without forming `|ψ⟩⟨ψ|`.
pub fn partial_trace_pure(psi: &[C64], keep: Factor, layout: &HilbertLayout) -> Result<ComplexMatrix> {
    let total = layout.total_dim();
    if psi.len() != total {
        return Err(Error::InvalidDimension(format!("ket of length {} on a layout of dimension {total}", psi.len())));
    }
    let pos = layout.position(keep)?;
    let d = layout.factors[pos].1;
    let left: usize = layout.factors[..pos].iter().map(|(_, d)| d).product();
    let right: usize = layout.factors[pos + 1..].iter().map(|(_, d)| d).product();
    let mut out = ComplexMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..left {
                for r in 0..right {
                    acc += psi[(l * d + a) * right + r] * psi[(l * d + b) * right + r].conj();
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Spectral routines

fn require_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidDimension(format!("{}x{} matrix is not square", m.rows(), m.cols())));
    }
    let scale = m.max_abs().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::InvalidInput(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    Ok(())
}

/// Real eigenvalues of a Hermitian matrix, ascending.
///
/// The Hermiticity check is relative to the largest entry so that operators
/// expressed in rad/s are accepted.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    require_hermitian(m)?;
    if m.rows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)];
        let half_tr = 0.5 * (a + d);
        let det = a * d - b.norm_sqr();
        let disc = (half_tr * half_tr - det).max(0.0).sqrt();
        return Ok(vec![half_tr - disc, half_tr + disc]);
    }
    let eig = SymmetricEigen::new(m.hermitian_part().to_nalgebra());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    require_hermitian(m)?;
    let eig = SymmetricEigen::new(m.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(m.rows(), m.rows(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_spectral_norm(m: &ComplexMatrix) -> Result<f64> {
    let values = hermitian_eigenvalues(m)?;
    Ok(values.first().map_or(0.0, |v| v.abs()).max(values.last().map_or(0.0, |v| v.abs())))
}

/// Matrix exponential by scaling and squaring around a Taylor core.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidDimension(format!("{}x{} matrix is not square", m.rows(), m.cols())));
    }
    let n = m.rows();
    let norm = m.norm_one();
    if !norm.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    // Scale until the 1-norm is at most 1/2; 20 Taylor terms then leave a
    // truncation error below 2^-20 / 20! ~ 1e-25.
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale_re(0.5f64.powi(squarings as i32));
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=20 {
        term = term.matmul(&scaled)?.scale_re(1.0 / k as f64);
        result += &term;
        if term.max_abs() <= f64::EPSILON * 1e-3 * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: &[f64]) -> ComplexMatrix {
        let mut k = 0;
        let mut next = || {
            k += 1;
            seed[k % seed.len()] * ((k as f64) * 0.7).sin()
        };
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            m[(r, r)] = c(next(), 0.0);
            for col in r + 1..n {
                let z = c(next(), next());
                m[(r, col)] = z;
                m[(col, r)] = z.conj();
            }
        }
        m
    }

    fn random_density(n: usize, seed: &[f64]) -> ComplexMatrix {
        // A·A† / Tr is positive with unit trace.
        let a = ComplexMatrix::from_fn(n, n, |r, col| {
            c(seed[(r * n + col) % seed.len()], seed[(r + 3 * col + 1) % seed.len()])
        });
        let p = &a * &a.dagger();
        let tr = p.trace().re;
        p.scale_re(1.0 / tr)
    }

    #[test]
    fn annihilation_small_cases() {
        let m2 = fock_annihilation(2).unwrap();
        assert_eq!(m2, ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap());
        let m3 = fock_annihilation(3).unwrap();
        assert!((m3[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(fock_annihilation(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn number_operator_on_fock_two() {
        let m = fock_annihilation(4).unwrap();
        let n = &m.dagger() * &m;
        let ket = fock_ket(4, 2).unwrap();
        let out = n.apply(&ket).unwrap();
        assert!((out[2].re - 2.0).abs() < 1e-14);
        assert!(out.iter().enumerate().all(|(i, z)| i == 2 || z.norm() < 1e-15));
    }

    #[test]
    fn embed_sigma_z_on_qubit_slot() {
        let layout = HilbertLayout::qubit_magnon(3).unwrap();
        let sz = embed(&sigma_z(), Factor::Qubit, &layout).unwrap();
        let expected = ComplexMatrix::diagonal(
            &[1.0, 1.0, 1.0, -1.0, -1.0, -1.0].map(|x| c(x, 0.0)),
        );
        assert_eq!(sz, expected);
        let id = embed(&ComplexMatrix::identity(3), Factor::Magnon, &layout).unwrap();
        assert_eq!(id, ComplexMatrix::identity(6));
    }

    #[test]
    fn embedded_operators_on_disjoint_factors_commute() {
        let layout = HilbertLayout::qubit_magnon(4).unwrap();
        let sm = embed(&sigma_minus(), Factor::Qubit, &layout).unwrap();
        let m = embed(&fock_annihilation(4).unwrap(), Factor::Magnon, &layout).unwrap();
        assert!(sm.commutator(&m).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn embed_rejects_wrong_dimension() {
        let layout = HilbertLayout::qubit_magnon(4).unwrap();
        let err = embed(&fock_annihilation(3).unwrap(), Factor::Magnon, &layout);
        assert!(matches!(err, Err(Error::InvalidDimension(_))));
        let err = embed(&sigma_z(), Factor::Cavity, &layout);
        assert!(matches!(err, Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn embed_scales_multiplicity() {
        let layout = HilbertLayout::tripartite(3, 2).unwrap();
        let n = fock_number(3).unwrap();
        let big = embed(&n, Factor::Magnon, &layout).unwrap();
        let eig = hermitian_eigenvalues(&big).unwrap();
        // Each of 0,1,2 appears 2·2 = 4 times.
        for (i, v) in eig.iter().enumerate() {
            assert!((v - (i / 4) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let layout = HilbertLayout::qubit_magnon(3).unwrap();
        let rho_q = random_density(2, &[0.3, -0.2, 0.9, 0.4, 0.1]);
        let rho_m = random_density(3, &[0.5, 0.8, -0.3, 0.2, 0.7, -0.6, 0.11]);
        let joint = rho_q.kron(&rho_m);
        let back_m = partial_trace(&joint, Factor::Magnon, &layout).unwrap();
        let back_q = partial_trace(&joint, Factor::Qubit, &layout).unwrap();
        assert!((&back_m - &rho_m).max_abs() < 1e-12);
        assert!((&back_q - &rho_q).max_abs() < 1e-12);
    }

    #[test]
    fn partial_trace_of_entangled_state_is_maximally_mixed() {
        let layout = HilbertLayout::qubit_magnon(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e0 = kron_vec(&qubit_excited(), &fock_ket(2, 0).unwrap());
        let g1 = kron_vec(&qubit_ground(), &fock_ket(2, 1).unwrap());
        let psi: Vec<C64> = e0.iter().zip(&g1).map(|(a, b)| (a + b) * s).collect();
        let reduced = partial_trace(&ComplexMatrix::outer(&psi), Factor::Magnon, &layout).unwrap();
        let half = ComplexMatrix::diagonal(&[c(0.5, 0.0), c(0.5, 0.0)]);
        assert!((&reduced - &half).max_abs() < 1e-15);
        let pure = partial_trace_pure(&psi, Factor::Magnon, &layout).unwrap();
        assert!((&pure - &half).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_wrong_size() {
        let layout = HilbertLayout::qubit_magnon(3).unwrap();
        assert!(matches!(
            partial_trace(&ComplexMatrix::identity(5), Factor::Magnon, &layout),
            Err(Error::InvalidDimension(_))
        ));
        assert!(matches!(
            partial_trace(&ComplexMatrix::zeros(6, 5), Factor::Magnon, &layout),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn two_by_two_eigenvalues() {
        let d = ComplexMatrix::from_real_rows(&[&[0.3, 0.0], &[0.0, 0.7]]).unwrap();
        let s = ComplexMatrix::from_real_rows(&[&[0.5, 0.2], &[0.2, 0.5]]).unwrap();
        for m in [d, s] {
            let e = hermitian_eigenvalues(&m).unwrap();
            assert!((e[0] - 0.3).abs() < 1e-15 && (e[1] - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn eigenvalues_reject_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn expm_basic_cases() {
        let z = expm(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(z, ComplexMatrix::identity(3));
        let theta = 0.83;
        let u = expm(&sigma_z().scale(c(0.0, theta / 2.0))).unwrap();
        assert!((u[(0, 0)] - c(0.0, theta / 2.0).exp()).norm() < 1e-15);
        assert!((u[(1, 1)] - c(0.0, -theta / 2.0).exp()).norm() < 1e-15);
        assert!(u[(0, 1)].norm() < 1e-16);
        assert!(matches!(expm(&ComplexMatrix::zeros(2, 3)), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn expm_displacement_gives_coherent_state() {
        // Oracle: Fock amplitudes e^{-|α|²/2} α^n / √(n!).
        let n = 40;
        let alpha = c(0.9, -0.4);
        let m = fock_annihilation(n).unwrap();
        let gen = &m.dagger().scale(alpha) - &m.scale(alpha.conj());
        let d = expm(&gen).unwrap();
        let vac = fock_ket(n, 0).unwrap();
        let psi = d.apply(&vac).unwrap();
        let mut expected = (-0.5 * alpha.norm_sqr()).exp();
        let mut amp = c(expected, 0.0);
        for (k, z) in psi.iter().enumerate().take(20) {
            assert!((z - amp).norm() < 1e-12, "n={k}: {z} vs {amp}");
            amp = amp * alpha / ((k + 1) as f64).sqrt();
            expected = amp.norm();
        }
        assert!(expected < 1e-6);
        let mean: C64 = m.apply(&psi).unwrap().iter().zip(&psi).map(|(a, b)| b.conj() * a).sum();
        assert!((mean - alpha).norm() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn expm_of_hermitian_generator_is_unitary(
            seed in proptest::collection::vec(-1.0f64..1.0, 7..16),
            t in 0.0f64..30.0,
        ) {
            let h = random_hermitian(6, &seed);
            let u = expm(&h.scale(c(0.0, -t))).unwrap();
            let defect = (&(&u * &u.dagger()) - &ComplexMatrix::identity(6)).max_abs();
            prop_assert!(defect < 1e-9, "unitarity defect {defect}");
        }

        #[test]
        fn eigenvalues_invariant_under_unitary_conjugation(
            seed in proptest::collection::vec(-1.0f64..1.0, 7..16),
            gen_seed in proptest::collection::vec(-1.0f64..1.0, 7..16),
        ) {
            let h = random_hermitian(5, &seed);
            let u = expm(&random_hermitian(5, &gen_seed).scale(c(0.0, 1.0))).unwrap();
            let rotated = (&(&u * &h) * &u.dagger()).hermitian_part();
            let a = hermitian_eigenvalues(&h).unwrap();
            let b = hermitian_eigenvalues(&rotated).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn density_matrix_spectrum_sums_to_one(seed in proptest::collection::vec(-1.0f64..1.0, 5..30)) {
            let rho = random_density(6, &seed);
            prop_assert!(rho.is_density_matrix());
            let sum: f64 = hermitian_eigenvalues(&rho).unwrap().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            let layout = HilbertLayout::qubit_magnon(3).unwrap();
            let reduced = partial_trace(&rho, Factor::Magnon, &layout).unwrap();
            prop_assert!((reduced.trace().re - 1.0).abs() < 1e-12);
        }
    }
}
