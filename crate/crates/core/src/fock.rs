//! Truncated Fock-space states and operators.
//!
//! Matrices are dense `dim x dim` arrays over the number states `|0>..|dim-1>`. Unitary
//! constructors evaluate exact matrix elements of the infinite-dimensional operator and
//! then keep the leading block, so truncation never feeds back into the retained entries.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Flagged, Result, ValidationError, Warning};
use crate::special::{abs, arg, cis, ln_factorial, ln_factorials, normalized_laguerre};

/// Largest admissible `|rho - rho^dag|` entry for a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Largest admissible `|Tr rho - 1|`.
pub const TRACE_TOL: f64 = 1e-6;
/// Most negative admissible eigenvalue.
pub const PSD_TOL: f64 = 1e-10;
/// Leakage above which `build_state` refuses to truncate.
pub const STATE_LEAKAGE_LIMIT: f64 = 1e-6;

const MAX_EIGEN_ITER: usize = 10_000;
const MAX_ESTIMATED_DIM: usize = 4096;

/// Squeeze parameter `zeta = magnitude * e^{i phase}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeSpec {
    magnitude: f64,
    phase: f64,
}

impl SqueezeSpec {
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        if !(magnitude.is_finite() && magnitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "squeeze magnitude",
                value: magnitude,
                reason: "must be finite and >= 0",
            });
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter {
                name: "squeeze phase",
                value: phase,
                reason: "must be finite",
            });
        }
        Ok(SqueezeSpec {
            magnitude,
            phase: wrap_phase(phase),
        })
    }

    /// The squeeze whose stretch factor `e^{|zeta|}` equals `delta`.
    pub fn from_delta(delta: f64, phase: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                reason: "must be >= 1",
            });
        }
        SqueezeSpec::new(libm::log(delta), phase)
    }

    pub fn none() -> Self {
        SqueezeSpec {
            magnitude: 0.0,
            phase: 0.0,
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// Phase in `[0, 2pi)`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn zeta(&self) -> Complex64 {
        cis(self.phase) * self.magnitude
    }

    /// `Delta = e^{|zeta|}`.
    pub fn delta(&self) -> f64 {
        libm::exp(self.magnitude)
    }

    /// `mu = cosh|zeta|`.
    pub fn mu(&self) -> f64 {
        libm::cosh(self.magnitude)
    }

    /// `nu = e^{i phase} sinh|zeta|`.
    pub fn nu(&self) -> Complex64 {
        cis(self.phase) * libm::sinh(self.magnitude)
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        SqueezeSpec {
            magnitude: self.magnitude,
            phase: wrap_phase(phase),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.magnitude == 0.0
    }
}

pub(crate) fn wrap_phase(phase: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut p = phase % two_pi;
    if p < 0.0 {
        p += two_pi;
    }
    if p >= two_pi {
        p = 0.0;
    }
    p
}

/// Test-state factory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Fock(usize),
    Coherent(Complex64),
    Thermal(f64),
    /// `|beta> + e^{i phase} |-beta>`, normalized. `phase = 0` is the even cat.
    Cat { beta: Complex64, phase: f64 },
    SqueezedVacuum(SqueezeSpec),
}

impl StateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Fock(_) => Ok(()),
            StateSpec::Coherent(beta) => finite_complex("beta", beta),
            StateSpec::Thermal(nbar) => {
                if nbar.is_finite() && nbar >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "nbar",
                        value: nbar,
                        reason: "mean photon number must be finite and >= 0",
                    })
                }
            }
            StateSpec::Cat { beta, phase } => {
                finite_complex("beta", beta)?;
                if !(phase.is_finite() && (0.0..2.0 * PI).contains(&phase)) {
                    return Err(Error::InvalidParameter {
                        name: "parity phase",
                        value: phase,
                        reason: "must lie in [0, 2pi)",
                    });
                }
                if beta == Complex64::new(0.0, 0.0) && libm::cos(phase) < -1.0 + 1e-15 {
                    return Err(Error::InvalidParameter {
                        name: "beta",
                        value: 0.0,
                        reason: "odd cat with beta = 0 is the zero vector",
                    });
                }
                Ok(())
            }
            StateSpec::SqueezedVacuum(_) => Ok(()),
        }
    }

    /// Largest coherent amplitude carried by the state; sets the default phase-space radius.
    pub fn amplitude(&self) -> f64 {
        match *self {
            StateSpec::Fock(n) => libm::sqrt(n as f64),
            StateSpec::Coherent(beta) | StateSpec::Cat { beta, .. } => abs(beta),
            StateSpec::Thermal(nbar) => libm::sqrt(nbar),
            StateSpec::SqueezedVacuum(z) => libm::sinh(z.magnitude()),
        }
    }
}

fn finite_complex(name: &'static str, z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: f64::NAN,
            reason: "must be finite",
        })
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidDimension {
            dim,
            reason: "Fock cutoff must be at least 1",
        })
    } else {
        Ok(())
    }
}

/// A square complex matrix in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    m: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Validation(ValidationError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            }));
        }
        check_dim(m.nrows())?;
        Ok(OperatorMatrix { m })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(OperatorMatrix {
            m: DMatrix::identity(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            m: self.m.adjoint(),
        }
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        same_dim(self.dim(), other.dim())?;
        Ok(OperatorMatrix { m: &self.m * &other.m })
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// Largest entrywise modulus of `self - other` over the leading `block x block` corner.
    pub fn max_abs_diff(&self, other: &OperatorMatrix, block: usize) -> f64 {
        let b = block.min(self.dim()).min(other.dim());
        let mut worst: f64 = 0.0;
        for i in 0..b {
            for j in 0..b {
                worst = worst.max(abs(self.m[(i, j)] - other.m[(i, j)]));
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0f64, |acc, z| acc.max(abs(*z)))
    }

    /// `max |A - A^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.m)
    }
}

fn same_dim(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

pub(crate) fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max(abs(m[(i, j)] - m[(j, i)].conj()));
        }
    }
    worst
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates `m` against the density-matrix tolerances.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Validation(ValidationError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            }));
        }
        check_dim(m.nrows())?;
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Validation(ValidationError::NonFinite));
        }
        let defect = hermiticity_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::Validation(ValidationError::NotHermitian { defect }));
        }
        let trace = m.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::Validation(ValidationError::Trace { trace }));
        }
        let (values, _) = hermitian_eigen(&symmetrize(&m))?;
        let min_eigenvalue = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::Validation(ValidationError::Negative { min_eigenvalue }));
        }
        Ok(DensityMatrix { m })
    }

    /// Builds from row-major real and imaginary parts.
    pub fn from_parts(dim: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != dim * dim || im.len() != dim * dim {
            return Err(Error::InvalidDimension {
                dim,
                reason: "entry count does not match dim x dim",
            });
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(re[i * dim + j], im[i * dim + j]));
        DensityMatrix::from_matrix(m)
    }

    pub(crate) fn from_pure(v: &DVector<Complex64>) -> Self {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let m = v * v.adjoint() / Complex64::new(norm, 0.0);
        DensityMatrix { m: symmetrize(&m) }
    }

    pub(crate) fn from_diagonal(p: &[f64]) -> Self {
        let n = p.len();
        let total: f64 = p.iter().sum();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(p[i] / total, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        DensityMatrix { m }
    }

    pub(crate) fn from_trusted(m: DMatrix<Complex64>) -> Self {
        DensityMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// Diagonal in the number basis.
    pub fn photon_distribution(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.m[(n, n)].re).collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigen(&self.m)?.0)
    }

    /// Row-major real parts.
    pub fn re_parts(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.m[(i, j)].re);
            }
        }
        out
    }

    /// Row-major imaginary parts.
    pub fn im_parts(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.m[(i, j)].im);
            }
        }
        out
    }

    /// Embeds into a larger cutoff, padding with zeros.
    pub fn embed(&self, dim: usize) -> Result<DensityMatrix> {
        if dim < self.dim() {
            return Err(Error::InvalidDimension {
                dim,
                reason: "embedding target is smaller than the state",
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.m);
        Ok(DensityMatrix { m })
    }
}

pub(crate) fn symmetrize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix (only the lower triangle is read).
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_EIGEN_ITER).ok_or(
        Error::Convergence {
            what: "Hermitian eigen-decomposition",
            limit: MAX_EIGEN_ITER,
        },
    )?;
    Ok((eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors))
}

/// `a|n> = sqrt(n)|n-1>`.
pub fn annihilation_operator(dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new(libm::sqrt(j as f64), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(OperatorMatrix { m })
}

/// Exact matrix elements `<m|D(alpha)|n>` for `m < rows`, `n < cols`.
pub(crate) fn displacement_block(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(rows, cols);
    let r = abs(alpha);
    let x = r * r;
    let theta = arg(alpha);
    let ln_r = libm::log(r);
    let span = rows.max(cols);
    let mut g = vec![0.0; span];
    for k in 0..span {
        let lower = cols.min(rows.saturating_sub(k));
        let upper = if k == 0 { 0 } else { rows.min(cols.saturating_sub(k)) };
        let len = lower.max(upper);
        if len == 0 {
            continue;
        }
        let first = if k == 0 {
            libm::exp(-0.5 * x)
        } else if r == 0.0 {
            0.0
        } else {
            libm::exp(k as f64 * ln_r - 0.5 * x - 0.5 * ln_factorial(k))
        };
        normalized_laguerre(k, x, first, &mut g[..len]);
        let phase = cis(k as f64 * theta);
        for (j, gj) in g.iter().enumerate().take(lower) {
            out[(j + k, j)] = phase * *gj;
        }
        if k > 0 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let phase_up = phase.conj() * sign;
            for (j, gj) in g.iter().enumerate().take(upper) {
                out[(j, j + k)] = phase_up * *gj;
            }
        }
    }
    out
}

/// Exact matrix elements `<m|S(zeta)|n>` for `m < rows`, `n < cols`, with
/// `S(zeta) = exp[(zeta^* a^2 - zeta a^dag^2)/2]`.
pub(crate) fn squeeze_block(zeta: SqueezeSpec, rows: usize, cols: usize) -> DMatrix<Complex64> {
    if zeta.is_identity() {
        return DMatrix::from_fn(rows, cols, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
    }
    let r = zeta.magnitude();
    let ln_cosh = libm::log(libm::cosh(r));
    let ln_half_tanh = libm::log(0.5 * libm::tanh(r));
    let lf = ln_factorials(rows.max(cols) + 1);
    let mut out = DMatrix::zeros(rows, cols);
    for m in 0..rows {
        for n in (m % 2..cols).step_by(2) {
            let mut sum = 0.0;
            let mut j = m % 2;
            while j <= m.min(n) {
                let a = (m - j) / 2;
                let b = (n - j) / 2;
                let ln_term = -(j as f64 + 0.5) * ln_cosh
                    + (a + b) as f64 * ln_half_tanh
                    + 0.5 * (lf[m] + lf[n])
                    - lf[j]
                    - lf[a]
                    - lf[b];
                let term = libm::exp(ln_term);
                sum += if a % 2 == 0 { term } else { -term };
                j += 2;
            }
            let half = (m as f64 - n as f64) / 2.0;
            out[(m, n)] = cis(zeta.phase() * half) * sum;
        }
    }
    out
}

/// Displacement `D(alpha) = exp(alpha a^dag - alpha^* a)` on the leading `dim x dim` block.
///
/// Flags `|alpha|^2 > dim`, where the kept block is far from unitary.
pub fn displacement_operator(alpha: Complex64, dim: usize) -> Result<Flagged<OperatorMatrix>> {
    check_dim(dim)?;
    finite_complex("alpha", alpha)?;
    let m = displacement_block(alpha, dim, dim);
    let alpha_sq = alpha.norm_sqr();
    let mut out = Flagged::clean(OperatorMatrix { m });
    if alpha_sq > dim as f64 {
        out.warnings.push(Warning::SevereTruncation { alpha_sq, dim });
    }
    Ok(out)
}

/// Squeeze `S(zeta) = exp[(zeta^* a^2 - zeta a^dag^2)/2]` on the leading `dim x dim` block.
pub fn squeeze_operator(zeta: SqueezeSpec, dim: usize) -> Result<Flagged<OperatorMatrix>> {
    check_dim(dim)?;
    let m = squeeze_block(zeta, dim, dim);
    let spread = libm::exp(2.0 * zeta.magnitude());
    let mut out = Flagged::clean(OperatorMatrix { m });
    if spread > dim as f64 {
        out.warnings.push(Warning::SqueezeTruncation { spread, dim });
    }
    Ok(out)
}

/// A constructed test state and the probability it lost to truncation before renormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltState {
    pub rho: DensityMatrix,
    pub leakage: f64,
}

/// Number-basis amplitudes of a pure state on the first `len` levels.
fn pure_amplitudes(spec: &StateSpec, len: usize) -> Option<Vec<Complex64>> {
    match *spec {
        StateSpec::Fock(n) => {
            let mut v = vec![Complex64::new(0.0, 0.0); len];
            if n < len {
                v[n] = Complex64::new(1.0, 0.0);
            }
            Some(v)
        }
        StateSpec::Coherent(beta) => Some(coherent_amplitudes(beta, len)),
        StateSpec::Cat { beta, phase } => {
            let plus = coherent_amplitudes(beta, len);
            let rel = cis(phase);
            let norm_sq = 2.0 + 2.0 * libm::cos(phase) * libm::exp(-2.0 * beta.norm_sqr());
            let scale = 1.0 / libm::sqrt(norm_sq);
            Some(
                plus.iter()
                    .enumerate()
                    .map(|(n, c)| {
                        let minus = if n % 2 == 0 { *c } else { -*c };
                        (*c + rel * minus) * scale
                    })
                    .collect(),
            )
        }
        StateSpec::SqueezedVacuum(z) => {
            let col = squeeze_block(z, len, 1);
            Some(col.column(0).iter().cloned().collect())
        }
        StateSpec::Thermal(_) => None,
    }
}

fn coherent_amplitudes(beta: Complex64, len: usize) -> Vec<Complex64> {
    let r = abs(beta);
    let theta = arg(beta);
    let x = r * r;
    (0..len)
        .map(|n| {
            if n == 0 {
                Complex64::new(libm::exp(-0.5 * x), 0.0)
            } else if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let ln_mag = -0.5 * x + n as f64 * libm::log(r) - 0.5 * ln_factorial(n);
                cis(n as f64 * theta) * libm::exp(ln_mag)
            }
        })
        .collect()
}

fn thermal_weights(nbar: f64, len: usize) -> Vec<f64> {
    let ratio = nbar / (1.0 + nbar);
    let mut p = Vec::with_capacity(len);
    let mut w = 1.0 / (1.0 + nbar);
    for _ in 0..len {
        p.push(w);
        w *= ratio;
    }
    p
}

fn leakage(spec: &StateSpec, dim: usize) -> f64 {
    match *spec {
        StateSpec::Fock(n) => {
            if n < dim {
                0.0
            } else {
                1.0
            }
        }
        StateSpec::Thermal(nbar) => libm::pow(nbar / (1.0 + nbar), dim as f64),
        _ => {
            let v = pure_amplitudes(spec, dim).unwrap_or_default();
            let kept: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            (1.0 - kept).max(0.0)
        }
    }
}

fn required_dim(spec: &StateSpec, limit: f64) -> usize {
    let mut d = 1;
    while d < MAX_ESTIMATED_DIM {
        if leakage(spec, d) <= limit {
            return d;
        }
        d = if d < 64 { d + 1 } else { d + d / 8 };
    }
    MAX_ESTIMATED_DIM
}

/// Density matrix of `spec` truncated to `dim` levels and renormalized.
///
/// Refuses when more than [`STATE_LEAKAGE_LIMIT`] of the probability lies above the cutoff.
pub fn build_state(spec: &StateSpec, dim: usize) -> Result<BuiltState> {
    check_dim(dim)?;
    spec.validate()?;
    let lost = leakage(spec, dim);
    if lost > STATE_LEAKAGE_LIMIT {
        return Err(Error::Truncation {
            leakage: lost,
            limit: STATE_LEAKAGE_LIMIT,
            required_dim: required_dim(spec, STATE_LEAKAGE_LIMIT),
        });
    }
    let rho = match *spec {
        StateSpec::Thermal(nbar) => DensityMatrix::from_diagonal(&thermal_weights(nbar, dim)),
        _ => {
            let v = pure_amplitudes(spec, dim).expect("pure state");
            DensityMatrix::from_pure(&DVector::from_vec(v))
        }
    };
    Ok(BuiltState { rho, leakage: lost })
}

fn sqrt_psd(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let (values, vectors) = hermitian_eigen(m)?;
    // eigenvalues at rounding level are noise; their square roots are not
    let top = values.iter().cloned().fold(0.0, f64::max);
    let floor = values.len() as f64 * f64::EPSILON * top;
    let roots = DVector::from_iterator(
        values.len(),
        values
            .iter()
            .map(|v| Complex64::new(if *v > floor { libm::sqrt(*v) } else { 0.0 }, 0.0)),
    );
    Ok(&vectors * DMatrix::from_diagonal(&roots) * vectors.adjoint())
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    let root = sqrt_psd(&rho.m)?;
    let inner = symmetrize(&(&root * &sigma.m * &root));
    let (values, _) = hermitian_eigen(&inner)?;
    let t: f64 = values.iter().map(|v| libm::sqrt(v.max(0.0))).sum();
    Ok((t * t).clamp(0.0, 1.0))
}

/// Trace distance `||rho - sigma||_1 / 2`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    let diff = symmetrize(&(&rho.m - &sigma.m));
    let (values, _) = hermitian_eigen(&diff)?;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}
