//! Kernel-operator reconstruction of the density matrix from displaced photon counts.
//!
//! `rho = sum_n integral d^2 alpha / pi  P(n, alpha) K(n, alpha)` with
//! `K = 2/(1 - s Delta^2) * base^n * T(-alpha/Delta, -s)` and
//! `base = (eta s Delta^2 - eta + 2) / (eta s Delta^2 - eta)`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result, SRange, Warning};
use crate::fock::{hermitian_eigen, hermiticity_defect, symmetrize, DensityMatrix, OperatorMatrix};
use crate::measurement::MeasurementTable;
use crate::quadrature::{gauss_legendre, GridSpec, PhaseSpaceGrid};
use crate::special::{abs, arg, cis, ln_factorial, normalized_laguerre};

/// Relative slack when comparing `s` with the upper end of the admissible interval.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Ordering parameter, detector efficiency and squeeze stretch factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub s: f64,
    pub eta: f64,
    pub delta: f64,
}

impl KernelParams {
    pub fn new(s: f64, eta: f64, delta: f64) -> Result<Self> {
        check_eta_delta(eta, delta)?;
        if !s.is_finite() {
            return Err(Error::InvalidParameter {
                name: "s",
                value: s,
                reason: "must be finite",
            });
        }
        Ok(KernelParams { s, eta, delta })
    }

    /// Midpoint of the admissible interval.
    pub fn auto(eta: f64, delta: f64) -> Result<Self> {
        let range = admissible_s_range(eta, delta)?;
        match range.midpoint() {
            Some(s) => KernelParams::new(s, eta, delta),
            None => Err(Error::Inadmissible {
                s: f64::NAN,
                eta,
                delta,
                range,
            }),
        }
    }

    pub fn delta_sq(&self) -> f64 {
        self.delta * self.delta
    }

    /// `(eta s Delta^2 - eta + 2) / (eta s Delta^2 - eta)`.
    pub fn base(&self) -> f64 {
        let esd = self.eta * self.s * self.delta_sq();
        (esd - self.eta + 2.0) / (esd - self.eta)
    }

    /// `2 / (1 - s Delta^2)`.
    pub fn prefactor(&self) -> f64 {
        2.0 / (1.0 - self.s * self.delta_sq())
    }

    pub fn range(&self) -> SRange {
        s_range(self.eta, self.delta)
    }

    /// Errors unless `s` is admissible; warns at the boundary where `|base| = 1`.
    pub fn check_admissible(&self) -> Result<Option<Warning>> {
        let range = self.range();
        let ok = match range {
            SRange::Empty => false,
            SRange::HalfOpen { lower, upper } => {
                self.s > lower && self.s <= upper + BOUNDARY_SLACK * upper.abs().max(1.0)
            }
        };
        if !ok {
            return Err(Error::Inadmissible {
                s: self.s,
                eta: self.eta,
                delta: self.delta,
                range,
            });
        }
        let base = self.base();
        if base.abs() >= 1.0 - 1e-9 {
            return Ok(Some(Warning::BoundaryOrdering { base }));
        }
        Ok(None)
    }
}

fn check_eta_delta(eta: f64, delta: f64) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "efficiency must lie in (0, 1]",
        });
    }
    if !(delta.is_finite() && delta >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "squeeze stretch factor must be >= 1",
        });
    }
    Ok(())
}

fn s_range(eta: f64, delta: f64) -> SRange {
    let upper = -(1.0 - eta) / (eta * delta * delta) + 0.0;
    if upper > -1.0 {
        SRange::HalfOpen { lower: -1.0, upper }
    } else {
        SRange::Empty
    }
}

/// `(-1, -(1 - eta)/(eta Delta^2)]`, or empty when that endpoint does not exceed `-1`.
pub fn admissible_s_range(eta: f64, delta: f64) -> Result<SRange> {
    check_eta_delta(eta, delta)?;
    Ok(s_range(eta, delta))
}

/// `Delta^2 / (Delta^2 + (1 - eta)/eta)`.
pub fn effective_efficiency(eta: f64, delta: f64) -> Result<f64> {
    check_eta_delta(eta, delta)?;
    let d2 = delta * delta;
    Ok(d2 / (d2 + (1.0 - eta) / eta))
}

/// `<m|T(beta, t)|n>` for `m, n < dim`.
///
/// For `m >= n`: `2/(1-t) e^{-2|beta|^2/(1-t)} q^n sqrt(n!/m!) c^{m-n} L_n^{(m-n)}(x)` with
/// `q = (t+1)/(t-1)`, `c = 2 beta/(1-t)`, `x = 4|beta|^2/(1-t^2)`; the upper triangle follows
/// from Hermiticity. `t = -1` is the coherent projector.
pub(crate) fn t_matrix(beta: Complex64, t: f64, dim: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(dim, dim);
    let r = abs(beta);
    let theta = arg(beta);
    if t == -1.0 {
        let amps: Vec<Complex64> = (0..dim)
            .map(|n| {
                if n == 0 {
                    Complex64::new(libm::exp(-0.5 * r * r), 0.0)
                } else if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    cis(n as f64 * theta)
                        * libm::exp(-0.5 * r * r + n as f64 * libm::log(r) - 0.5 * ln_factorial(n))
                }
            })
            .collect();
        for m in 0..dim {
            for n in 0..dim {
                out[(m, n)] = amps[m] * amps[n].conj();
            }
        }
        return out;
    }
    let q = (t + 1.0) / (t - 1.0);
    let ln_pre = libm::log(2.0 / (1.0 - t)) - 2.0 * r * r / (1.0 - t);
    let ln_c = libm::log(2.0 * r / (1.0 - t));
    let x = 4.0 * r * r / (1.0 - t * t);
    let mut g = vec![0.0; dim];
    for k in 0..dim {
        let len = dim - k;
        let first = if k == 0 {
            libm::exp(ln_pre)
        } else if r == 0.0 {
            0.0
        } else {
            libm::exp(ln_pre + k as f64 * ln_c - 0.5 * ln_factorial(k))
        };
        normalized_laguerre(k, x, first, &mut g[..len]);
        let phase = cis(k as f64 * theta);
        let mut qj = 1.0;
        for (j, gj) in g.iter().enumerate().take(len) {
            let v = phase * (gj * qj);
            out[(j + k, j)] = v;
            if k > 0 {
                out[(j, j + k)] = v.conj();
            }
            qj *= q;
        }
    }
    out
}

/// `T(alpha, s) = 2/(1-s) D(alpha) ((s+1)/(s-1))^{a^dag a} D(alpha)^dag`, `s < 1`.
pub fn t_operator(alpha: Complex64, s: f64, dim: usize) -> Result<OperatorMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "Fock cutoff must be at least 1",
        });
    }
    if !(s.is_finite() && s < 1.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "T(alpha, s) exists only for s < 1",
        });
    }
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: f64::NAN,
            reason: "must be finite",
        });
    }
    OperatorMatrix::from_matrix(t_matrix(alpha, s, dim))
}

/// `K(n, alpha) = prefactor * base^n * T(-alpha/Delta, -s)`.
pub fn kernel(n: usize, alpha: Complex64, p: &KernelParams, dim: usize) -> Result<OperatorMatrix> {
    p.check_admissible()?;
    let t = t_operator(-alpha / p.delta, -p.s, dim)?;
    let scale = p.prefactor() * libm::pow(p.base(), n as f64);
    OperatorMatrix::from_matrix(t.into_matrix() * Complex64::new(scale, 0.0))
}

/// Radial integration rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialRule {
    /// Plain quadrature: every factor of the integrand is sampled at the grid radii.
    Nodal,
    /// Only the measured part is interpolated between grid radii (Lagrange basis on the
    /// Gauss-Legendre nodes); its product with the known kernel is integrated on
    /// `fine_nodes` points.
    Product { fine_nodes: usize },
}

impl Default for RadialRule {
    fn default() -> Self {
        RadialRule::Product { fine_nodes: 400 }
    }
}

/// Reconstructed state with the diagnostics gathered before repair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub rho_hat: DensityMatrix,
    pub raw_trace: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue_before_clip: f64,
    /// Sum of the negative eigenvalues removed by the repair.
    pub clipped_weight: f64,
    /// Bound on the photon-sum remainder beyond `n_max`; infinite at the boundary ordering.
    pub n_truncation_error_estimate: f64,
    pub params: KernelParams,
    pub grid: GridSpec,
    pub rule: RadialRule,
    pub warnings: Vec<Warning>,
}

struct Raw {
    matrix: DMatrix<Complex64>,
    max_t: f64,
}

fn check_inputs(table: &MeasurementTable, p: &KernelParams, grid: &PhaseSpaceGrid, dim: usize) -> Result<Vec<Warning>> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "Fock cutoff must be at least 1",
        });
    }
    let mut warnings = Vec::new();
    if let Some(w) = p.check_admissible()? {
        warnings.push(w);
    }
    if !grid.matches(table.alphas(), 1e-12) {
        return Err(Error::TableMismatch("table amplitudes differ from the quadrature nodes"));
    }
    if (table.eta() - p.eta).abs() > 1e-12 {
        return Err(Error::TableMismatch("table efficiency differs from the kernel efficiency"));
    }
    if (table.squeeze().delta() - p.delta).abs() > 1e-9 * p.delta {
        return Err(Error::TableMismatch("table squeeze differs from the kernel delta"));
    }
    Ok(warnings)
}

/// `2 r_a w_a` weights and `l_i(r_a)` for the product rule.
fn product_weights(grid: &PhaseSpaceGrid, fine_nodes: usize) -> Result<(Vec<f64>, Vec<f64>, DMatrix<f64>)> {
    let (xf, wf) = gauss_legendre(fine_nodes)?;
    let half = 0.5 * grid.r_max();
    let radii: Vec<f64> = xf.iter().map(|x| half * (x + 1.0)).collect();
    let weights: Vec<f64> = radii.iter().zip(&wf).map(|(r, w)| 2.0 * r * half * w).collect();
    let xn = grid.unit_nodes();
    let (_, wn) = gauss_legendre(xn.len())?;
    let lambda: Vec<f64> = xn
        .iter()
        .zip(&wn)
        .enumerate()
        .map(|(i, (x, w))| {
            let v = libm::sqrt((1.0 - x * x) * w);
            if i % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect();
    let mut basis = DMatrix::zeros(xf.len(), xn.len());
    for (a, x) in xf.iter().enumerate() {
        if let Some(hit) = xn.iter().position(|xi| *xi == *x) {
            basis[(a, hit)] = 1.0;
            continue;
        }
        let terms: Vec<f64> = xn.iter().zip(&lambda).map(|(xi, l)| l / (x - xi)).collect();
        let total: f64 = terms.iter().sum();
        for (i, t) in terms.iter().enumerate() {
            basis[(a, i)] = t / total;
        }
    }
    Ok((radii, weights, basis))
}

fn assemble(table: &MeasurementTable, p: &KernelParams, grid: &PhaseSpaceGrid, dim: usize, rule: RadialRule) -> Result<Raw> {
    let n_r = grid.n_r();
    let n_theta = grid.n_theta();
    let base = p.base();
    let prefactor = p.prefactor();
    let f: Vec<f64> = table
        .rows()
        .iter()
        .map(|row| {
            let mut acc = 0.0;
            let mut bn = 1.0;
            for v in row {
                acc += bn * v;
                bn *= base;
            }
            prefactor * acc
        })
        .collect();
    // harmonics[i][k + dim - 1] = (1/n_theta) sum_l f_il e^{i k theta_l}
    let span = 2 * dim - 1;
    let mut harmonics = vec![vec![Complex64::new(0.0, 0.0); span]; n_r];
    let phases: Vec<Complex64> = (0..n_theta).map(|l| cis(grid.angle(l))).collect();
    for (i, row) in harmonics.iter_mut().enumerate() {
        for (idx, h) in row.iter_mut().enumerate() {
            let k = idx as i64 - (dim as i64 - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, ph) in phases.iter().enumerate() {
                let e = if k >= 0 { ph.powu(k as u32) } else { ph.conj().powu((-k) as u32) };
                acc += e * f[i * n_theta + l];
            }
            *h = acc / n_theta as f64;
        }
    }
    let t = -p.s;
    let mut omegas: Vec<DMatrix<Complex64>> = Vec::with_capacity(n_r);
    let mut max_t: f64 = 0.0;
    match rule {
        RadialRule::Nodal => {
            for (r, w) in grid.radii().iter().zip(grid.radial_weights()) {
                let tm = t_matrix(Complex64::new(-r / p.delta, 0.0), t, dim);
                max_t = tm.iter().fold(max_t, |acc, z| acc.max(abs(*z)));
                omegas.push(tm * Complex64::new(2.0 * r * w, 0.0));
            }
        }
        RadialRule::Product { fine_nodes } => {
            if fine_nodes < n_r {
                return Err(Error::InvalidDimension {
                    dim: fine_nodes,
                    reason: "product rule needs at least as many fine nodes as grid radii",
                });
            }
            let (radii, weights, basis) = product_weights(grid, fine_nodes)?;
            omegas = vec![DMatrix::zeros(dim, dim); n_r];
            for (a, (r, w)) in radii.iter().zip(&weights).enumerate() {
                let tm = t_matrix(Complex64::new(-r / p.delta, 0.0), t, dim);
                max_t = tm.iter().fold(max_t, |acc, z| acc.max(abs(*z)));
                for (i, om) in omegas.iter_mut().enumerate() {
                    let c = basis[(a, i)] * w;
                    if c != 0.0 {
                        *om += &tm * Complex64::new(c, 0.0);
                    }
                }
            }
        }
    }
    let mut matrix = DMatrix::zeros(dim, dim);
    for (h, om) in harmonics.iter().zip(&omegas) {
        for m in 0..dim {
            for n in 0..dim {
                matrix[(m, n)] += h[m + dim - 1 - n] * om[(m, n)];
            }
        }
    }
    Ok(Raw { matrix, max_t })
}

/// The unrepaired estimate `sum_j w_j sum_n P(n, alpha_j) K(n, alpha_j)`.
pub fn reconstruct_raw(
    table: &MeasurementTable,
    p: &KernelParams,
    grid: &PhaseSpaceGrid,
    dim: usize,
    rule: RadialRule,
) -> Result<OperatorMatrix> {
    check_inputs(table, p, grid, dim)?;
    OperatorMatrix::from_matrix(assemble(table, p, grid, dim, rule)?.matrix)
}

/// Reconstructs with the default radial rule.
pub fn reconstruct(
    table: &MeasurementTable,
    p: &KernelParams,
    grid: &PhaseSpaceGrid,
    dim: usize,
) -> Result<ReconstructionReport> {
    reconstruct_with(table, p, grid, dim, RadialRule::default())
}

/// Reconstructs, then repairs: symmetrize, clip negative eigenvalues, renormalize.
pub fn reconstruct_with(
    table: &MeasurementTable,
    p: &KernelParams,
    grid: &PhaseSpaceGrid,
    dim: usize,
    rule: RadialRule,
) -> Result<ReconstructionReport> {
    let mut warnings = check_inputs(table, p, grid, dim)?;
    warnings.extend(table.warnings().iter().cloned());
    let raw = assemble(table, p, grid, dim, rule)?;
    let raw_trace = raw.matrix.trace().re;
    let defect = hermiticity_defect(&raw.matrix);
    let sym = symmetrize(&raw.matrix);
    if sym.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Validation(crate::error::ValidationError::NonFinite));
    }
    let (values, vectors) = hermitian_eigen(&sym)?;
    let min_eig = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let clipped_weight: f64 = values.iter().filter(|v| **v < 0.0).sum();
    let kept: f64 = values.iter().filter(|v| **v > 0.0).sum();
    if kept <= 0.0 {
        return Err(Error::Validation(crate::error::ValidationError::Negative {
            min_eigenvalue: min_eig,
        }));
    }
    let diag = DVector::from_iterator(
        values.len(),
        values.iter().map(|v| Complex64::new(v.max(0.0) / kept, 0.0)),
    );
    let repaired = symmetrize(&(&vectors * DMatrix::from_diagonal(&diag) * vectors.adjoint()));
    let rho_hat = DensityMatrix::from_matrix(repaired)?;

    let b = p.base().abs();
    let max_p = table
        .rows()
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let n_truncation_error_estimate = if b >= 1.0 - 1e-9 {
        f64::INFINITY
    } else {
        let tail = libm::pow(b, (table.n_max() + 1) as f64) / (1.0 - b);
        p.prefactor().abs() * grid.r_max() * grid.r_max() * max_p * raw.max_t * tail
    };
    Ok(ReconstructionReport {
        rho_hat,
        raw_trace,
        hermiticity_defect: defect,
        min_eigenvalue_before_clip: min_eig,
        clipped_weight,
        n_truncation_error_estimate,
        params: *p,
        grid: grid.spec(),
        rule,
        warnings,
    })
}

/// Weight-function values recovered from zero counts alone.
#[derive(Debug, Clone, PartialEq)]
pub struct QDistribution {
    /// Ordering parameter of the recovered distribution (`-1` without squeezing).
    pub s: f64,
    /// Phase-space points `-alpha_j / Delta` at which the values apply.
    pub points: Vec<Complex64>,
    pub values: Vec<f64>,
    /// Quadrature weights for `integral d^2 beta / pi` over `points`.
    pub weights: Vec<f64>,
}

impl QDistribution {
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Zero-count route: at `s = Delta^{-2}(1 - 2/eta)` only the `n = 0` term of the kernel survives,
/// so `W(-alpha/Delta, s) = Delta^2 eta P_eta(0, alpha)`. At `eta = 1`, `Delta = 1` this is the
/// Husimi function `Q(-alpha) = P(0, alpha)`.
pub fn q_from_zero_counts(table: &MeasurementTable) -> Result<QDistribution> {
    let spec = table
        .grid()
        .ok_or(Error::TableMismatch("table carries no quadrature grid"))?;
    let grid = PhaseSpaceGrid::new(spec)?;
    if !grid.matches(table.alphas(), 1e-12) {
        return Err(Error::TableMismatch("table amplitudes differ from its grid"));
    }
    let eta = table.eta();
    let delta = table.squeeze().delta();
    let d2 = delta * delta;
    let s = (1.0 - 2.0 / eta) / d2;
    if table.squeeze().is_identity() && eta < 1.0 {
        return Err(Error::Inadmissible {
            s,
            eta,
            delta,
            range: s_range(eta, delta),
        });
    }
    if s < -1.0 || (s <= -1.0 && !table.squeeze().is_identity()) {
        return Err(Error::Inadmissible {
            s,
            eta,
            delta,
            range: s_range(eta, delta),
        });
    }
    Ok(QDistribution {
        s,
        points: table.alphas().iter().map(|a| -a / delta).collect(),
        values: table.rows().iter().map(|row| d2 * eta * row[0]).collect(),
        weights: grid.weights().iter().map(|w| w / d2).collect(),
    })
}
