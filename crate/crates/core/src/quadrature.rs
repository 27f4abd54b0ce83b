//! Polar Gauss-Legendre quadrature for `integral d^2 alpha / pi` over a disk.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::cis;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX: usize = 100;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidDimension {
            dim: n,
            reason: "quadrature needs at least one node",
        });
    }
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut converged = false;
        for _ in 0..NEWTON_MAX {
            let (p, d) = legendre(n, z);
            let step = p / d;
            z -= step;
            if step.abs() < NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence {
                what: "Gauss-Legendre root finding",
                limit: NEWTON_MAX,
            });
        }
        let (_, dp) = legendre(n, z);
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Resolution of a polar grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl GridSpec {
    pub fn new(r_max: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "r_max",
                value: r_max,
                reason: "must be finite and > 0",
            });
        }
        if n_r < 2 {
            return Err(Error::InvalidDimension {
                dim: n_r,
                reason: "n_r must be at least 2",
            });
        }
        if n_theta < 4 {
            return Err(Error::InvalidDimension {
                dim: n_theta,
                reason: "n_theta must be at least 4",
            });
        }
        Ok(GridSpec { r_max, n_r, n_theta })
    }

    /// Default resolution: `r_max = 4 + amplitude`, 48 radii, 64 angles.
    pub fn for_amplitude(amplitude: f64) -> Self {
        GridSpec {
            r_max: 4.0 + amplitude,
            n_r: 48,
            n_theta: 64,
        }
    }
}

/// Quadrature nodes `alpha_j` and weights `w_j` with `sum_j w_j f(alpha_j) ~ integral d^2 alpha / pi f`.
///
/// Nodes are ring-major: node `i * n_theta + l` sits at radius `radii[i]` and angle
/// `2 pi l / n_theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    spec: GridSpec,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    unit_nodes: Vec<f64>,
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
}

/// Builds the polar grid on the disk `|alpha| <= r_max`.
pub fn make_grid(r_max: f64, n_r: usize, n_theta: usize) -> Result<PhaseSpaceGrid> {
    PhaseSpaceGrid::new(GridSpec::new(r_max, n_r, n_theta)?)
}

impl PhaseSpaceGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let spec = GridSpec::new(spec.r_max, spec.n_r, spec.n_theta)?;
        let (x, w) = gauss_legendre(spec.n_r)?;
        let half = 0.5 * spec.r_max;
        let radii: Vec<f64> = x.iter().map(|xi| half * (xi + 1.0)).collect();
        let radial_weights: Vec<f64> = w.iter().map(|wi| half * wi).collect();
        let mut nodes = Vec::with_capacity(spec.n_r * spec.n_theta);
        let mut weights = Vec::with_capacity(spec.n_r * spec.n_theta);
        let inv_theta = 1.0 / spec.n_theta as f64;
        for (r, wr) in radii.iter().zip(&radial_weights) {
            for l in 0..spec.n_theta {
                nodes.push(cis(2.0 * PI * l as f64 * inv_theta) * *r);
                // d^2 alpha / pi = (2 r dr)(d theta / 2 pi)
                weights.push(2.0 * r * wr * inv_theta);
            }
        }
        Ok(PhaseSpaceGrid {
            spec,
            radii,
            radial_weights,
            unit_nodes: x,
            nodes,
            weights,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }

    pub fn n_r(&self) -> usize {
        self.spec.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.spec.n_theta
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ring radii, ascending.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Gauss-Legendre weights of the radial rule on `[0, r_max]`.
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    /// Radial nodes mapped back to `[-1, 1]`.
    pub(crate) fn unit_nodes(&self) -> &[f64] {
        &self.unit_nodes
    }

    pub fn angle(&self, l: usize) -> f64 {
        2.0 * PI * l as f64 / self.spec.n_theta as f64
    }

    /// `sum_j w_j f(alpha_j)`.
    pub fn integrate<F: FnMut(Complex64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * f(*a))
            .sum()
    }

    /// True when `alphas` reproduces this grid's nodes to `tol`.
    pub fn matches(&self, alphas: &[Complex64], tol: f64) -> bool {
        alphas.len() == self.nodes.len()
            && alphas
                .iter()
                .zip(&self.nodes)
                .all(|(a, b)| (a.re - b.re).abs() <= tol && (a.im - b.im).abs() <= tol)
    }
}
