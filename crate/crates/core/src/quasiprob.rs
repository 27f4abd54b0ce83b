//! s-parametrized weight functions and characteristic functions.
//!
//! Normalization follows the T-operator: `W(alpha, s) = Tr{rho T(alpha, s)}` integrates to one
//! under `d^2 alpha / pi`, so the vacuum Wigner value at the origin is 2.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{displacement_block, DensityMatrix, SqueezeSpec};
use crate::measurement::{locked_squeeze, pre_squeeze};
use crate::reconstruction::t_matrix;

fn check_point(name: &'static str, z: Complex64) -> Result<()> {
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

/// `Tr{rho T(alpha, s)}` and its imaginary part.
pub fn weight_function_complex(rho: &DensityMatrix, alpha: Complex64, s: f64) -> Result<Complex64> {
    check_point("alpha", alpha)?;
    if !(s.is_finite() && s < 1.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "weight function requires s < 1",
        });
    }
    let t = t_matrix(alpha, s, rho.dim());
    Ok((rho.as_matrix() * t).trace())
}

/// `W(alpha, s) = Tr{rho T(alpha, s)}`.
pub fn weight_function(rho: &DensityMatrix, alpha: Complex64, s: f64) -> Result<f64> {
    Ok(weight_function_complex(rho, alpha, s)?.re)
}

/// `chi(xi, s) = Tr{rho D(xi)} e^{s |xi|^2 / 2}`.
pub fn characteristic_function(rho: &DensityMatrix, xi: Complex64, s: f64) -> Result<Complex64> {
    check_point("xi", xi)?;
    if !s.is_finite() {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "must be finite",
        });
    }
    let dim = rho.dim();
    let d = displacement_block(xi, dim, dim);
    let tr = (rho.as_matrix() * d).trace();
    Ok(tr * libm::exp(0.5 * s * xi.norm_sqr()))
}

pub fn weight_scan(rho: &DensityMatrix, points: &[Complex64], s: f64) -> Result<Vec<f64>> {
    points.iter().map(|a| weight_function(rho, *a, s)).collect()
}

pub fn characteristic_scan(rho: &DensityMatrix, xis: &[Complex64], s: f64) -> Result<Vec<Complex64>> {
    xis.iter().map(|x| characteristic_function(rho, *x, s)).collect()
}

/// Largest deviations found by [`verify_squeeze_scaling`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCheck {
    /// `max |chi_rho(xi, s) - chi_squeezed(xi/Delta, s Delta^2)|` with the squeeze phase locked
    /// to `2 arg(xi)` per sample.
    pub locked: f64,
    /// `max |chi_squeezed(xi, s) - chi_rho(xi mu + xi^* nu, 0) e^{s|xi|^2/2}|` for the squeeze as given.
    pub general: f64,
}

/// Checks how squeezing acts on the characteristic function, both in the phase-locked
/// rescaled form and in the general `mu, nu` form.
pub fn verify_squeeze_scaling(
    rho: &DensityMatrix,
    zeta: SqueezeSpec,
    xi_samples: &[Complex64],
    s: f64,
) -> Result<ScalingCheck> {
    let delta = zeta.delta();
    let mut locked: f64 = 0.0;
    for xi in xi_samples {
        let squeezed = pre_squeeze(rho, locked_squeeze(zeta.magnitude(), *xi))?.rho;
        let lhs = characteristic_function(rho, *xi, s)?;
        let rhs = characteristic_function(&squeezed, xi / delta, s * delta * delta)?;
        locked = locked.max((lhs - rhs).norm());
    }
    let squeezed = pre_squeeze(rho, zeta)?.rho;
    let (mu, nu) = (zeta.mu(), zeta.nu());
    let mut general: f64 = 0.0;
    for xi in xi_samples {
        let lhs = characteristic_function(&squeezed, *xi, s)?;
        let mapped = xi * mu + xi.conj() * nu;
        let rhs = characteristic_function(rho, mapped, 0.0)? * libm::exp(0.5 * s * xi.norm_sqr());
        general = general.max((lhs - rhs).norm());
    }
    Ok(ScalingCheck { locked, general })
}
