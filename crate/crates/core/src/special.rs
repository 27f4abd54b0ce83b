//! Log-factorials, binomial weights and the normalized associated-Laguerre recurrence
//! shared by the displacement and T-operator matrix elements.

use alloc::vec::Vec;
use num_complex::Complex64;

/// `ln k!` for `k = 0..len`.
pub(crate) fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len.max(1));
    out.push(0.0);
    for k in 1..len {
        let prev = out[k - 1];
        out.push(prev + libm::log(k as f64));
    }
    out.truncate(len.max(1));
    out
}

pub(crate) fn ln_factorial(k: usize) -> f64 {
    if k < 2 {
        0.0
    } else {
        libm::lgamma(k as f64 + 1.0)
    }
}

/// `e^{i theta}`.
#[inline]
pub(crate) fn cis(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

#[inline]
pub(crate) fn arg(z: Complex64) -> f64 {
    libm::atan2(z.im, z.re)
}

#[inline]
pub(crate) fn abs(z: Complex64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Fills `out[j] = scale * sqrt(j! / (j+k)!) * L_j^{(k)}(x)` for `j = 0..out.len()`, where
/// `scale` is chosen by the caller through `out[0]` (`= scale / sqrt(k!)`).
///
/// The normalized form keeps every intermediate within the magnitude of the final
/// matrix element, so the recurrence neither overflows nor loses the Gaussian prefactor.
pub(crate) fn normalized_laguerre(k: usize, x: f64, first: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let kf = k as f64;
    out[0] = first;
    if out.len() == 1 {
        return;
    }
    out[1] = (1.0 + kf - x) / libm::sqrt(kf + 1.0) * first;
    for j in 1..out.len() - 1 {
        let jf = j as f64;
        let num = (2.0 * jf + 1.0 + kf - x) * out[j] - libm::sqrt(jf * (jf + kf)) * out[j - 1];
        out[j + 1] = num / libm::sqrt((jf + 1.0) * (jf + kf + 1.0));
    }
}

/// Column-stochastic binomial thinning matrix `M[m][n] = C(n,m) eta^m (1-eta)^(n-m)` for
/// `m <= n < len`, stored row-major as `len * len`.
pub(crate) fn binomial_thinning(eta: f64, len: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; len * len];
    if eta >= 1.0 {
        for n in 0..len {
            out[n * len + n] = 1.0;
        }
        return out;
    }
    let lf = ln_factorials(len);
    let ln_eta = libm::log(eta);
    let ln_loss = libm::log1p(-eta);
    for n in 0..len {
        for m in 0..=n {
            let ln_w = lf[n] - lf[m] - lf[n - m] + m as f64 * ln_eta + (n - m) as f64 * ln_loss;
            out[m * len + n] = libm::exp(ln_w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laguerre_direct(n: usize, k: usize, x: f64) -> f64 {
        // explicit sum: sum_i (-1)^i C(n+k, n-i) x^i / i!
        let mut total = 0.0;
        for i in 0..=n {
            let ln_c = ln_factorial(n + k) - ln_factorial(n - i) - ln_factorial(k + i);
            let term = libm::exp(ln_c - ln_factorial(i)) * libm::pow(x, i as f64);
            total += if i % 2 == 0 { term } else { -term };
        }
        total
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for &(k, x) in &[(0usize, 0.3), (3, 1.7), (7, 4.2), (1, 0.0)] {
            let first = 1.0 / libm::exp(0.5 * ln_factorial(k));
            let mut out = [0.0; 12];
            normalized_laguerre(k, x, first, &mut out);
            for (j, g) in out.iter().enumerate() {
                let scale = libm::exp(0.5 * (ln_factorial(j) - ln_factorial(j + k)));
                let expected = scale * laguerre_direct(j, k, x);
                assert!((g - expected).abs() < 1e-10 * expected.abs().max(1.0), "k={k} j={j}");
            }
        }
    }

    #[test]
    fn thinning_columns_sum_to_one() {
        let len = 30;
        let m = binomial_thinning(0.37, len);
        for n in 0..len {
            let col: f64 = (0..len).map(|r| m[r * len + n]).sum();
            assert!((col - 1.0).abs() < 1e-13);
        }
    }
}
