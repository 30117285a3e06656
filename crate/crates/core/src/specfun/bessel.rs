//! Bessel functions `J₀` and `I_ν` for real arguments.

use statrs::function::gamma::ln_gamma;

use crate::error::{param, Error, Result};

/// Below this `|x|` `J₀` uses its power series, above it the Hankel expansion.
pub const J0_CROSSOVER: f64 = 12.0;

/// Below this `x` (or `ν²/4`, whichever is larger) `I_ν` uses its power
/// series, above it the large-argument expansion.
pub const I_CROSSOVER: f64 = 30.0;

/// `J₀(x)`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= J0_CROSSOVER {
        j0_series(x)
    } else {
        j0_asymptotic(x)
    }
}

pub(crate) fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && kf > q.sqrt() {
            break;
        }
    }
    sum
}

/// Hankel expansion `√(2/πx)(P cos χ − Q sin χ)`, `χ = x − π/4`.
pub(crate) fn j0_asymptotic(x: f64) -> f64 {
    let (p, q) = hankel_pq(0.0, x);
    let chi = x - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (0.0, 0.0);
    let mut a = 1.0; // a_k(ν)/x^k
    let mut last = f64::INFINITY;
    for k in 0..200usize {
        if k > 0 {
            let kf = k as f64;
            let odd = 2.0 * kf - 1.0;
            a *= (mu - odd * odd) / (kf * 8.0 * x);
        }
        if a.abs() > last {
            break;
        }
        last = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    (p, q)
}

/// `I_ν(x)` for `ν ≥ 0`, `x ≥ 0`; overflow is reported, not returned as ∞.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    check_i_args(nu, x)?;
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let ln = ln_bessel_i(nu, x);
    let v = ln.exp();
    if !v.is_finite() {
        return Err(Error::Overflow(format!("I_{nu}({x})")));
    }
    Ok(v)
}

/// Exponentially scaled `e^{−x} I_ν(x)`; never overflows.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    check_i_args(nu, x)?;
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if use_i_asymptotic(nu, x) {
        Ok(i_scaled_asymptotic(nu, x))
    } else {
        Ok((ln_i_series(nu, x) - x).exp())
    }
}

fn check_i_args(nu: f64, x: f64) -> Result<()> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return param(format!("Bessel I order must be finite and ≥ 0, got {nu}"));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return param(format!("Bessel I argument must be finite and ≥ 0, got {x}"));
    }
    Ok(())
}

fn use_i_asymptotic(nu: f64, x: f64) -> bool {
    x >= I_CROSSOVER.max(0.25 * nu * nu)
}

fn ln_bessel_i(nu: f64, x: f64) -> f64 {
    if use_i_asymptotic(nu, x) {
        x + i_scaled_asymptotic(nu, x).ln()
    } else {
        ln_i_series(nu, x)
    }
}

/// `ln I_ν(x)` from `Σ (x/2)^{2k+ν} / (k! Γ(k+ν+1))`, summed relative to the
/// leading term with periodic rescaling.
pub(crate) fn ln_i_series(nu: f64, x: f64) -> f64 {
    let lead = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0);
    let q = 0.25 * x * x;
    let mut shift = 0.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..100_000 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if sum > 1e250 {
            sum *= 1e-250;
            term *= 1e-250;
            shift += 250.0 * std::f64::consts::LN_10;
        }
        if term < 1e-17 * sum && kf > x {
            break;
        }
    }
    lead + shift + sum.ln()
}

pub(crate) fn i_scaled_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut a = 1.0;
    let mut sum = 1.0;
    let mut last = 1.0f64;
    for k in 1..500usize {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= -(mu - odd * odd) / (kf * 8.0 * x);
        if a.abs() > last && kf > 0.5 * nu + 1.0 {
            break;
        }
        last = a.abs();
        sum += a;
        if a.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn j0_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!((bessel_j0(-3.3) - bessel_j0(3.3)).abs() == 0.0);
        // first zero
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-14);
    }

    #[test]
    fn i_small_cases() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(2.5, 0.0).unwrap(), 0.0);
        assert!(bessel_i(-1.0, 1.0).is_err());
        assert!(matches!(bessel_i(0.0, 1000.0), Err(Error::Overflow(_))));
        let s = bessel_i_scaled(0.0, 1000.0).unwrap();
        assert!((s - (1.0 + 1.0 / 8000.0) / (2.0 * PI * 1000.0).sqrt()).abs() < 1e-9);
    }
}
