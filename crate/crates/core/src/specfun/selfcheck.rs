//! Bessel functions against independent oracles on fixed grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bessel::{bessel_i, bessel_j0, i_scaled_asymptotic, j0_asymptotic, j0_series, ln_i_series, J0_CROSSOVER};
use crate::error::Result;

/// Largest discrepancy found on one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub points: usize,
}

impl GridCheck {
    pub fn pass(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

/// `J₀(x) = (1/π)∫₀^π cos(x sin θ)dθ`; the trapezoid rule on a periodic
/// analytic integrand converges geometrically.
pub fn j0_integral(x: f64) -> f64 {
    let m = 400;
    let h = PI / m as f64;
    let mut s = 0.5 * (1.0 + (x * PI.sin()).cos());
    for i in 1..m {
        s += (x * (i as f64 * h).sin()).cos();
    }
    s * h / PI
}

/// `I_n(x) = (1/π)∫₀^π e^{x cos θ}cos(nθ)dθ` for integer `n`.
pub fn i_integral(n: i32, x: f64) -> f64 {
    let m = 600;
    let h = PI / m as f64;
    let f = |t: f64| (x * t.cos()).exp() * (n as f64 * t).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for i in 1..m {
        s += f(i as f64 * h);
    }
    s * h / PI
}

fn grid_check(name: &str, tolerance: f64, errors: impl Iterator<Item = Result<f64>>) -> Result<GridCheck> {
    let mut max_error = 0.0f64;
    let mut points = 0;
    for e in errors {
        let e = e?;
        // NaN must not pass silently
        max_error = if e.is_nan() { f64::INFINITY } else { max_error.max(e) };
        points += 1;
    }
    Ok(GridCheck { name: name.into(), max_error, tolerance, points })
}

/// Every grid check: `J₀` to `10⁻¹⁰` absolute, `I_ν` to `10⁻⁸` relative,
/// and agreement of the two branches of each function around its crossover.
pub fn self_check() -> Result<Vec<GridCheck>> {
    let j0 = grid_check(
        "j0 vs integral, x in [0, 30]",
        1e-10,
        (0..=300).map(|i| {
            let x = i as f64 * 0.1;
            Ok((bessel_j0(x) - j0_integral(x)).abs())
        }),
    )?;
    let j0_overlap = grid_check(
        "j0 series vs Hankel, x in [10, 14]",
        1e-10,
        (0..=40).map(|i| {
            let x = J0_CROSSOVER - 2.0 + i as f64 * 0.1;
            Ok((j0_series(x) - j0_asymptotic(x)).abs())
        }),
    )?;
    let pairs: Vec<(i32, f64)> = [0, 1, 3, 10]
        .iter()
        .flat_map(|&n| [0.1, 1.0, 5.0, 20.0, 29.0, 31.0, 45.0, 50.0].map(|x| (n, x)))
        .collect();
    let i_int = grid_check(
        "I_n vs integral, n in {0,1,3,10}",
        1e-8,
        pairs.iter().map(|&(n, x)| {
            let exact = i_integral(n, x);
            // the cosine integral cancels to ~1e-16 absolute
            Ok((bessel_i(n as f64, x)? - exact).abs() / (exact.abs() + 1e-7))
        }),
    )?;
    let i_half = grid_check(
        "I_1/2 vs closed form",
        1e-8,
        [0.5, 2.0, 10.0, 40.0].iter().map(|&x| {
            let exact = (2.0 / (PI * x)).sqrt() * x.sinh();
            Ok(((bessel_i(0.5, x)? - exact) / exact).abs())
        }),
    )?;
    let overlap: Vec<(f64, f64)> = [0.0, 0.5, 1.0, 2.5, 5.0, 10.0]
        .iter()
        .flat_map(|&nu| (0..=30).map(move |i| (nu, 25.0 + i as f64 * 0.5)))
        .collect();
    let i_overlap = grid_check(
        "ln I series vs asymptotic, x in [25, 40]",
        1e-10,
        overlap.iter().map(|&(nu, x)| Ok((ln_i_series(nu, x) - x - i_scaled_asymptotic(nu, x).ln()).abs())),
    )?;
    Ok(vec![j0, j0_overlap, i_int, i_half, i_overlap])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_grids_pass() {
        for c in self_check().unwrap() {
            assert!(c.pass(), "{c:?}");
            assert!(c.points > 0);
        }
    }

    #[test]
    fn nan_fails() {
        let c = grid_check("x", 1.0, [Ok(0.0), Ok(f64::NAN)].into_iter()).unwrap();
        assert!(!c.pass());
    }
}
