//! Closed-form kernels that appear inside the Laplace-transform and
//! density representations.

use crate::error::{Error, Result};
use crate::specfun::quadrature::QuadratureRule;

/// `√2·e^{x/2}·(cosh z − cosh x)^{1/2}` for `z ≥ |x|`.
///
/// `cosh z − cosh x = 2 sinh((z+x)/2) sinh((z−x)/2)` keeps the value
/// accurate near the diagonal `z = |x|`.
pub fn phi_kernel(x: f64, z: f64) -> Result<f64> {
    if !(z >= x.abs()) {
        return Err(Error::Domain {
            what: "phi_kernel",
            detail: format!("need z ≥ |x|, got x={x}, z={z}"),
        });
    }
    let prod = (0.5 * (z + x)).sinh() * (0.5 * (z - x)).sinh();
    Ok(2.0 * (0.5 * x).exp() * prod.max(0.0).sqrt())
}

/// `φ_y(z) = ln(y e^{−z} + cosh z + √(y²e^{−2z} + sinh²z + 2y e^{−z} cosh z))`.
///
/// Equal to `arcosh(cosh z + y e^{−z})`; evaluated through `ln_1p` so that
/// small `y` and `z` keep full relative accuracy.
pub fn varphi(y: f64, z: f64) -> f64 {
    let ye = y * (-z).exp();
    let sh = z.sinh();
    let half = (0.5 * z).sinh();
    let c_minus_1 = 2.0 * half * half + ye;
    let root = (ye * ye + sh * sh + 2.0 * ye * z.cosh()).sqrt();
    (c_minus_1 + root).ln_1p()
}

/// Node-doubling tolerance for [`g_function`].
pub const G_TOLERANCE: f64 = 1e-6;

/// `G_t(y) = e^{−t/2}·E exp(B_t + (B_t² − φ_y(B_t)²)/(2t))`, which equals
/// `E exp(−y/A_t^{(1)})`.
pub fn g_function(t: f64, y: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("g_function needs t > 0, got {t}")));
    }
    if !(y >= 0.0 && y.is_finite()) {
        return Err(Error::Parameter(format!("g_function needs y ≥ 0, got {y}")));
    }
    let v = rule.expect_checked(g_integrand(t, y), G_TOLERANCE, "g_function")?;
    Ok((-0.5 * t).exp() * v)
}

/// [`g_function`] on `rule` alone, without the node-doubling check.
pub(crate) fn g_function_on(t: f64, y: f64, rule: &QuadratureRule) -> f64 {
    (-0.5 * t).exp() * rule.apply(g_integrand(t, y))
}

fn g_integrand(t: f64, y: f64) -> impl Fn(f64) -> f64 {
    let st = t.sqrt();
    move |z: f64| {
        let b = st * z;
        let phi = varphi(y, b);
        // (b² − φ²)/(2t) written as (b−φ)(b+φ)/(2t) to avoid cancellation
        (b + (b - phi) * (b + phi) / (2.0 * t)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quadrature::DEFAULT_GH_NODES;

    #[test]
    fn phi_cases() {
        assert_eq!(phi_kernel(0.7, 0.7).unwrap(), 0.0);
        assert_eq!(phi_kernel(-0.7, 0.7).unwrap(), 0.0);
        let z = 1.3f64;
        let direct = std::f64::consts::SQRT_2 * (z.cosh() - 1.0).sqrt();
        assert!((phi_kernel(0.0, z).unwrap() - direct).abs() < 1e-14);
        let direct = std::f64::consts::SQRT_2 * 0.5f64.exp() * (2f64.cosh() - 1f64.cosh()).sqrt();
        assert!((phi_kernel(1.0, 2.0).unwrap() - direct).abs() < 1e-13);
        assert!(phi_kernel(1.0, 0.5).is_err());
    }

    #[test]
    fn phi_monotone_in_z() {
        for x in [-1.5, 0.0, 0.4, 2.0] {
            let mut last = -1.0;
            for i in 0..200 {
                let z = f64::abs(x) + i as f64 * 0.05;
                let v = phi_kernel(x, z).unwrap();
                assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn varphi_cases() {
        for z in [-2.0, -0.3, 0.0, 0.3, 2.0] {
            assert!((varphi(0.0, z) - f64::abs(z)).abs() < 1e-14, "z={z}");
        }
        for y in [0.3, 2.0] {
            assert!((varphi(y, 0.0) - (1.0f64 + y).acosh()).abs() < 1e-14);
        }
        // arcosh(1+y) = √(2y)(1 − y/12 + …) for small y
        let y = 1e-8f64;
        assert!(((varphi(y, 0.0) - (2.0 * y).sqrt() * (1.0 - y / 12.0)) / y.sqrt()).abs() < 1e-14);
        // literal formula
        let (y, z) = (1.0f64, 1.0f64);
        let lit = (y * (-z).exp()
            + z.cosh()
            + (y * y * (-2.0 * z).exp() + z.sinh().powi(2) + 2.0 * y * (-z).exp() * z.cosh()).sqrt())
        .ln();
        assert!((varphi(y, z) - lit).abs() < 1e-14);
    }

    #[test]
    fn g_function_properties() {
        let rule = QuadratureRule::gauss_hermite(DEFAULT_GH_NODES).unwrap();
        for t in [0.25, 1.0] {
            assert!((g_function(t, 0.0, &rule).unwrap() - 1.0).abs() < 1e-12);
            let mut last = 1.0 + 1e-15;
            for i in 0..40 {
                let y = i as f64 * 0.25;
                let g = g_function(t, y, &rule).unwrap();
                assert!(g > 0.0 && g <= 1.0 + 1e-12);
                assert!(g <= last, "t={t} y={y}");
                last = g;
            }
        }
        assert!(g_function(0.0, 1.0, &rule).is_err());
        assert!(g_function(1.0, -1.0, &rule).is_err());
    }
}
