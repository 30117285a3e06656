//! Transition law of the squared Bessel process as a Poisson mixture of
//! Gamma laws: `X_t | N ~ Gamma(δ/2 + N, 2t)`, `N ~ Poisson(x₀/(2t))`.

use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::sde::BesqSpec;

/// Poisson weights `(j, w_j)` of the mixture, covering all but `1e-16` mass.
fn poisson_terms(mean: f64) -> Vec<(f64, f64)> {
    if mean == 0.0 {
        return vec![(0.0, 1.0)];
    }
    let spread = 12.0 * mean.sqrt() + 40.0;
    let lo = (mean - spread).floor().max(0.0) as u64;
    let hi = (mean + spread).ceil() as u64;
    (lo..=hi)
        .map(|j| {
            let jf = j as f64;
            (jf, (-mean + jf * mean.ln() - ln_gamma(jf + 1.0)).exp())
        })
        .filter(|&(_, w)| w > 0.0)
        .collect()
}

fn check(t: f64, y: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("BESQ time must be positive, got {t}")));
    }
    if y.is_nan() {
        return Err(Error::Parameter("BESQ evaluation point is NaN".into()));
    }
    Ok(())
}

/// Density of `X_t` at `y > 0`.
pub fn besq_density(spec: &BesqSpec, t: f64, y: f64) -> Result<f64> {
    check(t, y)?;
    if y <= 0.0 {
        return Ok(0.0);
    }
    let scale = 2.0 * t;
    let half_dim = 0.5 * spec.dimension();
    let s: f64 = poisson_terms(spec.x0 / scale)
        .into_iter()
        .map(|(j, w)| {
            let k = half_dim + j;
            w * ((k - 1.0) * y.ln() - y / scale - ln_gamma(k) - k * scale.ln()).exp()
        })
        .sum();
    Ok(s)
}

/// `P(X_t ≤ y)`.
pub fn besq_cdf(spec: &BesqSpec, t: f64, y: f64) -> Result<f64> {
    check(t, y)?;
    if y <= 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(1.0);
    }
    let scale = 2.0 * t;
    let half_dim = 0.5 * spec.dimension();
    let terms = poisson_terms(spec.x0 / scale);
    let mass: f64 = terms.iter().map(|t| t.1).sum();
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::Accuracy {
            what: "besq_cdf",
            detail: format!("Poisson mixture mass {mass} for mean {}", spec.x0 / scale),
        });
    }
    let v: f64 = terms.iter().map(|&(j, w)| w * gamma_lr(half_dim + j, y / scale)).sum();
    Ok(v.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel::bessel_i;
    use crate::specfun::quadrature::integrate_to_inf;

    #[test]
    fn gamma_case() {
        let spec = BesqSpec::new(0.0, 0.0).unwrap(); // δ = 2
        let v = besq_density(&spec, 1.0, 2.0).unwrap();
        assert!((v - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn normalisation() {
        let spec = BesqSpec::new(-0.5, 1.0).unwrap(); // δ = 1
        let f = |y: f64| besq_density(&spec, 1.0, y).unwrap();
        let total = integrate_to_inf(&f, 0.0, 1e-10).unwrap();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    // For ν = δ/2 − 1 ≥ 0 the density is (1/2t)(y/x)^{ν/2} e^{−(x+y)/2t} I_ν(√(xy)/t).
    #[test]
    fn matches_bessel_form() {
        for (index, x0, t, y) in [(0.0, 1.0, 1.0, 0.7), (1.5, 3.0, 0.5, 4.0), (3.0, 0.2, 2.0, 9.0)] {
            let spec = BesqSpec::new(index, x0).unwrap();
            let closed = 0.5 / t
                * (y / x0).powf(0.5 * index)
                * (-(x0 + y) / (2.0 * t)).exp()
                * bessel_i(index, (x0 * y).sqrt() / t).unwrap();
            let v = besq_density(&spec, t, y).unwrap();
            assert!(((v - closed) / closed).abs() < 1e-10, "{v} {closed}");
        }
    }

    #[test]
    fn cdf_limits_and_consistency() {
        let spec = BesqSpec::new(0.5, 2.0).unwrap();
        assert_eq!(besq_cdf(&spec, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(besq_cdf(&spec, 1.0, f64::INFINITY).unwrap(), 1.0);
        assert!(besq_cdf(&spec, 1.0, 1e4).unwrap() > 1.0 - 1e-12);
        let f = |y: f64| besq_density(&spec, 1.0, y).unwrap();
        let part = crate::specfun::integrate(&f, 0.0, 3.0, 1e-12).unwrap();
        assert!((part - besq_cdf(&spec, 1.0, 3.0).unwrap()).abs() < 1e-9);
    }
}
