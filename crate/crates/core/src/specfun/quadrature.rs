//! Gauss–Hermite rules for Gaussian expectations and adaptive
//! Gauss–Kronrod integration on intervals.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Gauss–Hermite node count.
pub const DEFAULT_GH_NODES: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    GaussHermite,
    AdaptiveInterval,
}

/// Nodes and weights of a fixed rule. For Gauss–Hermite the rule is
/// normalised against the standard normal law: `E f(Z) ≈ Σ wᵢ f(xᵢ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

const PI_M4: f64 = 0.751_125_544_464_942_5;

/// `(h̃_n(z), h̃_{n−1}(z))` for the orthonormal Hermite functions without
/// the Gaussian factor.
fn hermite_orthonormal(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI_M4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

impl QuadratureRule {
    /// `n`-point Gauss–Hermite rule for the standard normal weight.
    ///
    /// Nodes start from the eigenvalues of the Hermite Jacobi matrix and are
    /// polished by Newton steps on the orthonormal recurrence, which also
    /// yields the weights. Usable up to a few hundred nodes before the
    /// outer weights underflow.
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        if !(16..=400).contains(&n) {
            return Err(Error::Parameter(format!(
                "Gauss-Hermite node count must be in 16..=400, got {n}"
            )));
        }
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        guesses.sort_by(f64::total_cmp);

        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &g in &guesses {
            let mut z = g;
            for _ in 0..8 {
                let (p1, p2) = hermite_orthonormal(n, z);
                let step = p1 / ((2.0 * nf).sqrt() * p2);
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            let (_, p2) = hermite_orthonormal(n, z);
            let pp = (2.0 * nf).sqrt() * p2;
            nodes.push(z * std::f64::consts::SQRT_2);
            weights.push(2.0 / (pp * pp) / std::f64::consts::PI.sqrt());
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Accuracy {
                what: "Gauss-Hermite nodes",
                detail: format!("root polishing for n={n} produced an invalid rule"),
            });
        }
        Ok(QuadratureRule { nodes, weights, kind: RuleKind::GaussHermite })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Rule of the same kind with twice as many nodes.
    pub fn doubled(&self) -> Result<Self> {
        match self.kind {
            RuleKind::GaussHermite => Self::gauss_hermite(2 * self.len()),
            RuleKind::AdaptiveInterval => Err(Error::Parameter(
                "adaptive rules are refined internally".into(),
            )),
        }
    }

    /// `Σ wᵢ f(xᵢ)`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `E f(Z)` on this rule, confirmed against the doubled rule.
    pub fn expect_checked<F: Fn(f64) -> f64>(&self, f: F, tol: f64, what: &'static str) -> Result<f64> {
        let base = self.apply(&f);
        let fine = self.doubled()?.apply(&f);
        if !(base.is_finite() && fine.is_finite()) || (base - fine).abs() > tol {
            return Err(Error::Accuracy {
                what,
                detail: format!(
                    "{} nodes give {base:e}, {} nodes give {fine:e} (tolerance {tol:e})",
                    self.len(),
                    2 * self.len()
                ),
            });
        }
        Ok(base)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let d = h * XGK[j];
        let s = f(c - d) + f(c + d);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

const MAX_INTERVALS: usize = 4000;

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]`: the interval
/// with the largest error estimate is bisected until the summed estimate
/// drops below `tol` (or `1e-12` relative, whichever is looser).
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with(f, a, b, tol, 1e-12)
}

/// [`integrate`] stopping once the error estimate is below `abs` or `rel`
/// times the integral.
pub fn integrate_with<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs: f64, rel: f64) -> Result<f64> {
    let tol = abs;
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Accuracy {
                what: "adaptive quadrature",
                detail: format!("non-finite integrand on [{a}, {b}]"),
            });
        }
        if err <= tol.max(rel * total.abs()) {
            return Ok(total);
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty partition");
        let (lo, hi, _, _) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if parts.len() >= MAX_INTERVALS || !(lo < mid && mid < hi) {
            return Err(Error::Accuracy {
                what: "adaptive quadrature",
                detail: format!("error {err:e} above {tol:e} after {} subintervals on [{a}, {b}]", parts.len()),
            });
        }
        let (l, el) = gk15(f, lo, mid);
        let (r, er) = gk15(f, mid, hi);
        parts[worst] = (lo, mid, l, el);
        parts.push((mid, hi, r, er));
    }
}

/// `∫_a^∞ f` via `x = a + s/(1−s)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> Result<f64> {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - s;
        let v = f(a + s / d) / (d * d);
        if v.is_finite() { v } else { 0.0 }
    };
    integrate(&g, 0.0, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_moment(k: u32) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            (1..k).step_by(2).map(|j| j as f64).product()
        }
    }

    #[test]
    fn hermite_monomials_exact() {
        for n in [16, 64, 128, 256] {
            let r = QuadratureRule::gauss_hermite(n).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0), "n={n}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            for k in 0..=8u32 {
                let v = r.apply(|x| x.powi(k as i32));
                assert!((v - normal_moment(k)).abs() < 1e-12, "n={n} k={k} v={v}");
            }
        }
    }

    #[test]
    fn hermite_rejects_small_rules() {
        assert!(QuadratureRule::gauss_hermite(4).is_err());
    }

    #[test]
    fn hermite_lognormal_mean() {
        let r = QuadratureRule::gauss_hermite(DEFAULT_GH_NODES).unwrap();
        let v = r.expect_checked(|z| z.exp(), 1e-12, "test").unwrap();
        assert!((v - 0.5f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn kronrod_integrals() {
        let v = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate_to_inf(&|x: f64| (-x).exp(), 0.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
        let v = integrate(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }
}
