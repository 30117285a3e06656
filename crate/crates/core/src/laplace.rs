//! `E exp(−λ cosh R_t)` by every available route, and the Laplace transform
//! of the pair `(e^{B_t}, ∫₀ᵗ e^{2B_u}du)`.
//!
//! Monte Carlo routes:
//!
//! * [`lt_direct`]: simulate `R` and average `e^{−λ cosh R_t}`.
//! * [`lt_gbm`]: Feynman–Kac over the geometric Brownian motion
//!   `V_u = e^{(α+½)u + B_u}`.
//! * [`lt_j0`]: a Bessel-`J₀` weighted average over two independent
//!   Gaussians, no path needed.
//! * [`lt_gamma_rep`]: the `Γ_t^{(α+½)}` functional.
//!
//! For `α = −½` the process is Brownian motion and [`lt_quadrature_bm`]
//! gives a deterministic reference value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::paths::{map_bm_paths, path_exp_functional, TimeGrid};
use crate::rng::{Exec, Seed};
use crate::sde::{r_terminal_path, ProcessSpec};
use crate::specfun::{bessel_j0, phi_kernel, QuadratureRule};
use crate::stats::{mc_reduce, MCEstimate};

/// Node-doubling tolerance of the Brownian quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

/// Point at which `E exp(−λ cosh R_t)` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LtQuery {
    pub spec: ProcessSpec,
    pub t: f64,
    pub lambda: f64,
}

impl LtQuery {
    pub fn new(alpha: f64, x0: f64, t: f64, lambda: f64) -> Result<Self> {
        let spec = ProcessSpec::new(alpha, x0)?;
        check_positive("t", t)?;
        check_positive("lambda", lambda)?;
        Ok(LtQuery { spec, t, lambda })
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return param(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

/// Names of the evaluation routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LtMethod {
    Direct,
    Gbm,
    J0,
    Gamma,
    Quadrature,
}

impl LtMethod {
    pub const MONTE_CARLO: [LtMethod; 4] = [LtMethod::Direct, LtMethod::Gbm, LtMethod::J0, LtMethod::Gamma];

    pub fn name(self) -> &'static str {
        match self {
            LtMethod::Direct => "direct",
            LtMethod::Gbm => "gbm",
            LtMethod::J0 => "j0",
            LtMethod::Gamma => "gamma",
            LtMethod::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for LtMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LtMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "direct" => LtMethod::Direct,
            "gbm" => LtMethod::Gbm,
            "j0" => LtMethod::J0,
            "gamma" => LtMethod::Gamma,
            "quadrature" | "bm" => LtMethod::Quadrature,
            other => return param(format!("unknown Laplace method '{other}'")),
        })
    }
}

/// Monte Carlo budget shared by the path-based routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: usize,
    pub steps_per_unit: usize,
    pub seed: Seed,
    pub exec: Exec,
}

impl McConfig {
    pub fn grid(&self, t: f64) -> Result<TimeGrid> {
        TimeGrid::with_resolution(t, self.steps_per_unit)
    }
}

/// One evaluation as emitted by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LtRecord {
    pub query: LtQuery,
    pub method: LtMethod,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: Option<Seed>,
    pub grid: Option<TimeGrid>,
}

/// Evaluates `q` by `method`. The quadrature route needs `α = −½`.
pub fn evaluate(q: &LtQuery, method: LtMethod, mc: &McConfig) -> Result<LtRecord> {
    Ok(evaluate_many(&q.spec, q.t, &[q.lambda], method, mc)?.remove(0))
}

/// Evaluates every `λ` in `lambdas` by `method`; Monte Carlo routes reuse
/// one set of paths for all of them.
pub fn evaluate_many(spec: &ProcessSpec, t: f64, lambdas: &[f64], method: LtMethod, mc: &McConfig) -> Result<Vec<LtRecord>> {
    let queries = lambdas
        .iter()
        .map(|&l| LtQuery::new(spec.alpha, spec.x0, t, l))
        .collect::<Result<Vec<_>>>()?;
    let grid = mc.grid(t)?;
    let (ests, seed, grid) = match method {
        LtMethod::Direct => (lt_direct_many(spec, t, lambdas, &grid, mc.seed, mc.n, mc.exec)?, Some(mc.seed), Some(grid)),
        LtMethod::Gbm => (lt_gbm_many(spec, t, lambdas, &grid, mc.seed, mc.n, mc.exec)?, Some(mc.seed), Some(grid)),
        LtMethod::J0 => (lt_j0_many(spec, t, lambdas, mc.seed, mc.n, mc.exec)?, Some(mc.seed), None),
        LtMethod::Gamma => (lt_gamma_rep_many(spec, t, lambdas, &grid, mc.seed, mc.n, mc.exec)?, Some(mc.seed), Some(grid)),
        LtMethod::Quadrature => {
            if spec.alpha != -0.5 {
                return param(format!("the quadrature route needs α = −1/2, got {}", spec.alpha));
            }
            let rule = QuadratureRule::gauss_hermite(crate::specfun::DEFAULT_GH_NODES)?;
            let v = lambdas
                .iter()
                .map(|&l| Ok(MCEstimate::exact(lt_quadrature_bm(spec.x0, t, l, &rule)?)))
                .collect::<Result<Vec<_>>>()?;
            (v, None, None)
        }
    };
    Ok(queries
        .into_iter()
        .zip(ests)
        .map(|(query, est)| LtRecord { query, method, mean: est.mean, stderr: est.stderr, n: est.n, seed, grid })
        .collect())
}

/// Mean of `e^{−λ cosh R_t}` over simulated paths of `R`.
pub fn lt_direct(q: &LtQuery, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<MCEstimate> {
    first(lt_direct_many(&q.spec, q.t, &[q.lambda], grid, seed, n, exec))
}

fn first(v: Result<Vec<MCEstimate>>) -> Result<MCEstimate> {
    Ok(v?[0])
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return param("at least one λ is required");
    }
    lambdas.iter().try_for_each(|&l| check_positive("lambda", l))
}

/// Column means of per-path rows of length `width`.
fn reduce_columns(rows: &[Vec<f64>], width: usize) -> Result<Vec<MCEstimate>> {
    (0..width)
        .map(|j| mc_reduce(&rows.iter().map(|r| r[j]).collect::<Vec<f64>>()))
        .collect()
}

/// [`lt_direct`] for several `λ` on the same paths.
pub fn lt_direct_many(spec: &ProcessSpec, t: f64, lambdas: &[f64], grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<Vec<MCEstimate>> {
    check_lambdas(lambdas)?;
    check_grid(t, grid)?;
    let rows = exec.try_map(n, |i| {
        let c = r_terminal_path(spec, grid, &mut seed.path_rng(i), i)?.cosh();
        Ok(lambdas.iter().map(|l| (-l * c).exp()).collect())
    })?;
    reduce_columns(&rows, lambdas.len())
}

fn check_grid(t: f64, grid: &TimeGrid) -> Result<()> {
    if (grid.t_end() - t).abs() > 1e-12 * t {
        return param(format!("grid ends at {} but the query time is {t}", grid.t_end()));
    }
    Ok(())
}

fn require_regular(spec: &ProcessSpec, what: &str) -> Result<()> {
    if spec.alpha < -0.5 {
        return param(format!("{what} needs α ≥ −1/2, got {}", spec.alpha));
    }
    Ok(())
}

/// `E exp(−λ cosh(x)·V_t − (λ²/2)∫₀ᵗ V_u² du)`, `V_u = e^{(α+½)u + B_u}`.
pub fn lt_gbm(q: &LtQuery, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<MCEstimate> {
    first(lt_gbm_many(&q.spec, q.t, &[q.lambda], grid, seed, n, exec))
}

/// [`lt_gbm`] for several `λ` on the same paths.
pub fn lt_gbm_many(spec: &ProcessSpec, t: f64, lambdas: &[f64], grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<Vec<MCEstimate>> {
    require_regular(spec, "lt_gbm")?;
    check_lambdas(lambdas)?;
    check_grid(t, grid)?;
    let ch = spec.x0.cosh();
    let rows = map_bm_paths(seed, grid, n, spec.drift_coefficient(), exec, |_, p, _| {
        let (int_v2, _) = path_exp_functional(p, grid, 0.0, 2.0)?;
        let v = p[grid.n_steps()].exp();
        Ok(lambdas.iter().map(|l| (-l * ch * v - 0.5 * l * l * int_v2).exp()).collect())
    })?;
    reduce_columns(&rows, lambdas.len())
}

/// `√(2π/t)·e^{−a²t/2}·E[1{V ≥ |B|}·V·h_t(B, x)·J₀(λ φ(B, V))]` with `B, V`
/// independent `N(0, t)`, `a = α + ½` and
/// `h_t(z, x) = exp(z²/(2t) + a z − λ cosh(x) e^z)`.
pub fn lt_j0(q: &LtQuery, seed: Seed, n: usize, exec: Exec) -> Result<MCEstimate> {
    first(lt_j0_many(&q.spec, q.t, &[q.lambda], seed, n, exec))
}

/// [`lt_j0`] for several `λ` on the same Gaussian pairs.
pub fn lt_j0_many(spec: &ProcessSpec, t: f64, lambdas: &[f64], seed: Seed, n: usize, exec: Exec) -> Result<Vec<MCEstimate>> {
    require_regular(spec, "lt_j0")?;
    check_lambdas(lambdas)?;
    check_positive("t", t)?;
    let a = spec.drift_coefficient();
    let ch = spec.x0.cosh();
    let st = t.sqrt();
    let prefactor = (2.0 * std::f64::consts::PI / t).sqrt() * (-0.5 * a * a * t).exp();
    let rows = exec.try_map(n, |i| {
        let mut rng = seed.path_rng(i);
        let b = st * crate::paths::standard_normal(&mut rng);
        let v = st * crate::paths::standard_normal(&mut rng);
        if v < b.abs() {
            return Ok(vec![0.0; lambdas.len()]);
        }
        let phi = phi_kernel(b, v)?;
        lambdas
            .iter()
            .map(|l| {
                let log_h = b * b / (2.0 * t) + a * b - l * ch * b.exp();
                let w = prefactor * v * log_h.exp() * bessel_j0(l * phi);
                if !w.is_finite() {
                    return Err(Error::Overflow(format!("J0 representation weight at B={b}, V={v}")));
                }
                Ok(w)
            })
            .collect()
    })?;
    reduce_columns(&rows, lambdas.len())
}

/// `e^{−λ}·E[e^{−λ(cosh x − 1)Γ}·(1 + λ∫₀ᵗ e^{B_u+(α+½)u}du)^{−α−1}]` with
/// `Γ = Γ_t^{(α+½)}` built from the same `λ`.
pub fn lt_gamma_rep(q: &LtQuery, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<MCEstimate> {
    first(lt_gamma_rep_many(&q.spec, q.t, &[q.lambda], grid, seed, n, exec))
}

/// [`lt_gamma_rep`] for several `λ` on the same paths.
pub fn lt_gamma_rep_many(spec: &ProcessSpec, t: f64, lambdas: &[f64], grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<Vec<MCEstimate>> {
    require_regular(spec, "lt_gamma_rep")?;
    check_lambdas(lambdas)?;
    check_grid(t, grid)?;
    gamma_route(spec.alpha, spec.x0, lambdas, grid, seed, n, exec)
}

fn gamma_route(alpha: f64, x: f64, lambdas: &[f64], grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<Vec<MCEstimate>> {
    let index = alpha + 0.5;
    // cosh x − 1 = 2 sinh²(x/2) keeps small x accurate
    let excess = 2.0 * (0.5 * x).sinh().powi(2);
    let rows = map_bm_paths(seed, grid, n, 0.0, exec, |_, p, _| {
        let (integral, endpoint) = path_exp_functional(p, grid, index, 1.0)?;
        Ok(lambdas
            .iter()
            .map(|l| {
                let denom = 1.0 + l * integral;
                let gamma = endpoint / denom;
                (-l * excess * gamma).exp() * denom.powf(-alpha - 1.0)
            })
            .collect())
    })?;
    Ok(reduce_columns(&rows, lambdas.len())?
        .iter()
        .zip(lambdas)
        .map(|(e, l)| e.scale((-l).exp()))
        .collect())
}

/// `e^{−λ}·E e^{−λ(cosh x − 1)Γ_t^{(−½)}}`, the Laplace transform of
/// `cosh R_t` for the index `α = −1`.
pub fn lt_alpha_minus1(x: f64, t: f64, lambda: f64, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<MCEstimate> {
    if !(x >= 0.0 && x.is_finite()) {
        return param(format!("x must be ≥ 0, got {x}"));
    }
    check_positive("t", t)?;
    check_positive("lambda", lambda)?;
    if (grid.t_end() - t).abs() > 1e-12 * t {
        return param(format!("grid ends at {} but t = {t}", grid.t_end()));
    }
    first(gamma_route(-1.0, x, &[lambda], grid, seed, n, exec))
}

/// `E e^{−λ cosh(x + B_t)}` by Gauss–Hermite quadrature, confirmed by node
/// doubling to [`QUADRATURE_TOLERANCE`].
pub fn lt_quadrature_bm(x: f64, t: f64, lambda: f64, rule: &QuadratureRule) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("lambda", lambda)?;
    let st = t.sqrt();
    rule.expect_checked(|z| (-lambda * (x + st * z).cosh()).exp(), QUADRATURE_TOLERANCE, "lt_quadrature_bm")
}

/// `E exp(−γe^{B_t} − (λ²/2)∫₀ᵗ e^{2B_u}du)`, evaluated as
/// `E e^{−λ cosh(x + B_t)}` with `x = arcosh(γ/λ)`. Only `γ ≥ λ` is
/// supported.
pub fn lt_vector(gamma: f64, lambda: f64, t: f64, rule: &QuadratureRule) -> Result<f64> {
    lt_quadrature_bm(vector_shift(gamma, lambda)?, t, lambda, rule)
}

fn vector_shift(gamma: f64, lambda: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    if !(gamma >= lambda && gamma.is_finite()) {
        return Err(Error::Domain {
            what: "lt_vector",
            detail: format!("arcosh(γ/λ) needs γ ≥ λ, got γ={gamma}, λ={lambda}"),
        });
    }
    Ok((gamma / lambda).acosh())
}

/// Default finite-difference step of [`lt_hbn`] at `γ`.
pub fn hbn_default_step(gamma: f64) -> f64 {
    1e-3 * gamma.max(1.0)
}

/// `(−1)^k e^{−k²t/2} ∂^k/∂γ^k E exp(−γe^{B_t} − (λ²/2)∫e^{2B_u}du)` by
/// central differences of step `h`.
///
/// By Girsanov this equals `E exp(−γY_t − (λ²/2)∫₀ᵗ Y_u²du)` for
/// `Y_u = e^{B_u + ku}`, and so `E e^{−λ cosh R_t}` for the process of index
/// `k − ½` started at `arcosh(γ/λ)`.
pub fn lt_hbn(k: u32, gamma: f64, lambda: f64, t: f64, h: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return param(format!("derivative order must be 1, 2 or 3, got {k}"));
    }
    check_positive("h", h)?;
    check_positive("t", t)?;
    let reach = f64::from(k) * h;
    if !(gamma - reach >= lambda) {
        return Err(Error::Domain {
            what: "lt_hbn",
            detail: format!("stencil reaches γ − {reach} below λ = {lambda} (γ = {gamma})"),
        });
    }
    // confirm convergence once at the centre, then reuse the rule
    lt_vector(gamma, lambda, t, rule)?;
    let st = t.sqrt();
    let p = |g: f64| -> Result<f64> {
        let x = vector_shift(g, lambda)?;
        Ok(rule.apply(|z| (-lambda * (x + st * z).cosh()).exp()))
    };
    let d = match k {
        1 => (p(gamma + h)? - p(gamma - h)?) / (2.0 * h),
        2 => (p(gamma + h)? - 2.0 * p(gamma)? + p(gamma - h)?) / (h * h),
        _ => {
            (p(gamma + 2.0 * h)? - 2.0 * p(gamma + h)? + 2.0 * p(gamma - h)? - p(gamma - 2.0 * h)?)
                / (2.0 * h * h * h)
        }
    };
    let kf = f64::from(k);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * (-0.5 * kf * kf * t).exp() * d)
}

/// Direct MC of `E exp(−γY_t − (λ²/2)∫₀ᵗ Y_u²du)`, `Y_u = e^{B_u + k u}`.
/// With `k = 0` this is the left side of [`lt_vector`].
#[allow(clippy::too_many_arguments)]
pub fn vector_functional_mc(
    gamma: f64,
    lambda: f64,
    k: f64,
    t: f64,
    grid: &TimeGrid,
    seed: Seed,
    n: usize,
    exec: Exec,
) -> Result<MCEstimate> {
    check_positive("t", t)?;
    if !(gamma >= 0.0 && lambda >= 0.0) {
        return param("γ and λ must be nonnegative");
    }
    let half_l2 = 0.5 * lambda * lambda;
    let values = map_bm_paths(seed, grid, n, k, exec, |_, p, _| {
        let (int_y2, _) = path_exp_functional(p, grid, 0.0, 2.0)?;
        Ok((-gamma * p[grid.n_steps()].exp() - half_l2 * int_y2).exp())
    })?;
    mc_reduce(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::DEFAULT_GH_NODES;

    fn rule() -> QuadratureRule {
        QuadratureRule::gauss_hermite(DEFAULT_GH_NODES).unwrap()
    }

    fn grid(t: f64) -> TimeGrid {
        TimeGrid::with_resolution(t, 256).unwrap()
    }

    #[test]
    fn quadrature_limits() {
        let r = rule();
        assert!((lt_quadrature_bm(0.0, 1.0, 1e-10, &r).unwrap() - 1.0).abs() < 1e-9);
        let v = lt_quadrature_bm(0.0, 1e-10, 1.3, &r).unwrap();
        assert!((v - (-1.3f64).exp()).abs() < 1e-9);
        // E e^{−λ cosh B_t} by trapezoid on the Gaussian density
        let (t, l) = (1.0f64, 1.0f64);
        let h = 1e-3;
        let mut s = 0.0;
        for i in -12000..=12000 {
            let z = i as f64 * h;
            s += (-l * (t.sqrt() * z).cosh() - 0.5 * z * z).exp();
        }
        s *= h / (2.0 * std::f64::consts::PI).sqrt();
        assert!((lt_quadrature_bm(0.0, t, l, &r).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn vector_domain() {
        let r = rule();
        assert!(matches!(lt_vector(0.5, 1.0, 1.0, &r), Err(Error::Domain { .. })));
        assert_eq!(lt_vector(1.0, 1.0, 1.0, &r).unwrap(), lt_quadrature_bm(0.0, 1.0, 1.0, &r).unwrap());
        assert!(lt_hbn(1, 1.0005, 1.0, 1.0, 1e-3, &r).is_err());
    }

    #[test]
    fn hbn_step_refinement_and_composition() {
        let r = rule();
        let (g, l, t) = (2.0, 1.0, 0.5);
        let h = hbn_default_step(g);
        let a = lt_hbn(1, g, l, t, h, &r).unwrap();
        let b = lt_hbn(1, g, l, t, h / 2.0, &r).unwrap();
        assert!((a - b).abs() < 1e-6);
        // second derivative as a difference of first derivatives
        let d1 = |gg: f64| -(0.5 * t).exp() * lt_hbn(1, gg, l, t, h, &r).unwrap();
        let nested = (d1(g + h) - d1(g - h)) / (2.0 * h);
        let direct = (2.0 * t).exp() * lt_hbn(2, g, l, t, h, &r).unwrap();
        assert!((nested - direct).abs() < 1e-5, "{nested} {direct}");
    }

    #[test]
    fn small_lambda_limits() {
        let q = LtQuery::new(0.0, 0.5, 0.5, 1e-8).unwrap();
        let g = grid(0.5);
        let v = lt_direct(&q, &g, Seed(1), 200, Exec::Sequential).unwrap();
        assert!((v.mean - 1.0).abs() < 1e-6);
        let v = lt_gbm(&q, &g, Seed(1), 200, Exec::Sequential).unwrap();
        assert!((v.mean - 1.0).abs() < 1e-6);
        let v = lt_gamma_rep(&q, &g, Seed(1), 200, Exec::Sequential).unwrap();
        assert!((v.mean - 1.0).abs() < 1e-6);
    }

    #[test]
    fn alpha_minus1_at_origin_is_exact() {
        let g = grid(1.0);
        let v = lt_alpha_minus1(0.0, 1.0, 0.7, &g, Seed(3), 50, Exec::Sequential).unwrap();
        assert!((v.mean - (-0.7f64).exp()).abs() < 1e-15);
        assert!(v.stderr < 1e-15);
    }

    #[test]
    fn gamma_route_at_origin_drops_first_factor() {
        let q = LtQuery::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let g = grid(1.0);
        let v = lt_gamma_rep(&q, &g, Seed(9), 500, Exec::Sequential).unwrap();
        let manual: Vec<f64> = map_bm_paths(Seed(9), &g, 500, 0.0, Exec::Sequential, |_, p, _| {
            let (i, _) = path_exp_functional(p, &g, 0.5, 1.0)?;
            Ok((-1.0f64).exp() / (1.0 + i))
        })
        .unwrap();
        let m = mc_reduce(&manual).unwrap();
        assert!((v.mean - m.mean).abs() < 1e-14);
    }

    #[test]
    fn routes_agree_on_brownian_case() {
        let r = rule();
        let q = LtQuery::new(-0.5, 0.0, 1.0, 1.0).unwrap();
        let exact = MCEstimate::exact(lt_quadrature_bm(0.0, 1.0, 1.0, &r).unwrap());
        let g = grid(1.0);
        let n = 20_000;
        for est in [
            lt_direct(&q, &g, Seed(5), n, Exec::Sequential).unwrap(),
            lt_gbm(&q, &g, Seed(6), n, Exec::Sequential).unwrap(),
            lt_j0(&q, Seed(7), n, Exec::Sequential).unwrap(),
            lt_gamma_rep(&q, &g, Seed(8), n, Exec::Sequential).unwrap(),
        ] {
            assert!(est.agrees_with(&exact, 4.0), "{est:?} vs {}", exact.mean);
        }
    }

    #[test]
    fn j0_indicator_and_bounds() {
        let q = LtQuery::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let est = lt_j0(&q, Seed(2), 2000, Exec::Sequential).unwrap();
        assert!(est.mean.is_finite());
        assert!(lt_j0(&LtQuery { spec: ProcessSpec { alpha: -0.75, x0: 1.0 }, t: 1.0, lambda: 1.0 }, Seed(2), 10, Exec::Sequential).is_err());
    }

    #[test]
    fn many_lambdas_match_single_calls() {
        let mc = McConfig { n: 300, steps_per_unit: 64, seed: Seed(5), exec: Exec::Sequential };
        let spec = ProcessSpec::new(0.0, 1.0).unwrap();
        for method in LtMethod::MONTE_CARLO {
            let many = evaluate_many(&spec, 0.5, &[1.0, 2.0], method, &mc).unwrap();
            for rec in &many {
                let single = evaluate(&rec.query, method, &mc).unwrap();
                assert_eq!(&single, rec, "{method}");
            }
        }
        assert!(evaluate_many(&spec, 0.5, &[], LtMethod::Gbm, &mc).is_err());
        assert!(evaluate_many(&spec, 0.5, &[1.0], LtMethod::Quadrature, &mc).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [LtMethod::Direct, LtMethod::Gbm, LtMethod::J0, LtMethod::Gamma, LtMethod::Quadrature] {
            assert_eq!(m.name().parse::<LtMethod>().unwrap(), m);
        }
        assert!("bogus".parse::<LtMethod>().is_err());
    }
}
