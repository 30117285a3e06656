//! Densities of `cosh R_t` and `R_t` started at 0, and the auxiliary
//! identities around the exponential functional `A_t = ∫₀ᵗ e^{2B_u}du`.
//!
//! Started at 0, `cosh R_t` is a Gamma mixture over
//! `A = A^{(2α+1)}_{t/4} = ∫₀^{t/4} e^{2(B_u + (2α+1)u)}du`:
//!
//! ```text
//! f(z) = 4^{−(α+1)} (z−1)^α / Γ(α+1) · E[ e^{−(z−1)/(4A)} A^{−(α+1)} ]
//! ```
//!
//! [`ZeroLawSample`] holds one batch of `A` draws and evaluates the density,
//! its CDF and bin masses from the same draws, so every point of a curve
//! shares the sample.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};
use statrs::function::gamma as sg;

use crate::error::{param, Error, Result};
use crate::paths::{exp_functional_sample, map_bm_paths, path_exp_functional, standard_normal, ExpFactor, TimeGrid};
use crate::rng::{Exec, Seed};
use crate::sde::{ProcessSpec, RStepper};
use crate::specfun::{bessel_i_scaled, bessel_j0, g_function, g_function_on, integrate, integrate_to_inf, integrate_with, ln_gamma, phi_kernel, QuadratureRule};
use crate::stats::{mc_reduce, MCEstimate, STDERR_GATE};

/// Lowest value a density evaluation may take before it is reported as
/// inconsistent.
pub const NEGATIVE_FLOOR: f64 = -1e-8;

/// Number of points on a default curve.
pub const CURVE_POINTS: usize = 60;

/// Largest change allowed between the `h` and `h/2` derivative of `G`.
pub const FD_HALVING_TOLERANCE: f64 = 1e-5;

/// Tail mass targeted by [`ZeroLawSample::truncation`].
pub const TAIL_TARGET: f64 = 1e-3;

/// `n` points `z` with `z − 1` geometric on `[lo, hi]`.
pub fn geometric_z_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return param(format!("geometric grid needs 0 < lo < hi and n ≥ 2, got [{lo}, {hi}], n={n}"));
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| 1.0 + lo * (r * i as f64).exp()).collect())
}

/// 60 points with `z − 1` geometric on `[10⁻³, 20]`.
pub fn default_z_grid() -> Vec<f64> {
    geometric_z_grid(1e-3, 20.0, CURVE_POINTS).expect("valid constants")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub z: f64,
    pub value: f64,
    pub stderr: f64,
}

/// Provenance of a curve. `shared_sample` marks curves whose points reuse
/// one Monte Carlo batch, so their errors are correlated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub method: String,
    pub variable: String,
    pub spec: ProcessSpec,
    pub t: f64,
    pub n: Option<usize>,
    pub seed: Option<Seed>,
    pub grid: Option<TimeGrid>,
    pub rule_nodes: Option<usize>,
    pub shared_sample: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub points: Vec<DensityPoint>,
    pub meta: CurveMeta,
}

impl DensityCurve {
    pub fn new(points: Vec<DensityPoint>, meta: CurveMeta) -> Result<Self> {
        if points.windows(2).any(|w| !(w[0].z < w[1].z)) {
            return param("density curve abscissae must be strictly increasing");
        }
        if let Some(p) = points.iter().find(|p| !(p.value >= NEGATIVE_FLOOR)) {
            return Err(Error::Inconsistent {
                what: "density curve",
                detail: format!("value {:e} at z={} below {NEGATIVE_FLOOR:e}", p.value, p.z),
            });
        }
        Ok(DensityCurve { points, meta })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "z,value,stderr")?;
        for p in &self.points {
            writeln!(w, "{},{},{}", p.z, p.value, p.stderr)?;
        }
        Ok(())
    }

    /// Writes `<stem>.csv` and the `<stem>.json` metadata sidecar into `dir`.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.json"));
        let mut w = BufWriter::new(File::create(&csv)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        serde_json::to_writer_pretty(BufWriter::new(File::create(&json)?), &self.meta)?;
        Ok((csv, json))
    }
}

/// Regularised lower incomplete gamma, `0` at `x = 0`.
fn lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        sg::gamma_lr(a, x)
    }
}

fn upper_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        sg::gamma_ur(a, x)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return param(format!("t must be positive and finite, got {t}"));
    }
    Ok(())
}

fn check_grid_end(grid: &TimeGrid, end: f64) -> Result<()> {
    if (grid.t_end() - end).abs() > 1e-12 * end {
        return param(format!("grid must end at {end}, ends at {}", grid.t_end()));
    }
    Ok(())
}

/// Draws of `A^{(2α+1)}_{t/4}` for a process of index `α` started at 0.
#[derive(Clone, Debug)]
pub struct ZeroLawSample {
    pub alpha: f64,
    pub t: f64,
    pub seed: Seed,
    pub grid: TimeGrid,
    ln_a: Vec<f64>,
    inv_a: Vec<f64>,
}

impl ZeroLawSample {
    /// `grid` must span `[0, t/4]`.
    pub fn draw(alpha: f64, t: f64, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<Self> {
        if !(alpha >= -0.5 && alpha.is_finite()) {
            return param(format!("the mixture law needs α ≥ −1/2, got {alpha}"));
        }
        check_time(t)?;
        check_grid_end(grid, 0.25 * t)?;
        let draws = exp_functional_sample(seed, grid, n, 2.0 * alpha + 1.0, ExpFactor::Two, exec)?;
        let ln_a = draws.iter().map(|(a, _)| a.ln()).collect();
        let inv_a = draws.iter().map(|(a, _)| a.recip()).collect();
        Ok(ZeroLawSample { alpha, t, seed, grid: *grid, ln_a, inv_a })
    }

    pub fn len(&self) -> usize {
        self.inv_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_a.is_empty()
    }

    /// The first `m` draws as a sample of their own.
    pub fn head(&self, m: usize) -> Result<Self> {
        if !(2..=self.len()).contains(&m) {
            return param(format!("head needs 2 ≤ m ≤ {}, got {m}", self.len()));
        }
        let mut s = self.clone();
        s.ln_a.truncate(m);
        s.inv_a.truncate(m);
        Ok(s)
    }

    fn reduce(&self, f: impl Fn(f64, f64) -> f64) -> Result<MCEstimate> {
        let v: Vec<f64> = self.ln_a.iter().zip(&self.inv_a).map(|(&l, &i)| f(l, i)).collect();
        mc_reduce(&v)
    }

    /// Density of `cosh R_t` at `z ≥ 1` (`z > 1` when `α < 0`).
    pub fn cosh_density(&self, z: f64) -> Result<MCEstimate> {
        let u = z - 1.0;
        if !(u >= 0.0 && u.is_finite()) || (u == 0.0 && self.alpha < 0.0) {
            return param(format!("cosh density needs z ≥ 1 (z > 1 for α < 0), got {z}"));
        }
        self.mixture(u)
    }

    /// Density at `cosh z − 1 = u`, shared by the `cosh R` and `R` scales.
    fn mixture(&self, u: f64) -> Result<MCEstimate> {
        let a1 = self.alpha + 1.0;
        let ln_pref = if u == 0.0 { 0.0 } else { self.alpha * (0.25 * u).ln() } - 4f64.ln() - ln_gamma(a1);
        let q = 0.25 * u;
        self.reduce(|ln_a, inv_a| (ln_pref - q * inv_a - a1 * ln_a).exp())
    }

    /// Density of `R_t` at `z ≥ 0`; needs `α > −½`.
    pub fn r_density(&self, z: f64) -> Result<MCEstimate> {
        if !(self.alpha > -0.5) {
            return param(format!("R density needs α > −1/2, got {}", self.alpha));
        }
        if !(z >= 0.0 && z.is_finite()) {
            return param(format!("R density needs z ≥ 0, got {z}"));
        }
        if z == 0.0 {
            return Ok(MCEstimate { mean: 0.0, stderr: 0.0, n: self.len() });
        }
        let u = 2.0 * (0.5 * z).sinh().powi(2);
        Ok(self.mixture(u)?.scale(z.sinh()))
    }

    /// `P(cosh R_t ≤ z)`: each draw contributes `P(α+1, (z−1)/(4A))`.
    pub fn cosh_cdf(&self, z: f64) -> Result<MCEstimate> {
        if !(z >= 1.0) {
            return param(format!("cosh CDF needs z ≥ 1, got {z}"));
        }
        if z.is_infinite() {
            return Ok(MCEstimate { mean: 1.0, stderr: 0.0, n: self.len() });
        }
        let (a1, q) = (self.alpha + 1.0, 0.25 * (z - 1.0));
        self.reduce(|_, inv_a| lower_gamma(a1, q * inv_a))
    }

    /// Mass of `(lo, hi]` on the `cosh R_t` scale.
    pub fn cosh_bin_mass(&self, lo: f64, hi: f64) -> Result<MCEstimate> {
        if !(lo >= 1.0 && hi > lo) {
            return param(format!("bin ({lo}, {hi}] must lie in [1, ∞)"));
        }
        let a1 = self.alpha + 1.0;
        let (ql, qh) = (0.25 * (lo - 1.0), 0.25 * (hi - 1.0));
        self.reduce(|_, inv_a| {
            let upper = if hi.is_infinite() { 1.0 } else { lower_gamma(a1, qh * inv_a) };
            upper - lower_gamma(a1, ql * inv_a)
        })
    }

    /// `z` with `P(cosh R_t ≤ z) = p` under the sample's mixture law.
    pub fn cosh_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return param(format!("quantile level must be in (0, 1), got {p}"));
        }
        let mut hi = 2.0;
        while self.cosh_cdf(hi)?.mean < p {
            hi = 1.0 + 2.0 * (hi - 1.0);
            if hi > 1e300 {
                return Err(Error::Overflow(format!("quantile {p} beyond representable range")));
            }
        }
        let mut lo = 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if !(lo < mid && mid < hi) {
                break;
            }
            if self.cosh_cdf(mid)?.mean < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Upper limit `Z` of the normalisation check: with `q` the empirical
    /// 99% quantile of `4A`, `E[(4A)^{−1}]·Q(α+1, (Z−1)/q) = 10⁻³`.
    /// For `α = 0` this is `E[(4A)^{−1}]·e^{−(Z−1)/q} = 10⁻³`.
    pub fn truncation(&self) -> Result<f64> {
        let mut four_a: Vec<f64> = self.ln_a.iter().map(|l| 4.0 * l.exp()).collect();
        four_a.sort_by(f64::total_cmp);
        let q = four_a[((0.99 * four_a.len() as f64) as usize).min(four_a.len() - 1)];
        let bound = 0.25 * self.inv_a.iter().sum::<f64>() / self.len() as f64;
        let a1 = self.alpha + 1.0;
        let excess = |x: f64| bound * upper_gamma(a1, x) - TAIL_TARGET;
        if excess(0.0) <= 0.0 {
            return Ok(1.0);
        }
        let mut hi = 1.0;
        while excess(hi) > 0.0 {
            hi *= 2.0;
        }
        let (mut lo, mut hi) = (0.0, hi);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(1.0 + q * hi)
    }

    /// `∫₁^Z` of the sample's density curve by adaptive quadrature, in the
    /// variable `s = √(z−1)` to absorb the `(z−1)^α` endpoint behaviour.
    pub fn normalization(&self, z_max: f64) -> Result<f64> {
        if !(z_max > 1.0 && z_max.is_finite()) {
            return param(format!("normalisation range needs Z > 1, got {z_max}"));
        }
        let f = |s: f64| {
            if s == 0.0 {
                return 0.0;
            }
            self.mixture(s * s).map(|e| 2.0 * s * e.mean).unwrap_or(f64::NAN)
        };
        integrate(&f, 0.0, (z_max - 1.0).sqrt(), 1e-6)
    }

    fn meta(&self, variable: &str) -> CurveMeta {
        CurveMeta {
            method: "mc-mixture".into(),
            variable: variable.into(),
            spec: ProcessSpec { alpha: self.alpha, x0: 0.0 },
            t: self.t,
            n: Some(self.len()),
            seed: Some(self.seed),
            grid: Some(self.grid),
            rule_nodes: None,
            shared_sample: true,
        }
    }

    /// Curve of the `cosh R_t` density on `zs`, all points from this sample.
    pub fn cosh_curve(&self, zs: &[f64], exec: Exec) -> Result<DensityCurve> {
        let pts = exec.try_map(zs.len(), |i| {
            let e = self.cosh_density(zs[i])?;
            Ok(DensityPoint { z: zs[i], value: e.mean, stderr: e.stderr })
        })?;
        DensityCurve::new(pts, self.meta("cosh"))
    }

    /// Curve of the `R_t` density on `zs`.
    pub fn r_curve(&self, zs: &[f64], exec: Exec) -> Result<DensityCurve> {
        let pts = exec.try_map(zs.len(), |i| {
            let e = self.r_density(zs[i])?;
            Ok(DensityPoint { z: zs[i], value: e.mean, stderr: e.stderr })
        })?;
        DensityCurve::new(pts, self.meta("r"))
    }
}

/// `E[(4A)^{−1} e^{−(z−1)/(4A)}]` with `A = A^{(1)}_{t/4}`: the density of
/// `cosh R_t` for `α = 0`, `R_0 = 0`. `grid` spans `[0, t/4]`.
pub fn density_cosh_alpha0(z: f64, t: f64, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<MCEstimate> {
    ZeroLawSample::draw(0.0, t, grid, seed, n, exec)?.cosh_density(z)
}

/// Default finite-difference step for `G'` at `y`.
pub fn g_step(y: f64) -> f64 {
    1e-4 * y.max(1.0)
}

fn g_derivative(t: f64, y: f64, h: f64, rule: &QuadratureRule) -> f64 {
    let g = |y: f64| g_function_on(t, y, rule);
    if y >= h {
        (g(y + h) - g(y - h)) / (2.0 * h)
    } else {
        (-3.0 * g(y) + 4.0 * g(y + h) - g(y + 2.0 * h)) / (2.0 * h)
    }
}

/// `−¼ G'_{t/4}((z−1)/4)`, the same density through `G_t(y) = E e^{−y/A_t^{(1)}}`.
///
/// Central differences with step `h` (one-sided within `h` of `y = 0`),
/// checked against step `h/2`.
pub fn density_cosh_alpha0_g(z: f64, t: f64, h: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(z >= 1.0 && z.is_finite()) {
        return param(format!("density needs z ≥ 1, got {z}"));
    }
    check_time(t)?;
    if !(h > 0.0 && h.is_finite()) {
        return param(format!("step must be positive, got {h}"));
    }
    let (s, y) = (0.25 * t, 0.25 * (z - 1.0));
    g_function(s, y, rule)?;
    let coarse = -0.25 * g_derivative(s, y, h, rule);
    let fine = -0.25 * g_derivative(s, y, 0.5 * h, rule);
    if (coarse - fine).abs() > FD_HALVING_TOLERANCE {
        return Err(Error::Accuracy {
            what: "G derivative",
            detail: format!("step {h:e} gives {coarse:e}, step {:e} gives {fine:e}", 0.5 * h),
        });
    }
    if coarse < NEGATIVE_FLOOR {
        return Err(Error::Inconsistent {
            what: "G-derivative density",
            detail: format!("value {coarse:e} at z={z}"),
        });
    }
    Ok(coarse)
}

/// Curve of [`density_cosh_alpha0_g`] with the default step.
pub fn g_curve(t: f64, zs: &[f64], rule: &QuadratureRule, exec: Exec) -> Result<DensityCurve> {
    let pts = exec.try_map(zs.len(), |i| {
        let z = zs[i];
        let value = density_cosh_alpha0_g(z, t, g_step(0.25 * (z - 1.0)), rule)?;
        Ok(DensityPoint { z, value, stderr: 0.0 })
    })?;
    let meta = CurveMeta {
        method: "g-derivative".into(),
        variable: "cosh".into(),
        spec: ProcessSpec { alpha: 0.0, x0: 0.0 },
        t,
        n: None,
        seed: None,
        grid: None,
        rule_nodes: Some(rule.len()),
        shared_sample: false,
    };
    DensityCurve::new(pts, meta)
}

/// Density of `cosh R_t` for index `α ≥ −½` started at 0. `grid` spans `[0, t/4]`.
pub fn density_cosh_general(z: f64, t: f64, spec: &ProcessSpec, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<MCEstimate> {
    require_origin(spec)?;
    ZeroLawSample::draw(spec.alpha, t, grid, seed, n, exec)?.cosh_density(z)
}

/// Density of `R_t` for index `α > −½` started at 0. `grid` spans `[0, t/4]`.
pub fn density_r_general(z: f64, t: f64, spec: &ProcessSpec, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<MCEstimate> {
    require_origin(spec)?;
    ZeroLawSample::draw(spec.alpha, t, grid, seed, n, exec)?.r_density(z)
}

fn require_origin(spec: &ProcessSpec) -> Result<()> {
    if spec.x0 != 0.0 {
        return param(format!("density formulas need x0 = 0, got {}", spec.x0));
    }
    Ok(())
}

/// Exact density of `cosh B_t`, `B_0 = 0`, at `z > 1`.
pub fn cosh_bm_density(z: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    if !(z > 1.0) {
        return param(format!("cosh(B_t) density needs z > 1, got {z}"));
    }
    let w = z.acosh();
    // √(z²−1) = √(z−1)√(z+1) keeps accuracy near z = 1
    let root = (z - 1.0).sqrt() * (z + 1.0).sqrt();
    Ok(2.0 * (-w * w / (2.0 * t)).exp() / ((2.0 * std::f64::consts::PI * t).sqrt() * root))
}

/// Curve of [`cosh_bm_density`].
pub fn cosh_bm_curve(t: f64, zs: &[f64]) -> Result<DensityCurve> {
    let pts = zs
        .iter()
        .map(|&z| Ok(DensityPoint { z, value: cosh_bm_density(z, t)?, stderr: 0.0 }))
        .collect::<Result<Vec<_>>>()?;
    let meta = CurveMeta {
        method: "gaussian".into(),
        variable: "cosh".into(),
        spec: ProcessSpec { alpha: -0.5, x0: 0.0 },
        t,
        n: None,
        seed: None,
        grid: None,
        rule_nodes: None,
        shared_sample: false,
    };
    DensityCurve::new(pts, meta)
}

/// `E(e^{−(λ²/2)∫₀ᵗ e^{2B_u}du} | B_t = x)`, from
/// `∫_{|x|}^∞ (z/t) e^{−(z²−x²)/(2t)} J₀(λφ(x,z)) dz` by adaptive quadrature.
pub fn conditional_laplace(x: f64, t: f64, lambda: f64, tol: f64) -> Result<f64> {
    check_time(t)?;
    if !(lambda > 0.0 && lambda.is_finite() && x.is_finite()) {
        return param(format!("conditional transform needs finite x and λ > 0, got x={x}, λ={lambda}"));
    }
    let ax = x.abs();
    let f = |s: f64| {
        let z = ax + s;
        let phi = phi_kernel(x, z).unwrap_or(0.0);
        (z / t) * (-s * (2.0 * ax + s) / (2.0 * t)).exp() * bessel_j0(lambda * phi)
    };
    integrate_to_inf(&f, 0.0, tol)
}

/// `√(cosh z − 1)/sinh z`, equal to `1/(√2 cosh(z/2))`.
fn corollary_ratio(z: f64) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 / (0.5 * z).cosh()
}

/// `E[A_t^{−½} e^{−(cosh z−1)/(4A_t)}]` by Monte Carlo and
/// `√(2/t)·√(cosh z−1)/sinh z·e^{−z²/(8t)}` in closed form. `grid` spans `[0, t]`.
pub fn corollary_a_identity(z: f64, t: f64, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<(MCEstimate, f64)> {
    check_time(t)?;
    if !(z > 0.0 && z.is_finite()) {
        return param(format!("corollary needs z > 0, got {z}"));
    }
    check_grid_end(grid, t)?;
    let q = 0.5 * (0.5 * z).sinh().powi(2);
    let draws = exp_functional_sample(seed, grid, n, 0.0, ExpFactor::Two, exec)?;
    let v: Vec<f64> = draws.iter().map(|(a, _)| (-q / a).exp() / a.sqrt()).collect();
    let rhs = (2.0 / t).sqrt() * corollary_ratio(z) * (-z * z / (8.0 * t)).exp();
    Ok((mc_reduce(&v)?, rhs))
}

/// `E|B_1|^{2λ} = 2^λ Γ(λ+½)/√π`.
pub fn abs_normal_moment(two_lambda: f64) -> f64 {
    let l = 0.5 * two_lambda;
    (l * 2f64.ln() + ln_gamma(l + 0.5) - 0.5 * std::f64::consts::PI.ln()).exp()
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Both sides of `E A_t^λ = E(cosh B_{4t} − 1)^λ / (2^λ E|B_1|^{2λ})`.
///
/// Each side is importance sampled. The `A` side mixes driftless paths with
/// paths of drift `2λ` in equal proportion; the Gaussian side draws
/// `B_{4t}` from `N(±4λt, 4t)`. Weights are the likelihood ratios against
/// the two-component mixture, so both estimators are unbiased. `grid`
/// spans `[0, t]`; the Gaussian side uses the seed derived from `seed`.
pub fn moment_a(lambda: f64, t: f64, grid: &TimeGrid, seed: Seed, n: usize, exec: Exec) -> Result<(MCEstimate, MCEstimate)> {
    check_time(t)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return param(format!("moment order must be positive, got {lambda}"));
    }
    check_grid_end(grid, t)?;
    let theta = 2.0 * lambda;
    let half = n / 2;
    let weight = |b_t: f64| 2.0 / (1.0 + (theta * b_t - 0.5 * theta * theta * t).exp());
    let plain = map_bm_paths(seed, grid, n - half, 0.0, exec, |_, p, _| {
        let (a, _) = path_exp_functional(p, grid, 0.0, 2.0)?;
        Ok(a.powf(lambda) * weight(p[grid.n_steps()]))
    })?;
    let tilted = map_bm_paths(seed.derive(1), grid, half, theta, exec, |_, p, _| {
        let (a, _) = path_exp_functional(p, grid, 0.0, 2.0)?;
        Ok(a.powf(lambda) * weight(p[grid.n_steps()]))
    })?;
    let a_side = mc_reduce(&[plain, tilted].concat())?;

    let big_t = 4.0 * t;
    let shift = lambda * big_t;
    let ln_norm = lambda * 2f64.ln() + abs_normal_moment(2.0 * lambda).ln();
    let gauss_seed = seed.derive(2);
    let g = exec.map(n, |i| {
        let mut rng = gauss_seed.path_rng(i);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let b = sign * shift + big_t.sqrt() * standard_normal(&mut rng);
        // (cosh b − 1)^λ = (2 sinh²(b/2))^λ, weight e^{λ²T/2}/cosh(λb)
        let ln_v = lambda * (2.0 * (0.5 * b).sinh().powi(2)).ln() + 0.5 * lambda * shift - ln_cosh(lambda * b);
        (ln_v - ln_norm).exp()
    });
    Ok((a_side, mc_reduce(&g)?))
}

/// Ways of reading the double integral for `E e^{−λ cosh R_T}` at an
/// exponential time `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConpReading {
    /// `∫∫ e^{−λu cosh x − y/2} p(u, 1, y) dy du`, as displayed.
    AsWritten,
    /// `∫∫ e^{−λ y cosh x − λ²u/2} p(u, 1, y) dy du`, the transform of the
    /// pair `(∫₀ᵀ V², V_T)`.
    LaplacePair,
}

impl ConpReading {
    pub const ALL: [ConpReading; 2] = [ConpReading::AsWritten, ConpReading::LaplacePair];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconcileStatus {
    Reconciled,
    Unreconciled,
    Unavailable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConpOutcome {
    pub reading: ConpReading,
    pub value: Option<f64>,
    pub status: ReconcileStatus,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpTimeResult {
    pub delta: f64,
    pub lambda: f64,
    pub spec: ProcessSpec,
    pub mc: MCEstimate,
    pub readings: Vec<ConpOutcome>,
}

/// `p(u, 1, y) = δ y^{μ−1} u^{−1} e^{−(1+y²)/(2u)} I_γ(y/u)` with
/// `μ = α+½`, `γ = √(2δ+μ²)`: the joint density of `(∫₀ᵀ V², V_T)` for
/// `V = e^{B_u + μu}` and `T ~ Exp(δ)`.
pub fn conp_kernel(delta: f64, alpha: f64, u: f64, y: f64) -> Result<f64> {
    let mu = alpha + 0.5;
    let gamma = (2.0 * delta + mu * mu).sqrt();
    if u <= 0.0 || y <= 0.0 {
        return Ok(0.0);
    }
    let i = bessel_i_scaled(gamma, y / u)?;
    let ln = delta.ln() + (mu - 1.0) * y.ln() - u.ln() - (1.0 - y) * (1.0 - y) / (2.0 * u);
    Ok(ln.exp() * i)
}

/// One reading of the double integral.
pub fn conp_integral(delta: f64, lambda: f64, spec: &ProcessSpec, reading: ConpReading) -> Result<f64> {
    if !(delta > 0.0 && lambda >= 0.0) {
        return param(format!("need δ > 0 and λ ≥ 0, got δ={delta}, λ={lambda}"));
    }
    let ch = spec.x0.cosh();
    let factor = |u: f64, y: f64| match reading {
        ConpReading::AsWritten => (-lambda * u * ch - 0.5 * y).exp(),
        ConpReading::LaplacePair => (-lambda * ch * y - 0.5 * lambda * lambda * u).exp(),
    };
    let inner = |u: f64| -> Result<f64> {
        let f = |y: f64| conp_kernel(delta, spec.alpha, u, y).map(|k| k * factor(u, y)).unwrap_or(f64::NAN);
        // y = 1/w² on [1, ∞) for the same reason as the outer tail below
        let g = |w: f64| if w == 0.0 { 0.0 } else { 2.0 * f(1.0 / (w * w)) / (w * w * w) };
        Ok(integrate_with(&f, 0.0, 1.0, 1e-300, 1e-10)? + integrate_with(&g, 0.0, 1.0, 1e-300, 1e-10)?)
    };
    let outer = |u: f64| inner(u).unwrap_or(f64::NAN);
    // u = 1/v² on [1, ∞) turns the algebraic tail of the λ = 0 mass into a
    // bounded integrand
    let tail = |v: f64| if v == 0.0 { 0.0 } else { 2.0 * outer(1.0 / (v * v)) / (v * v * v) };
    Ok(integrate(&outer, 0.0, 1.0, 1e-9)? + integrate(&tail, 0.0, 1.0, 1e-9)?)
}

/// `E e^{−λ cosh R_T}` with `T ~ Exp(δ)` independent of `R`, by simulating
/// each path to its own horizon at `steps_per_unit` resolution, together
/// with every reading of the double integral and its status against the
/// Monte Carlo value.
pub fn exp_time_transform(
    delta: f64,
    lambda: f64,
    spec: &ProcessSpec,
    steps_per_unit: usize,
    seed: Seed,
    n: usize,
    exec: Exec,
) -> Result<ExpTimeResult> {
    let mc = exp_time_mc(delta, lambda, spec, steps_per_unit, seed, n, exec)?;
    let readings = ConpReading::ALL
        .iter()
        .map(|&reading| match conp_integral(delta, lambda, spec, reading) {
            Ok(v) => {
                let ok = MCEstimate::exact(v).agrees_with(&mc, STDERR_GATE);
                ConpOutcome {
                    reading,
                    value: Some(v),
                    status: if ok { ReconcileStatus::Reconciled } else { ReconcileStatus::Unreconciled },
                    detail: None,
                }
            }
            Err(e) => ConpOutcome { reading, value: None, status: ReconcileStatus::Unavailable, detail: Some(e.to_string()) },
        })
        .collect();
    Ok(ExpTimeResult { delta, lambda, spec: *spec, mc, readings })
}

/// Monte Carlo side of [`exp_time_transform`] alone.
pub fn exp_time_mc(
    delta: f64,
    lambda: f64,
    spec: &ProcessSpec,
    steps_per_unit: usize,
    seed: Seed,
    n: usize,
    exec: Exec,
) -> Result<MCEstimate> {
    if !(delta > 0.0 && delta.is_finite() && lambda > 0.0 && lambda.is_finite()) {
        return param(format!("need δ > 0 and λ > 0, got δ={delta}, λ={lambda}"));
    }
    if spec.alpha < -0.5 {
        return param(format!("exponential-time transform needs α ≥ −1/2, got {}", spec.alpha));
    }
    if steps_per_unit == 0 {
        return param("steps_per_unit must be positive");
    }
    let clock = Exp::new(delta).map_err(|e| Error::Parameter(e.to_string()))?;
    let values = exec.try_map(n, |i| {
        let mut rng = seed.path_rng(i);
        let horizon: f64 = rng.sample(clock);
        let r = r_at(spec, horizon, steps_per_unit, &mut rng, i)?;
        Ok((-lambda * r.cosh()).exp())
    })?;
    mc_reduce(&values)
}

fn r_at(spec: &ProcessSpec, horizon: f64, steps_per_unit: usize, rng: &mut ChaCha8Rng, index: usize) -> Result<f64> {
    let steps = ((horizon * steps_per_unit as f64).ceil() as usize).max(1);
    let stepper = RStepper::new(spec, horizon / steps as f64);
    let mut r = spec.x0;
    for step in 0..steps {
        r = stepper.step(r, rng).map_err(|e| Error::Integration { path: index, step: step + 1, detail: e.to_string() })?;
        if !r.is_finite() {
            return Err(Error::Integration { path: index, step: step + 1, detail: format!("R became {r}") });
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::{lt_quadrature_bm, lt_vector};
    use crate::specfun::DEFAULT_GH_NODES;

    fn quarter_grid(t: f64) -> TimeGrid {
        TimeGrid::with_resolution(0.25 * t, 512).unwrap()
    }

    fn rule() -> QuadratureRule {
        QuadratureRule::gauss_hermite(DEFAULT_GH_NODES).unwrap()
    }

    #[test]
    fn z_grid_shape() {
        let g = default_z_grid();
        assert_eq!(g.len(), 60);
        assert!((g[0] - 1.001).abs() < 1e-12 && (g[59] - 21.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let r: Vec<f64> = g.windows(2).map(|w| (w[1] - 1.0) / (w[0] - 1.0)).collect();
        assert!(r.iter().all(|q| (q - r[0]).abs() < 1e-9));
    }

    #[test]
    fn curve_rejects_bad_points() {
        let meta = cosh_bm_curve(1.0, &[1.5]).unwrap().meta;
        let p = |z, value| DensityPoint { z, value, stderr: 0.0 };
        assert!(DensityCurve::new(vec![p(2.0, 0.1), p(1.5, 0.1)], meta.clone()).is_err());
        assert!(matches!(
            DensityCurve::new(vec![p(2.0, -1e-6)], meta.clone()),
            Err(Error::Inconsistent { .. })
        ));
        assert!(DensityCurve::new(vec![p(2.0, -1e-9)], meta).is_ok());
    }

    #[test]
    fn curve_files() {
        let dir = tempfile::tempdir().unwrap();
        let c = cosh_bm_curve(1.0, &[1.5, 2.0]).unwrap();
        let (csv, json) = c.write_files(dir.path(), "bm").unwrap();
        let text = std::fs::read_to_string(csv).unwrap();
        assert!(text.starts_with("z,value,stderr\n1.5,"));
        assert_eq!(text.lines().count(), 3);
        let meta: CurveMeta = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(meta, c.meta);
    }

    #[test]
    fn bm_density_integrates_to_one() {
        // substitute z = cosh w to remove the endpoint singularity
        let f = |w: f64| cosh_bm_density(w.cosh(), 0.7).unwrap_or(0.0) * w.sinh();
        let v = integrate_to_inf(&f, 1e-300, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn mixture_at_origin_and_cdf() {
        let s = ZeroLawSample::draw(0.0, 1.0, &quarter_grid(1.0), Seed(3), 4000, Exec::Sequential).unwrap();
        let at1 = s.cosh_density(1.0).unwrap();
        let inv: Vec<f64> = s.inv_a.iter().map(|i| 0.25 * i).collect();
        assert!((at1.mean - mc_reduce(&inv).unwrap().mean).abs() < 1e-12);
        assert!(at1.mean > 0.0);
        // CDF is the integral of the density, sample by sample
        let (z0, z1) = (1.3, 4.0);
        let q = integrate(&|z: f64| s.cosh_density(z).unwrap().mean, z0, z1, 1e-10).unwrap();
        let m = s.cosh_bin_mass(z0, z1).unwrap().mean;
        assert!((q - m).abs() < 1e-8, "{q} vs {m}");
        assert!((s.cosh_cdf(z1).unwrap().mean - s.cosh_cdf(z0).unwrap().mean - m).abs() < 1e-12);
        let z = s.cosh_quantile(0.5).unwrap();
        assert!((s.cosh_cdf(z).unwrap().mean - 0.5).abs() < 1e-9);
        assert!(s.cosh_density(0.5).is_err());
    }

    #[test]
    fn normalization_reaches_truncation_target() {
        for alpha in [0.0, 1.0] {
            let s = ZeroLawSample::draw(alpha, 1.0, &quarter_grid(1.0), Seed(4), 4000, Exec::Sequential).unwrap();
            let z = s.truncation().unwrap();
            let mass = s.normalization(z).unwrap();
            assert!((0.99..=1.0 + 1e-6).contains(&mass), "α={alpha}: {mass} up to {z}");
            assert!((mass - s.cosh_cdf(z).unwrap().mean).abs() < 1e-5);
        }
    }

    #[test]
    fn r_density_is_change_of_variables() {
        let s = ZeroLawSample::draw(1.0, 1.0, &quarter_grid(1.0), Seed(5), 2000, Exec::Sequential).unwrap();
        assert_eq!(s.r_density(0.0).unwrap().mean, 0.0);
        for z in [0.01, 0.5, 2.0] {
            let r = s.r_density(z).unwrap().mean;
            let c = s.cosh_density(z.cosh()).unwrap().mean * z.sinh();
            assert!((r - c).abs() <= 1e-10 * c.abs(), "z={z}: {r} vs {c}");
        }
        let s = ZeroLawSample::draw(-0.5, 1.0, &quarter_grid(1.0), Seed(5), 100, Exec::Sequential).unwrap();
        assert!(s.r_density(1.0).is_err());
        assert!(s.cosh_density(1.0).is_err());
    }

    #[test]
    fn alpha0_formulas_coincide() {
        let g = quarter_grid(1.0);
        let a = density_cosh_alpha0(2.0, 1.0, &g, Seed(6), 3000, Exec::Sequential).unwrap();
        let spec = ProcessSpec::new(0.0, 0.0).unwrap();
        let b = density_cosh_general(2.0, 1.0, &spec, &g, Seed(6), 3000, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        let off = ProcessSpec::new(0.0, 1.0).unwrap();
        assert!(density_cosh_general(2.0, 1.0, &off, &g, Seed(6), 10, Exec::Sequential).is_err());
        assert!(density_cosh_alpha0(2.0, 1.0, &TimeGrid::new(1.0, 8).unwrap(), Seed(6), 10, Exec::Sequential).is_err());
    }

    #[test]
    fn g_route_nonnegative_and_stable() {
        let r = rule();
        for z in [1.0, 1.0001, 1.01, 1.5, 3.0, 10.0] {
            let y = 0.25 * (z - 1.0);
            let h = g_step(y);
            let v = density_cosh_alpha0_g(z, 1.0, h, &r).unwrap();
            let v2 = density_cosh_alpha0_g(z, 1.0, 0.5 * h, &r).unwrap();
            assert!(v >= 0.0, "z={z}: {v}");
            assert!((v - v2).abs() < 1e-5);
        }
    }

    #[test]
    fn g_route_matches_mixture() {
        let s = ZeroLawSample::draw(0.0, 1.0, &quarter_grid(1.0), Seed(7), 40_000, Exec::Sequential).unwrap();
        let r = rule();
        for z in [1.01, 1.5, 3.0, 6.0] {
            let g = density_cosh_alpha0_g(z, 1.0, g_step(0.25 * (z - 1.0)), &r).unwrap();
            let m = s.cosh_density(z).unwrap();
            assert!((g - m.mean).abs() <= (4.0 * m.stderr).max(0.02 * g), "z={z}: {g} vs {m:?}");
        }
    }

    #[test]
    fn conditional_laplace_limits() {
        for x in [0.0, 1.0, -1.0] {
            let v = conditional_laplace(x, 1.0, 1e-9, 1e-12).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "x={x}: {v}");
            for lambda in [0.5, 1.0, 2.0] {
                let v = conditional_laplace(x, 1.0, lambda, 1e-10).unwrap();
                assert!(v > 0.0 && v <= 1.0, "x={x} λ={lambda}: {v}");
            }
        }
    }

    #[test]
    fn conditional_laplace_tower() {
        // E[e^{−γ e^{B_t}} · E(e^{−λ²/2 ∫e^{2B}} | B_t)] is the joint transform
        let r = QuadratureRule::gauss_hermite(64).unwrap();
        let (t, lambda, gamma): (f64, f64, f64) = (1.0, 1.0, 1.5);
        let st: f64 = t.sqrt();
        let tower = r.apply(|z| {
            let x = st * z;
            if gamma * x.exp() > 700.0 {
                return 0.0;
            }
            conditional_laplace(x, t, lambda, 1e-10).unwrap() * (-gamma * x.exp()).exp()
        });
        let joint = lt_vector(gamma, lambda, t, &rule()).unwrap();
        assert!((tower - joint).abs() < 1e-7, "{tower} vs {joint}");
        let via_cosh = lt_quadrature_bm((gamma / lambda).acosh(), t, lambda, &rule()).unwrap();
        assert!((tower - via_cosh).abs() < 1e-7);
    }

    #[test]
    fn corollary_limits_and_values() {
        let g = TimeGrid::with_resolution(1.0, 512).unwrap();
        let (_, rhs) = corollary_a_identity(1e-12, 1.0, &g, Seed(1), 2, Exec::Sequential).unwrap();
        assert!((rhs - 1.0).abs() < 1e-12);
        for z in [0.5f64, 1.0, 2.0] {
            let direct = (2.0f64).sqrt() * (z.cosh() - 1.0).sqrt() / z.sinh() * (-z * z / 8.0).exp();
            let (_, rhs) = corollary_a_identity(z, 1.0, &g, Seed(1), 2, Exec::Sequential).unwrap();
            assert!((rhs - direct).abs() < 1e-14);
        }
        assert!(corollary_a_identity(0.0, 1.0, &g, Seed(1), 2, Exec::Sequential).is_err());
        let (mc, rhs) = corollary_a_identity(1.0, 1.0, &g, Seed(2), 20_000, Exec::Sequential).unwrap();
        assert!(mc.agrees_with(&MCEstimate::exact(rhs), 4.0), "{mc:?} vs {rhs}");
    }

    #[test]
    fn normal_moments() {
        assert!((abs_normal_moment(2.0) - 1.0).abs() < 1e-14);
        assert!((abs_normal_moment(4.0) - 3.0).abs() < 1e-13);
        assert!((abs_normal_moment(1.0) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn first_moment_of_a() {
        let t = 0.5;
        let g = TimeGrid::with_resolution(t, 512).unwrap();
        let (a, b) = moment_a(1.0, t, &g, Seed(8), 20_000, Exec::Sequential).unwrap();
        let exact = MCEstimate::exact(((2.0 * t).exp() - 1.0) / 2.0);
        assert!(a.agrees_with(&exact, 4.0), "{a:?} vs {exact:?}");
        assert!(b.agrees_with(&exact, 4.0), "{b:?} vs {exact:?}");
    }

    #[test]
    fn conp_kernel_is_a_density() {
        for (delta, alpha) in [(1.0, 0.0), (2.0, -0.5), (0.5, 1.0)] {
            let spec = ProcessSpec::new(alpha, 0.0).unwrap();
            let mass = conp_integral(delta, 0.0, &spec, ConpReading::LaplacePair).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "δ={delta} α={alpha}: {mass}");
        }
    }

    #[test]
    fn conp_pair_reading_on_brownian_case() {
        // α = −½: R is |B|, E e^{−λ cosh B_T} averaged over T ~ Exp(δ)
        let (delta, lambda): (f64, f64) = (1.0, 0.8);
        let r = rule();
        let oracle = integrate_to_inf(
            &|t: f64| {
                if t == 0.0 {
                    return delta * (-lambda).exp();
                }
                // 2∫₀^∞ φ(z) e^{−λ cosh(√t z)} dz, adaptive to cope with large t
                let g = |z: f64| (-0.5 * z * z - lambda * (t.sqrt() * z).cosh()).exp();
                let bm = 2.0 * integrate_to_inf(&g, 0.0, 1e-13).unwrap() / (2.0 * std::f64::consts::PI).sqrt();
                if t < 2.0 {
                    assert!((bm - lt_quadrature_bm(0.0, t, lambda, &r).unwrap()).abs() < 1e-9);
                }
                delta * (-delta * t).exp() * bm
            },
            0.0,
            1e-10,
        )
        .unwrap();
        let spec = ProcessSpec::new(-0.5, 0.0).unwrap();
        let v = conp_integral(delta, lambda, &spec, ConpReading::LaplacePair).unwrap();
        assert!((v - oracle).abs() < 1e-6, "{v} vs {oracle}");
    }

    #[test]
    fn exp_time_limits() {
        let spec = ProcessSpec::new(0.0, 0.7).unwrap();
        let res = exp_time_transform(1.0, 1e-9, &spec, 64, Seed(9), 200, Exec::Sequential).unwrap();
        assert!((res.mc.mean - 1.0).abs() < 1e-7);
        let res = exp_time_transform(1e4, 1.0, &spec, 64, Seed(9), 2000, Exec::Sequential).unwrap();
        let limit = (-(0.7f64).cosh()).exp();
        assert!((res.mc.mean - limit).abs() < 0.01, "{:?} vs {limit}", res.mc);
        assert_eq!(res.readings.len(), 2);
        assert!(exp_time_transform(0.0, 1.0, &spec, 64, Seed(9), 10, Exec::Sequential).is_err());
    }
}
