//! Distributional identities turned into two-sample verdicts.
//!
//! Each check draws both sides from independent seeds and compares them
//! either by a two-sample KS test at level [`GATE_LEVEL`] or, for scalar
//! quantities, in units of the combined standard error against
//! [`STDERR_GATE`].

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::paths::{map_bm_paths, path_exp_functional, standard_normal, TimeGrid};
use crate::rng::{Exec, Seed};
use crate::sde::{draw_besq, gsde_path, gsol_path, r_terminal, theta_terminal, BesqSpec, ProcessSpec};
use crate::specfun::besq_cdf;
use crate::stats::{ks_two_sample, mc_reduce, Ecdf, KsResult, MCEstimate, GATE_LEVEL, STDERR_GATE};

/// How a verdict's statistic was formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// Two-sample KS distance; threshold `c(α)√((n+m)/(nm))`.
    Ks,
    /// `|Δ|` over the combined standard error; threshold [`STDERR_GATE`].
    Stderr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPair {
    pub left: Seed,
    pub right: Seed,
}

impl SeedPair {
    /// Two independent streams derived from `seed`.
    pub fn split(seed: Seed) -> Self {
        SeedPair { left: seed.derive(0x4c), right: seed.derive(0x52) }
    }

    /// Both sides on the same stream (coupled-noise diagnostic).
    pub fn coupled(seed: Seed) -> Self {
        SeedPair { left: seed, right: seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityVerdict {
    pub name: String,
    pub kind: Statistic,
    pub statistic: f64,
    pub threshold: f64,
    pub n_left: usize,
    pub n_right: usize,
    pub pass: bool,
    pub seeds: SeedPair,
}

impl IdentityVerdict {
    fn from_ks(name: impl Into<String>, ks: KsResult, seeds: SeedPair) -> Self {
        IdentityVerdict {
            name: name.into(),
            kind: Statistic::Ks,
            statistic: ks.statistic,
            threshold: ks.threshold,
            n_left: ks.n_left,
            n_right: ks.n_right,
            pass: ks.pass(),
            seeds,
        }
    }

    fn from_estimates(name: impl Into<String>, statistic: f64, n_left: usize, n_right: usize, seeds: SeedPair) -> Self {
        IdentityVerdict {
            name: name.into(),
            kind: Statistic::Stderr,
            statistic,
            threshold: STDERR_GATE,
            n_left,
            n_right,
            pass: statistic <= STDERR_GATE,
            seeds,
        }
    }
}

/// Sample size, resolution and executor shared by every check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub n: usize,
    pub steps_per_unit: usize,
    pub exec: Exec,
}

impl CheckConfig {
    pub fn grid(&self, t: f64) -> Result<TimeGrid> {
        TimeGrid::with_resolution(t, self.steps_per_unit)
    }
}

fn ks(name: impl Into<String>, left: &[f64], right: &[f64], seeds: SeedPair) -> Result<IdentityVerdict> {
    Ok(IdentityVerdict::from_ks(name, ks_two_sample(left, right)?, seeds))
}

/// `arcosh θ_t` against `R_t`, with `θ` from its own SDE started at `cosh x0`.
pub fn check_theta_arcosh(spec: &ProcessSpec, t: f64, seeds: SeedPair, cfg: &CheckConfig) -> Result<IdentityVerdict> {
    if !(spec.alpha >= 0.0 && spec.x0 > 0.0) {
        return param(format!("θ representation needs α ≥ 0 and x0 > 0, got α={}, x0={}", spec.alpha, spec.x0));
    }
    let grid = cfg.grid(t)?;
    let (theta, _) = theta_terminal(spec.alpha, spec.x0.cosh(), &grid, seeds.left, cfg.n, cfg.exec)?;
    let left: Vec<f64> = theta.iter().map(|th| th.acosh()).collect();
    let right = r_terminal(spec, &grid, seeds.right, cfg.n, cfg.exec)?;
    ks(format!("theta-arcosh(α={}, x={}, t={t})", spec.alpha, spec.x0), &left, &right, seeds)
}

/// Draws of `1 + 2A·X₁` with `A = A^{(2α+1)}_{t/4}` and `X` a squared
/// Bessel process of index `α` started at `½(cosh x − 1)e^{2B^{(2α+1)}_{t/4}}/A`.
pub fn dhb_sample(spec: &ProcessSpec, t: f64, seed: Seed, cfg: &CheckConfig) -> Result<Vec<f64>> {
    if spec.alpha < -0.5 {
        return param(format!("the squared-Bessel representation needs α ≥ −1/2, got {}", spec.alpha));
    }
    let grid = cfg.grid(0.25 * t)?;
    let drift = 2.0 * spec.alpha + 1.0;
    let dim = 2.0 * (spec.alpha + 1.0);
    let excess = 2.0 * (0.5 * spec.x0).sinh().powi(2);
    map_bm_paths(seed, &grid, cfg.n, 0.0, cfg.exec, |_, p, rng| {
        let (a, endpoint) = path_exp_functional(p, &grid, drift, 2.0)?;
        let x1 = draw_besq(rng, dim, 0.5 * excess * endpoint / a, 1.0)?;
        Ok(1.0 + 2.0 * a * x1)
    })
}

/// `cosh R_t` against the squared-Bessel representation.
pub fn check_dhb(spec: &ProcessSpec, t: f64, seeds: SeedPair, cfg: &CheckConfig) -> Result<IdentityVerdict> {
    let left: Vec<f64> = r_terminal(spec, &cfg.grid(t)?, seeds.left, cfg.n, cfg.exec)?
        .iter()
        .map(|r| r.cosh())
        .collect();
    let right = dhb_sample(spec, t, seeds.right, cfg)?;
    ks(format!("dhb(α={}, x={}, t={t})", spec.alpha, spec.x0), &left, &right, seeds)
}

/// Replacement applied to the right-hand side of Bougerol's identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Control {
    None,
    /// `A_t ↦ t`: the right side becomes `sinh(x)e^{B_t} + W_t`.
    ClockIsTime,
}

/// `sinh(x + B_t)` against `sinh(x)e^{B_t} + W_{A_t}`.
pub fn check_bougerol_general(x: f64, t: f64, control: Control, seeds: SeedPair, cfg: &CheckConfig) -> Result<IdentityVerdict> {
    if !x.is_finite() {
        return param(format!("x must be finite, got {x}"));
    }
    let grid = cfg.grid(t)?;
    let st = t.sqrt();
    let left = cfg.exec.map(cfg.n, |i| (x + st * standard_normal(&mut seeds.left.path_rng(i))).sinh());
    let sx = x.sinh();
    let right = map_bm_paths(seeds.right, &grid, cfg.n, 0.0, cfg.exec, |_, p, rng| {
        let clock = match control {
            Control::None => path_exp_functional(p, &grid, 0.0, 2.0)?.0,
            Control::ClockIsTime => t,
        };
        Ok(sx * p[grid.n_steps()].exp() + clock.sqrt() * standard_normal(rng))
    })?;
    let tag = if control == Control::ClockIsTime { ", control" } else { "" };
    let name = if x == 0.0 { format!("bougerol(t={t}{tag})") } else { format!("bougerol-general(x={x}, t={t}{tag})") };
    ks(name, &left, &right, seeds)
}

/// `sinh(B_t)` against `W_{A_t}`.
pub fn check_bougerol(t: f64, control: Control, seeds: SeedPair, cfg: &CheckConfig) -> Result<IdentityVerdict> {
    check_bougerol_general(0.0, t, control, seeds, cfg)
}

/// `E e^{iue^{B_t} + ivW_{A_t}}` against `E e^{iv sinh(arsinh(u/v) + B_t)}`.
/// The statistic is the larger of the real and imaginary discrepancies.
pub fn check_charfn(u: f64, v: f64, t: f64, seeds: SeedPair, cfg: &CheckConfig) -> Result<IdentityVerdict> {
    if v == 0.0 || !(u.is_finite() && v.is_finite()) {
        return param(format!("characteristic function needs finite u and v ≠ 0, got u={u}, v={v}"));
    }
    let grid = cfg.grid(t)?;
    let left = map_bm_paths(seeds.left, &grid, cfg.n, 0.0, cfg.exec, |_, p, rng| {
        let a = path_exp_functional(p, &grid, 0.0, 2.0)?.0;
        Ok(u * p[grid.n_steps()].exp() + v * a.sqrt() * standard_normal(rng))
    })?;
    let shift = (u / v).asinh();
    let st = t.sqrt();
    let right = cfg.exec.map(cfg.n, |i| v * (shift + st * standard_normal(&mut seeds.right.path_rng(i))).sinh());
    let parts = |phase: &[f64]| -> Result<(MCEstimate, MCEstimate)> {
        let re: Vec<f64> = phase.iter().map(|p| p.cos()).collect();
        let im: Vec<f64> = phase.iter().map(|p| p.sin()).collect();
        Ok((mc_reduce(&re)?, mc_reduce(&im)?))
    };
    let (lr, li) = parts(&left)?;
    let (rr, ri) = parts(&right)?;
    let stat = lr.z_score(&rr).max(li.z_score(&ri));
    Ok(IdentityVerdict::from_estimates(format!("charfn(u={u}, v={v}, t={t})"), stat, cfg.n, cfg.n, seeds))
}

fn require_sinh_spec(spec: &ProcessSpec) -> Result<()> {
    if !(spec.alpha > -0.5) {
        return param(format!("sinh representation needs α > −1/2, got {}", spec.alpha));
    }
    Ok(())
}

/// Per path `(τ, Y_t)` with `Y_u = e^{B_u − (α+½)u}` and `τ = ∫₀ᵗ Y²du`,
/// passed to `f` together with the path's generator.
fn y_clock<T, F>(spec: &ProcessSpec, t: f64, seed: Seed, cfg: &CheckConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64, f64, &mut rand_chacha::ChaCha8Rng) -> Result<T> + Sync + Send,
{
    let grid = cfg.grid(t)?;
    map_bm_paths(seed, &grid, cfg.n, -spec.drift_coefficient(), cfg.exec, |_, p, rng| {
        let (tau, y2) = path_exp_functional(p, &grid, 0.0, 2.0)?;
        f(tau, y2.sqrt(), rng)
    })
}

/// `√X_t/Y_t` with `X` a squared Bessel process of dimension `2(1+α)`
/// from `sinh²x` run on the clock `∫Y²`.
pub fn sinh_rep_sample(spec: &ProcessSpec, t: f64, seed: Seed, cfg: &CheckConfig) -> Result<Vec<f64>> {
    require_sinh_spec(spec)?;
    let dim = 2.0 * (1.0 + spec.alpha);
    let x0 = spec.x0.sinh().powi(2);
    y_clock(spec, t, seed, cfg, |tau, y, rng| Ok(draw_besq(rng, dim, x0, tau)?.sqrt() / y))
}

/// `sinh R_t` against `√X_t/Y_t`.
pub fn check_sinh_rep(spec: &ProcessSpec, t: f64, seeds: SeedPair, cfg: &CheckConfig) -> Result<IdentityVerdict> {
    require_sinh_spec(spec)?;
    let left: Vec<f64> = r_terminal(spec, &cfg.grid(t)?, seeds.left, cfg.n, cfg.exec)?
        .iter()
        .map(|r| r.sinh())
        .collect();
    let right = sinh_rep_sample(spec, t, seeds.right, cfg)?;
    ks(format!("sinh-rep(α={}, x={}, t={t})", spec.alpha, spec.x0), &left, &right, seeds)
}

/// `(e^{−B_t+t/2}(sinh x + ∫Y dV)² + (∫Y dZ)²)^{½}` with `Y = e^{B_u−u/2}`,
/// exactly as displayed for `α = 0`; Itô sums on the grid.
pub fn sinh_displayed_sample(x: f64, t: f64, seed: Seed, cfg: &CheckConfig) -> Result<Vec<f64>> {
    let grid = cfg.grid(t)?;
    let (sx, sd) = (x.sinh(), grid.dt().sqrt());
    map_bm_paths(seed, &grid, cfg.n, -0.5, cfg.exec, |_, p, rng| {
        let (mut iv, mut iz) = (0.0, 0.0);
        for &b in &p[..grid.n_steps()] {
            let y = b.exp();
            iv += y * sd * standard_normal(rng);
            iz += y * sd * standard_normal(rng);
        }
        let inv_y = (-p[grid.n_steps()]).exp();
        Ok((inv_y * (sx + iv).powi(2) + iz * iz).sqrt())
    })
}

/// `sinh R_t` (α = 0) against the displayed three-Brownian-motion form.
pub fn check_sinh_displayed(x: f64, t: f64, seeds: SeedPair, cfg: &CheckConfig) -> Result<IdentityVerdict> {
    let spec = ProcessSpec::new(0.0, x)?;
    let left: Vec<f64> = r_terminal(&spec, &cfg.grid(t)?, seeds.left, cfg.n, cfg.exec)?
        .iter()
        .map(|r| r.sinh())
        .collect();
    let right = sinh_displayed_sample(x, t, seeds.right, cfg)?;
    ks(format!("sinh-displayed(x={x}, t={t})"), &left, &right, seeds)
}

/// `P(sinh R_t ≤ w)` against `E F(∫Y², (wY_t)²)` with `F(τ, ·)` the CDF of
/// the squared Bessel process of dimension `2(1+α)` from `sinh²x` at time `τ`.
pub fn check_sinh_cdf(w: f64, spec: &ProcessSpec, t: f64, seeds: SeedPair, cfg: &CheckConfig) -> Result<IdentityVerdict> {
    Ok(check_sinh_cdf_many(&[w], spec, t, seeds, cfg)?.remove(0))
}

/// [`check_sinh_cdf`] at every `w` in `ws`, all from the same two samples.
pub fn check_sinh_cdf_many(ws: &[f64], spec: &ProcessSpec, t: f64, seeds: SeedPair, cfg: &CheckConfig) -> Result<Vec<IdentityVerdict>> {
    require_sinh_spec(spec)?;
    if ws.is_empty() || ws.iter().any(|w| !(*w >= 0.0)) {
        return param(format!("need at least one w and every w ≥ 0, got {ws:?}"));
    }
    let r = r_terminal(spec, &cfg.grid(t)?, seeds.left, cfg.n, cfg.exec)?;
    let sinh: Vec<f64> = r.iter().map(|r| r.sinh()).collect();
    let ecdf = Ecdf::new(&sinh)?;
    let besq = BesqSpec::new(spec.alpha, spec.x0.sinh().powi(2))?;
    let rows = y_clock(spec, t, seeds.right, cfg, |tau, y, _| {
        ws.iter()
            .map(|&w| if w.is_infinite() { Ok(1.0) } else { besq_cdf(&besq, tau, (w * y).powi(2)) })
            .collect::<Result<Vec<f64>>>()
    })?;
    ws.iter()
        .enumerate()
        .map(|(j, &w)| {
            let column: Vec<f64> = rows.iter().map(|row| row[j]).collect();
            let stat = ecdf.prob_le(w).z_score(&mc_reduce(&column)?);
            Ok(IdentityVerdict::from_estimates(
                format!("sinh-cdf(w={w}, α={}, x={}, t={t})", spec.alpha, spec.x0),
                stat,
                cfg.n,
                cfg.n,
                seeds,
            ))
        })
        .collect()
}

/// Euler solution of `dX = 2√X Y dW + kY²dt` against the sum-of-squares
/// solution, `Y = e^{B_u−u/2}`. Each side draws its own `Y`.
pub fn check_gsde(k: u32, x0: f64, t: f64, seeds: SeedPair, cfg: &CheckConfig) -> Result<IdentityVerdict> {
    if k == 0 || !(x0 >= 0.0 && x0.is_finite()) {
        return param(format!("need k ≥ 1 and x0 ≥ 0, got k={k}, x0={x0}"));
    }
    let grid = cfg.grid(t)?;
    let dt = grid.dt();
    let y_of = |p: &[f64]| p.iter().map(|b| b.exp()).collect::<Vec<f64>>();
    let left = map_bm_paths(seeds.left, &grid, cfg.n, -0.5, cfg.exec, |i, p, rng| gsde_path(k, x0, &y_of(p), dt, rng, i))?;
    let right = map_bm_paths(seeds.right, &grid, cfg.n, -0.5, cfg.exec, |_, p, rng| Ok(gsol_path(k, x0, &y_of(p), dt, rng)))?;
    ks(format!("gsde(k={k}, x0={x0}, t={t})"), &left, &right, seeds)
}

/// Level of every KS verdict.
pub const LEVEL: f64 = GATE_LEVEL;
