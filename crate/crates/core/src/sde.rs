//! Path simulators for the hyperbolic Bessel process `R`, the process
//! `θ = cosh R`, `ξ = sinh² R`, squared Bessel processes and the
//! time-changed squared-Bessel SDE `dX = 2√X·Y dW + k·Y² dt`.
//!
//! All simulators draw path `i` from [`Seed::path_rng`]`(i)`, so batches are
//! reproducible and independent of the execution mode.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::paths::{PathBatch, TimeGrid};
use crate::rng::{Exec, Seed};

/// Index and starting point of a hyperbolic Bessel process
/// `dR = dB + (α + ½) coth R dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub alpha: f64,
    pub x0: f64,
}

impl ProcessSpec {
    pub fn new(alpha: f64, x0: f64) -> Result<Self> {
        if !(alpha >= -1.0 && alpha.is_finite()) {
            return param(format!("index must be finite and ≥ −1, got {alpha}"));
        }
        if !(x0 >= 0.0 && x0.is_finite()) {
            return param(format!("starting point must be finite and ≥ 0, got {x0}"));
        }
        if alpha < -0.5 && x0 == 0.0 {
            return param(format!("index {alpha} < −1/2 requires a positive starting point"));
        }
        Ok(ProcessSpec { alpha, x0 })
    }

    /// Coefficient `α + ½` of the `coth` drift.
    pub fn drift_coefficient(&self) -> f64 {
        self.alpha + 0.5
    }
}

/// Squared Bessel process of index `ν` (dimension `δ = 2(ν+1)`) started at `x0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesqSpec {
    pub index: f64,
    pub x0: f64,
}

impl BesqSpec {
    pub fn new(index: f64, x0: f64) -> Result<Self> {
        if !(index > -1.0 && index.is_finite()) {
            return param(format!("BESQ index must be > −1, got {index}"));
        }
        if !(x0 >= 0.0 && x0.is_finite()) {
            return param(format!("BESQ start must be ≥ 0, got {x0}"));
        }
        Ok(BesqSpec { index, x0 })
    }

    pub fn from_dimension(dimension: f64, x0: f64) -> Result<Self> {
        Self::new(0.5 * dimension - 1.0, x0)
    }

    pub fn dimension(&self) -> f64 {
        2.0 * (self.index + 1.0)
    }
}

/// Floor used when the `coth` drift is explicit (`α < −½`).
pub const COTH_FLOOR: f64 = 1e-6;

/// Below this level an `R` step with `α > −½` is taken on `X = R²`.
pub const BESQ_ZONE: f64 = 0.5;

/// One time step of `R`.
///
/// * `α = −½`: the drift vanishes and the step is a Brownian increment.
/// * `α > −½`, `R < BESQ_ZONE`: `X = R²` solves `dX = 2√X dB + δ(X) dt`
///   with the smooth dimension `δ(X) = 1 + (2α+1)√X coth √X`. The step is
///   an exact squared-Bessel transition whose dimension is frozen at its
///   expected mid-step value `δ + ½Δ(δδ' + 2Xδ'')`.
/// * `α > −½`, `R ≥ BESQ_ZONE`: simplified order-2 weak Taylor step for
///   additive noise, `R + aΔ + ΔW + ½a'ΔWΔ + ½(aa' + ½a'')Δ²`,
///   `a = (α+½) coth R`.
/// * `α < −½`: Euler–Maruyama with `|coth|` capped at `coth(COTH_FLOOR)`,
///   negative values reflected.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RStepper {
    c: f64,
    dt: f64,
    sd: f64,
}

impl RStepper {
    pub(crate) fn new(spec: &ProcessSpec, dt: f64) -> Self {
        RStepper { c: spec.drift_coefficient(), dt, sd: dt.sqrt() }
    }

    #[inline]
    pub(crate) fn step(&self, r: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
        let (c, dt) = (self.c, self.dt);
        if c == 0.0 {
            Ok(r + self.sd * normal(rng))
        } else if c > 0.0 {
            if r < BESQ_ZONE {
                let x = r * r;
                let (g, g1, g2) = x_coth_series(x);
                let (d, d1, d2) = (1.0 + 2.0 * c * g, 2.0 * c * g1, 2.0 * c * g2);
                let dim = (d + 0.5 * dt * (d * d1 + 2.0 * x * d2)).max(1.0);
                Ok(draw_besq(rng, dim, x, dt)?.sqrt())
            } else {
                let e = (2.0 * r).exp();
                let coth = 1.0 + 2.0 / (e - 1.0);
                let csch2 = 4.0 * e / ((e - 1.0) * (e - 1.0));
                let (a, a1, a2) = (c * coth, -c * csch2, 2.0 * c * coth * csch2);
                let dw = self.sd * normal(rng);
                Ok((r + a * dt + dw + 0.5 * a1 * dw * dt + 0.5 * (a * a1 + 0.5 * a2) * dt * dt).abs())
            }
        } else {
            let cap = 1.0 / COTH_FLOOR.tanh();
            let coth = if r.abs() < COTH_FLOOR { cap } else { (1.0 / r.tanh()).clamp(-cap, cap) };
            Ok((r + c * coth * dt + self.sd * normal(rng)).abs())
        }
    }
}

/// Taylor coefficients of `√X coth √X` in `X`: `2^{2n} B_{2n} / (2n)!`.
const R_COTH_R: [f64; 10] = [
    1.0,
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
    4.0 / 18243225.0,
    -3617.0 / 162820783125.0,
    87734.0 / 38979295480125.0,
];

/// `g(X) = √X coth √X` with its first two derivatives, for `0 ≤ X ≤ 1`.
#[inline]
fn x_coth_series(x: f64) -> (f64, f64, f64) {
    let (mut g, mut g1, mut g2) = (0.0, 0.0, 0.0);
    for (n, &k) in R_COTH_R.iter().enumerate().rev() {
        let nf = n as f64;
        g = g * x + k;
        if n >= 1 {
            g1 = g1 * x + nf * k;
        }
        if n >= 2 {
            g2 = g2 * x + nf * (nf - 1.0) * k;
        }
    }
    (g, g1, g2)
}

fn check_finite(v: f64, path: usize, step: usize, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Integration { path, step, detail: format!("{what} became {v}") })
    }
}

fn step_error(e: Error, path: usize, step: usize) -> Error {
    Error::Integration { path, step, detail: e.to_string() }
}

#[inline]
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Runs `R` along `grid` writing every grid value into `out`.
pub(crate) fn r_path_into(spec: &ProcessSpec, grid: &TimeGrid, rng: &mut ChaCha8Rng, index: usize, out: &mut [f64]) -> Result<()> {
    let stepper = RStepper::new(spec, grid.dt());
    out[0] = spec.x0;
    for i in 0..grid.n_steps() {
        out[i + 1] = stepper.step(out[i], rng).map_err(|e| step_error(e, index, i + 1))?;
        check_finite(out[i + 1], index, i + 1, "R")?;
    }
    Ok(())
}

/// Terminal value `R_t` of one path.
pub(crate) fn r_terminal_path(spec: &ProcessSpec, grid: &TimeGrid, rng: &mut ChaCha8Rng, index: usize) -> Result<f64> {
    let stepper = RStepper::new(spec, grid.dt());
    let mut r = spec.x0;
    for i in 0..grid.n_steps() {
        r = stepper.step(r, rng).map_err(|e| step_error(e, index, i + 1))?;
        check_finite(r, index, i + 1, "R")?;
    }
    Ok(r)
}

/// Euler paths of `dR = dB + (α+½) coth R dt` from `spec.x0`.
pub fn simulate_r(spec: &ProcessSpec, grid: TimeGrid, seed: Seed, n_paths: usize, exec: Exec) -> Result<PathBatch> {
    let w = grid.n_steps() + 1;
    let rows = exec.try_map(n_paths, |i| {
        let mut row = vec![0.0; w];
        r_path_into(spec, &grid, &mut seed.path_rng(i), i, &mut row)?;
        Ok(row)
    })?;
    PathBatch::from_rows(grid, seed, 0.0, rows.concat())
}

/// Terminal values `R_t` of [`simulate_r`] without storing paths.
pub fn r_terminal(spec: &ProcessSpec, grid: &TimeGrid, seed: Seed, n_paths: usize, exec: Exec) -> Result<Vec<f64>> {
    exec.try_map(n_paths, |i| r_terminal_path(spec, grid, &mut seed.path_rng(i), i))
}

/// Counts of clamp events in a `θ` or `ξ` simulation; a discretisation
/// health metric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClampStats {
    pub clamped_steps: u64,
    pub total_steps: u64,
}

impl ClampStats {
    pub fn fraction(&self) -> f64 {
        if self.total_steps == 0 {
            0.0
        } else {
            self.clamped_steps as f64 / self.total_steps as f64
        }
    }

    fn merge(self, o: ClampStats) -> ClampStats {
        ClampStats {
            clamped_steps: self.clamped_steps + o.clamped_steps,
            total_steps: self.total_steps + o.total_steps,
        }
    }
}

fn theta_path(alpha: f64, theta0: f64, grid: &TimeGrid, rng: &mut ChaCha8Rng, index: usize, mut out: Option<&mut [f64]>) -> Result<(f64, ClampStats)> {
    let dt = grid.dt();
    let sd = dt.sqrt();
    let mut th = theta0;
    let mut stats = ClampStats { clamped_steps: 0, total_steps: grid.n_steps() as u64 };
    if let Some(o) = out.as_deref_mut() {
        o[0] = th;
    }
    for i in 0..grid.n_steps() {
        let next = theta_step(th, sd * normal(rng), alpha, dt);
        check_finite(next, index, i + 1, "theta")?;
        if next < 1.0 {
            stats.clamped_steps += 1;
        }
        th = next.max(1.0);
        if let Some(o) = out.as_deref_mut() {
            o[i + 1] = th;
        }
    }
    Ok((th, stats))
}

/// Unclamped Euler step of `θ`.
#[inline]
pub(crate) fn theta_step(th: f64, db: f64, alpha: f64, dt: f64) -> f64 {
    th + (th * th - 1.0).max(0.0).sqrt() * db + (alpha + 1.0) * th.abs() * dt
}

/// Unclamped Euler step of `ξ`.
#[inline]
pub(crate) fn xi_step(x: f64, db: f64, dt: f64) -> f64 {
    x + 2.0 * (x * x + x).max(0.0).sqrt() * db + (2.0 + 3.0 * x) * dt
}

fn check_theta(alpha: f64, theta0: f64) -> Result<()> {
    if !(alpha >= -1.0 && alpha.is_finite()) {
        return param(format!("theta index must be ≥ −1, got {alpha}"));
    }
    if !(theta0 >= 1.0 && theta0.is_finite()) {
        return param(format!("theta start must be ≥ 1, got {theta0}"));
    }
    Ok(())
}

/// Euler paths of `dθ = √(θ²−1) dB + (α+1) θ dt`, clamped below at 1.
pub fn simulate_theta(alpha: f64, theta0: f64, grid: TimeGrid, seed: Seed, n_paths: usize, exec: Exec) -> Result<PathBatch> {
    check_theta(alpha, theta0)?;
    let w = grid.n_steps() + 1;
    let rows = exec.try_map(n_paths, |i| {
        let mut row = vec![0.0; w];
        theta_path(alpha, theta0, &grid, &mut seed.path_rng(i), i, Some(&mut row))?;
        Ok(row)
    })?;
    PathBatch::from_rows(grid, seed, 0.0, rows.concat())
}

/// Terminal `θ_t` values with the pre-clamp excursion count.
pub fn theta_terminal(alpha: f64, theta0: f64, grid: &TimeGrid, seed: Seed, n_paths: usize, exec: Exec) -> Result<(Vec<f64>, ClampStats)> {
    check_theta(alpha, theta0)?;
    let out = exec.try_map(n_paths, |i| theta_path(alpha, theta0, grid, &mut seed.path_rng(i), i, None))?;
    let stats = out.iter().fold(ClampStats::default(), |a, b| a.merge(b.1));
    Ok((out.into_iter().map(|v| v.0).collect(), stats))
}

fn xi_path(x0: f64, grid: &TimeGrid, rng: &mut ChaCha8Rng, index: usize, out: &mut [f64]) -> Result<()> {
    let dt = grid.dt();
    let sd = dt.sqrt();
    out[0] = x0;
    for i in 0..grid.n_steps() {
        let next = xi_step(out[i], sd * normal(rng), dt);
        check_finite(next, index, i + 1, "xi")?;
        out[i + 1] = next.max(0.0);
    }
    Ok(())
}

/// Euler paths of `dξ = 2√(ξ²+ξ) dB + (2+3ξ) dt`, clamped at 0.
pub fn simulate_xi(x0: f64, grid: TimeGrid, seed: Seed, n_paths: usize, exec: Exec) -> Result<PathBatch> {
    if !(x0 >= 0.0 && x0.is_finite()) {
        return param(format!("xi start must be ≥ 0, got {x0}"));
    }
    let w = grid.n_steps() + 1;
    let rows = exec.try_map(n_paths, |i| {
        let mut row = vec![0.0; w];
        xi_path(x0, &grid, &mut seed.path_rng(i), i, &mut row)?;
        Ok(row)
    })?;
    PathBatch::from_rows(grid, seed, 0.0, rows.concat())
}

/// Draw of `X_t` for a squared Bessel process of dimension `dimension`
/// started at `x0`.
///
/// For `δ ≥ 1` the law is `(√x0 + √t Z)² + 2t·Gamma((δ−1)/2)`; below that
/// the Poisson mixture `Gamma(δ/2 + N, 2t)`, `N ~ Poisson(x0/(2t))` is used.
pub fn draw_besq<R: Rng + ?Sized>(rng: &mut R, dimension: f64, x0: f64, t: f64) -> Result<f64> {
    let scale = 2.0 * t;
    if dimension >= 1.0 {
        let z: f64 = rng.sample(StandardNormal);
        let g = (x0.sqrt() + t.sqrt() * z).powi(2);
        let shape = 0.5 * (dimension - 1.0);
        if shape == 0.0 {
            return Ok(g);
        }
        let chi = Gamma::new(shape, scale)
            .map_err(|e| Error::Parameter(format!("Gamma({shape}, {scale}): {e}")))?;
        return Ok(g + chi.sample(rng));
    }
    let mixing = if x0 > 0.0 {
        Poisson::new(x0 / scale)
            .map_err(|e| Error::Parameter(format!("Poisson({}) : {e}", x0 / scale)))?
            .sample(rng)
    } else {
        0.0
    };
    let g = Gamma::new(0.5 * dimension + mixing, scale)
        .map_err(|e| Error::Parameter(format!("Gamma({}, {scale}): {e}", 0.5 * dimension + mixing)))?;
    Ok(g.sample(rng))
}

/// Exact draws of `X_t` from the squared-Bessel transition.
pub fn sample_besq_exact(spec: &BesqSpec, t: f64, seed: Seed, n: usize, exec: Exec) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return param(format!("BESQ time must be positive, got {t}"));
    }
    let spec = BesqSpec::new(spec.index, spec.x0)?;
    exec.try_map(n, |i| draw_besq(&mut seed.path_rng(i), spec.dimension(), spec.x0, t))
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return param("k must be at least 1");
    }
    Ok(())
}

/// One path of `dX = 2√X Y dW + k Y² dt` along the grid of `y`, by the
/// Milstein step `X ← (√X + YΔW)² + (k−1)Y²Δ`, which stays nonnegative
/// for `k ≥ 1`.
pub(crate) fn gsde_path(k: u32, x0: f64, y: &[f64], dt: f64, rng: &mut ChaCha8Rng, index: usize) -> Result<f64> {
    let sd = dt.sqrt();
    let extra = (k - 1) as f64 * dt;
    let mut x = x0;
    for (i, &yv) in y[..y.len() - 1].iter().enumerate() {
        x = (x.sqrt() + yv * sd * normal(rng)).powi(2) + extra * yv * yv;
        check_finite(x, index, i + 1, "X")?;
    }
    Ok(x)
}

/// `(√x₀ + ∫Y dW¹)² + Σ_{i=2}^k (∫Y dWⁱ)²` with left-point Itô sums.
pub(crate) fn gsol_path(k: u32, x0: f64, y: &[f64], dt: f64, rng: &mut ChaCha8Rng) -> f64 {
    let sd = dt.sqrt();
    let mut total = 0.0;
    for comp in 0..k {
        let mut integral = 0.0;
        for &yv in &y[..y.len() - 1] {
            integral += yv * sd * normal(rng);
        }
        let base = if comp == 0 { x0.sqrt() } else { 0.0 };
        total += (base + integral).powi(2);
    }
    total
}

fn check_gsde_inputs(k: u32, x0: f64, y_paths: &PathBatch, n_paths: usize) -> Result<()> {
    check_k(k)?;
    if !(x0 >= 0.0 && x0.is_finite()) {
        return param(format!("X start must be ≥ 0, got {x0}"));
    }
    if n_paths != y_paths.n_paths() {
        return param(format!(
            "grid mismatch: {n_paths} X paths requested but {} Y paths supplied",
            y_paths.n_paths()
        ));
    }
    Ok(())
}

/// Terminal `X_t` of the Milstein scheme driven pathwise by `y_paths`; the
/// noise `W` comes from `seed` and is independent of `Y`.
pub fn simulate_gsde(k: u32, x0: f64, y_paths: &PathBatch, seed: Seed, n_paths: usize, exec: Exec) -> Result<Vec<f64>> {
    check_gsde_inputs(k, x0, y_paths, n_paths)?;
    let dt = y_paths.grid.dt();
    exec.try_map(n_paths, |i| gsde_path(k, x0, y_paths.path(i), dt, &mut seed.path_rng(i), i))
}

/// Terminal `X_t` from the explicit sum-of-squares solution.
pub fn closed_form_gsol(k: u32, x0: f64, y_paths: &PathBatch, seed: Seed, exec: Exec) -> Result<Vec<f64>> {
    check_gsde_inputs(k, x0, y_paths, y_paths.n_paths())?;
    let dt = y_paths.grid.dt();
    Ok(exec.map(y_paths.n_paths(), |i| gsol_path(k, x0, y_paths.path(i), dt, &mut seed.path_rng(i))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::sample_bm_paths;
    use crate::stats::{ks_two_sample, mc_reduce};
    use proptest::prelude::*;

    #[test]
    fn spec_validation() {
        assert!(ProcessSpec::new(-1.5, 1.0).is_err());
        assert!(ProcessSpec::new(-0.75, 0.0).is_err());
        assert!(ProcessSpec::new(-0.75, 0.1).is_ok());
        assert!(ProcessSpec::new(0.0, -1.0).is_err());
        assert!(BesqSpec::new(-1.0, 1.0).is_err());
        assert!(BesqSpec::new(0.0, -1.0).is_err());
        assert_eq!(BesqSpec::from_dimension(3.0, 0.0).unwrap().index, 0.5);
    }

    #[test]
    fn coth_series_matches_closed_form() {
        // the closed forms cancel badly for small x; the stepper only needs x < BESQ_ZONE²
        for i in 5..=50 {
            let x = i as f64 / 100.0;
            let r = x.sqrt();
            let (g, g1, g2) = x_coth_series(x);
            let h1 = 1.0 / r.tanh() - r / r.sinh().powi(2);
            let h2 = 2.0 * (r / r.tanh() - 1.0) / r.sinh().powi(2);
            assert!((g - r / r.tanh()).abs() < 1e-9);
            assert!((g1 - h1 / (2.0 * r)).abs() < 1e-9, "x={x}");
            assert!((g2 - (r * h2 - h1) / (4.0 * r * r * r)).abs() < 1e-8, "x={x}");
        }
        for x in [0.0, 1e-6, 1e-3] {
            let (g, g1, g2) = x_coth_series(x);
            assert!((g - (1.0 + x / 3.0 - x * x / 45.0)).abs() < 1e-8);
            assert!((g1 - (1.0 / 3.0 - 2.0 * x / 45.0)).abs() < 1e-8);
            assert!((g2 + 2.0 / 45.0).abs() < 1e-4);
        }
    }

    #[test]
    fn brownian_case_matches_bm() {
        let n = 100_000;
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let spec = ProcessSpec::new(-0.5, 0.0).unwrap();
        let r = r_terminal(&spec, &grid, Seed(1), n, Exec::Sequential).unwrap();
        let b = sample_bm_paths(Seed(2), grid, n, 0.0, Exec::Sequential).unwrap().terminal();
        assert!(ks_two_sample(&r, &b).unwrap().pass());
    }

    #[test]
    fn short_horizon_concentrates_at_start() {
        let grid = TimeGrid::new(1e-6, 64).unwrap();
        let spec = ProcessSpec::new(1.0, 0.8).unwrap();
        let r = r_terminal(&spec, &grid, Seed(3), 20_000, Exec::Sequential).unwrap();
        let e = mc_reduce(&r).unwrap();
        assert!((e.mean - 0.8).abs() < 3.0 * e.stderr + 1e-5, "{e:?}");
        let (th, _) = theta_terminal(0.0, 2.0, &grid, Seed(3), 1000, Exec::Sequential).unwrap();
        assert!(th.iter().all(|v| (v - 2.0).abs() < 0.01));
    }

    #[test]
    fn r_stays_nonnegative_from_zero() {
        let grid = TimeGrid::new(1.0, 512).unwrap();
        for alpha in [-0.25, 0.0, 1.0] {
            let spec = ProcessSpec::new(alpha, 0.0).unwrap();
            let b = simulate_r(&spec, grid, Seed(4), 200, Exec::Sequential).unwrap();
            assert!(b.paths().all(|p| p.iter().all(|&v| v >= 0.0 && v.is_finite())));
        }
        let spec = ProcessSpec::new(-0.9, 0.5).unwrap();
        let b = simulate_r(&spec, grid, Seed(4), 200, Exec::Sequential).unwrap();
        assert!(b.paths().all(|p| p.iter().all(|&v| v >= 0.0)));
    }

    #[test]
    fn frozen_noise_ode_limbs() {
        let n = 200_000;
        let dt = 1.0 / n as f64;
        let th = (0..n).fold(1.0, |th, _| theta_step(th, 0.0, 0.5, dt));
        assert!((th - 1.5f64.exp()).abs() < 1e-4);
        let xi = (0..n).fold(0.0, |x, _| xi_step(x, 0.0, dt));
        assert!((xi - 2.0 / 3.0 * (3f64.exp() - 1.0)).abs() < 1e-3);
    }

    #[test]
    fn theta_never_below_one() {
        let grid = TimeGrid::new(1.0, 1024).unwrap();
        let b = simulate_theta(0.0, 1.2, grid, Seed(6), 100, Exec::Sequential).unwrap();
        assert!(b.paths().all(|p| p.iter().all(|&v| v >= 1.0)));
        assert!(simulate_theta(0.0, 0.5, grid, Seed(6), 1, Exec::Sequential).is_err());
    }

    #[test]
    fn xi_mean_matches_ode() {
        // E ξ solves m' = 2 + 3m exactly: m_t = (2/3)(e^{3t} − 1) from 0
        let grid = TimeGrid::new(0.5, 1024).unwrap();
        let b = simulate_xi(0.0, grid, Seed(7), 20_000, Exec::Sequential).unwrap();
        let e = mc_reduce(&b.terminal()).unwrap();
        let exact = 2.0 / 3.0 * (1.5f64.exp() - 1.0);
        assert!((e.mean - exact).abs() < 3.0 * e.stderr + 5e-3, "{e:?} vs {exact}");
        assert!(b.paths().all(|p| p.iter().all(|&v| v >= 0.0)));
    }

    #[test]
    fn besq_exact_moments() {
        let n = 100_000;
        let chi1 = sample_besq_exact(&BesqSpec::from_dimension(1.0, 0.0).unwrap(), 1.0, Seed(8), n, Exec::Sequential).unwrap();
        let e = mc_reduce(&chi1).unwrap();
        assert!((e.mean - 1.0).abs() <= 3.0 * e.stderr);
        let spec = BesqSpec::from_dimension(2.0, 4.0).unwrap();
        let x = sample_besq_exact(&spec, 1.0, Seed(9), n, Exec::Sequential).unwrap();
        let e = mc_reduce(&x).unwrap();
        assert!((e.mean - 6.0).abs() <= 3.0 * e.stderr);
        // Var X_t = 2δt² + 4x₀t = 4 + 16
        let var: Vec<f64> = x.iter().map(|v| (v - 6.0).powi(2)).collect();
        let ev = mc_reduce(&var).unwrap();
        assert!((ev.mean - 20.0).abs() <= 3.0 * ev.stderr, "{ev:?}");
        assert!(sample_besq_exact(&spec, 0.0, Seed(9), 1, Exec::Sequential).is_err());
    }

    fn constant_y(value: f64, grid: TimeGrid, n: usize) -> PathBatch {
        PathBatch::from_rows(grid, Seed(0), 0.0, vec![value; n * (grid.n_steps() + 1)]).unwrap()
    }

    #[test]
    fn gsde_constant_coefficient() {
        let n = 50_000;
        let grid = TimeGrid::new(1.0, 256).unwrap();
        let y = constant_y(1.0, grid, n);
        let x = simulate_gsde(2, 0.0, &y, Seed(10), n, Exec::Sequential).unwrap();
        let e = mc_reduce(&x).unwrap();
        assert!((e.mean - 2.0).abs() <= 3.0 * e.stderr, "{e:?}");
        let c = closed_form_gsol(3, 0.0, &y, Seed(11), Exec::Sequential).unwrap();
        let e = mc_reduce(&c).unwrap();
        assert!((e.mean - 3.0).abs() <= 3.0 * e.stderr, "{e:?}");
        assert!(simulate_gsde(2, 0.0, &y, Seed(10), n + 1, Exec::Sequential).is_err());
        assert!(simulate_gsde(0, 0.0, &y, Seed(10), n, Exec::Sequential).is_err());
    }

    #[test]
    fn gsde_degenerate_coefficient() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let y = constant_y(0.0, grid, 10);
        let x = simulate_gsde(1, 1.7, &y, Seed(12), 10, Exec::Sequential).unwrap();
        assert!(x.iter().all(|&v| (v - 1.7).abs() < 1e-14));
        let c = closed_form_gsol(1, 1.7, &y, Seed(12), Exec::Sequential).unwrap();
        assert!(c.iter().all(|&v| (v - 1.7).abs() < 1e-15));
        // with W frozen the SDE is an ODE: X_t = x0 + k∫Y²du
        let y = constant_y(0.5, grid, 1);
        let xf = gsde_path_frozen(3, 0.2, y.path(0), grid.dt());
        assert!((xf - (0.2 + 3.0 * 0.25)).abs() < 1e-12);
    }

    fn gsde_path_frozen(k: u32, x0: f64, y: &[f64], dt: f64) -> f64 {
        y[..y.len() - 1].iter().fold(x0, |x, &v| x + k as f64 * v * v * dt)
    }

    proptest! {
        #[test]
        fn r_step_nonnegative(r in 0.0f64..5.0, seed in 0u64..1000, alpha in -0.9f64..3.0) {
            let spec = ProcessSpec::new(alpha, 0.1).unwrap();
            let s = RStepper::new(&spec, 1.0 / 512.0).step(r, &mut Seed(seed).path_rng(0)).unwrap();
            prop_assert!(s >= 0.0 && s.is_finite());
        }
    }
}
