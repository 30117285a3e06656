//! Brownian paths on a uniform grid and the exponential functionals
//! `∫₀ᵗ e^{c(B_u+αu)} du` built from them.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::{Exec, Seed};

/// Grid resolution used when an experiment does not ask for one.
pub const DEFAULT_STEPS_PER_UNIT: usize = 512;

/// Uniform discretisation `0 = u₀ < u₁ < … < u_n = t_end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return param(format!("grid horizon must be finite and positive, got {t_end}"));
        }
        if n_steps == 0 {
            return param("grid needs at least one step");
        }
        Ok(TimeGrid { t_end, n_steps, dt: t_end / n_steps as f64 })
    }

    /// `⌈t_end · steps_per_unit⌉` steps (at least one).
    pub fn with_resolution(t_end: f64, steps_per_unit: usize) -> Result<Self> {
        if steps_per_unit == 0 {
            return param("steps per unit time must be positive");
        }
        let n = (t_end * steps_per_unit as f64).ceil().max(1.0);
        if !n.is_finite() {
            return param(format!("grid horizon must be finite and positive, got {t_end}"));
        }
        Self::new(t_end, n as usize)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Grid point `u_i`; the last point is exactly `t_end`.
    pub fn point(&self, i: usize) -> f64 {
        if i >= self.n_steps {
            self.t_end
        } else {
            i as f64 * self.dt
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|i| self.point(i))
    }
}

/// One standard normal draw.
#[inline]
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Fills `out[0..=n_steps]` with `x0 + B_u + drift·u` along the grid.
pub fn fill_bm_path(
    rng: &mut ChaCha8Rng,
    grid: &TimeGrid,
    x0: f64,
    drift: f64,
    out: &mut [f64],
) {
    let sd = grid.dt.sqrt();
    let mean = drift * grid.dt;
    out[0] = x0;
    for i in 0..grid.n_steps {
        out[i + 1] = out[i] + mean + sd * standard_normal(rng);
    }
}

/// A batch of discretised sample paths stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PathBatch {
    pub grid: TimeGrid,
    pub seed: Seed,
    pub drift: f64,
    n_paths: usize,
    values: Vec<f64>,
}

impl PathBatch {
    /// Wraps precomputed rows (each of length `n_steps + 1`).
    pub fn from_rows(grid: TimeGrid, seed: Seed, drift: f64, values: Vec<f64>) -> Result<Self> {
        let width = grid.n_steps + 1;
        if !values.len().is_multiple_of(width) {
            return param(format!(
                "path storage of length {} is not a multiple of row width {width}",
                values.len()
            ));
        }
        Ok(PathBatch { grid, seed, drift, n_paths: values.len() / width, values })
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn is_empty(&self) -> bool {
        self.n_paths == 0
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let w = self.grid.n_steps + 1;
        &self.values[i * w..(i + 1) * w]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.grid.n_steps + 1)
    }

    pub fn terminal(&self) -> Vec<f64> {
        self.paths().map(|p| p[p.len() - 1]).collect()
    }

    pub fn map_values(mut self, f: impl Fn(f64) -> f64) -> Self {
        self.values.iter_mut().for_each(|v| *v = f(*v));
        self
    }

    /// CSV matrix with header `u_0,…,u_n` (grid times in the second row
    /// would break column typing, so they are only named).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (0..=self.grid.n_steps).map(|i| format!("u_{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for p in self.paths() {
            let row: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `n_paths` Brownian paths from 0 with the given drift.
pub fn sample_bm_paths(
    seed: Seed,
    grid: TimeGrid,
    n_paths: usize,
    drift: f64,
    exec: Exec,
) -> Result<PathBatch> {
    if !drift.is_finite() {
        return param(format!("drift must be finite, got {drift}"));
    }
    let w = grid.n_steps + 1;
    let rows = exec.map(n_paths, |i| {
        let mut row = vec![0.0; w];
        fill_bm_path(&mut seed.path_rng(i), &grid, 0.0, drift, &mut row);
        row
    });
    PathBatch::from_rows(grid, seed, drift, rows.concat())
}

/// Exponent factor `c` of `e^{c(B_u+αu)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpFactor {
    One,
    Two,
}

impl ExpFactor {
    pub fn value(self) -> f64 {
        match self {
            ExpFactor::One => 1.0,
            ExpFactor::Two => 2.0,
        }
    }

    pub fn from_int(c: u32) -> Result<Self> {
        match c {
            1 => Ok(ExpFactor::One),
            2 => Ok(ExpFactor::Two),
            _ => param(format!("exponent factor must be 1 or 2, got {c}")),
        }
    }
}

/// Per-path `∫₀ᵗ e^{c(B_u+αu)}du` and `e^{c(B_t+αt)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpFunctionals {
    pub integral: Vec<f64>,
    pub endpoint: Vec<f64>,
    pub c: ExpFactor,
    pub alpha: f64,
}

/// Trapezoid integral and endpoint of `e^{c(path_u + αu)}` for one path.
///
/// The sum is accumulated relative to the largest exponent so that only a
/// genuinely unrepresentable result reports overflow.
pub fn path_exp_functional(path: &[f64], grid: &TimeGrid, alpha: f64, c: f64) -> Result<(f64, f64)> {
    let n = grid.n_steps;
    let expo = |i: usize| c * (path[i] + alpha * grid.point(i));
    let mut m = f64::NEG_INFINITY;
    for i in 0..=n {
        m = m.max(expo(i));
    }
    if !m.is_finite() {
        return Err(Error::Overflow(format!("exponent {m} in exponential functional")));
    }
    let mut s = 0.5 * ((expo(0) - m).exp() + (expo(n) - m).exp());
    for i in 1..n {
        s += (expo(i) - m).exp();
    }
    let scale = m.exp();
    let integral = s * grid.dt * scale;
    let endpoint = expo(n).exp();
    if !(integral.is_finite() && endpoint.is_finite()) {
        return Err(Error::Overflow(format!(
            "e^(c(B+αu)) integral with max exponent {m:.3}"
        )));
    }
    Ok((integral, endpoint))
}

pub fn exp_integral(batch: &PathBatch, alpha: f64, c: ExpFactor) -> Result<ExpFunctionals> {
    let mut integral = Vec::with_capacity(batch.n_paths());
    let mut endpoint = Vec::with_capacity(batch.n_paths());
    for p in batch.paths() {
        let (i, e) = path_exp_functional(p, &batch.grid, alpha, c.value())?;
        integral.push(i);
        endpoint.push(e);
    }
    Ok(ExpFunctionals { integral, endpoint, c, alpha })
}

/// `Γ_t = e^{B_t+αt} / (1 + λ ∫₀ᵗ e^{B_u+αu}du)` per path.
pub fn gamma_functional(batch: &PathBatch, alpha: f64, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return param(format!("lambda must be positive, got {lambda}"));
    }
    let f = exp_integral(batch, alpha, ExpFactor::One)?;
    Ok(f.endpoint
        .iter()
        .zip(&f.integral)
        .map(|(e, i)| e / (1.0 + lambda * i))
        .collect())
}

/// Streams `n` Brownian paths (drift included) through `f` without storing
/// the batch. Path `i` is identical to row `i` of [`sample_bm_paths`].
pub fn map_bm_paths<T, F>(
    seed: Seed,
    grid: &TimeGrid,
    n: usize,
    drift: f64,
    exec: Exec,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &[f64], &mut ChaCha8Rng) -> Result<T> + Sync + Send,
{
    exec.try_map_with(n, grid.n_steps + 1, |i, buf| {
        let mut rng = seed.path_rng(i);
        fill_bm_path(&mut rng, grid, 0.0, drift, buf);
        f(i, buf, &mut rng)
    })
}

/// Per-path `(A, endpoint)` with `A = ∫₀ᵗ e^{c(B_u+αu)}du`, streamed.
pub fn exp_functional_sample(
    seed: Seed,
    grid: &TimeGrid,
    n: usize,
    alpha: f64,
    c: ExpFactor,
    exec: Exec,
) -> Result<Vec<(f64, f64)>> {
    map_bm_paths(seed, grid, n, 0.0, exec, |_, p, _| path_exp_functional(p, grid, alpha, c.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mc_reduce;
    use proptest::prelude::*;

    fn zero_batch(t: f64, n_steps: usize) -> PathBatch {
        let g = TimeGrid::new(t, n_steps).unwrap();
        PathBatch::from_rows(g, Seed(0), 0.0, vec![0.0; 3 * (n_steps + 1)]).unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = TimeGrid::new(0.3, 7).unwrap();
        assert!(g.dt() > 0.0);
        assert!((g.dt() * 7.0 - 0.3).abs() <= f64::EPSILON);
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 0.3);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert_eq!(TimeGrid::with_resolution(0.25, 512).unwrap().n_steps(), 128);
    }

    #[test]
    fn empty_batch() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let b = sample_bm_paths(Seed(1), g, 0, 0.0, Exec::Sequential).unwrap();
        assert!(b.is_empty());
        assert_eq!(b.grid, g);
        assert!(sample_bm_paths(Seed(1), g, 3, f64::NAN, Exec::Sequential).is_err());
    }

    #[test]
    fn batch_determinism_and_start() {
        let g = TimeGrid::new(1.0, 16).unwrap();
        let a = sample_bm_paths(Seed(5), g, 50, 0.3, Exec::Sequential).unwrap();
        let b = sample_bm_paths(Seed(5), g, 50, 0.3, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.paths().all(|p| p[0] == 0.0));
        let streamed = map_bm_paths(Seed(5), &g, 50, 0.3, Exec::Sequential, |_, p, _| Ok(p.to_vec())).unwrap();
        for (i, p) in streamed.iter().enumerate() {
            assert_eq!(p.as_slice(), a.path(i));
        }
    }

    #[test]
    fn terminal_moments() {
        let n = 100_000;
        let g = TimeGrid::new(1.0, 8).unwrap();
        let b = sample_bm_paths(Seed(7), g, n, 0.0, Exec::Sequential).unwrap();
        let e = mc_reduce(&b.terminal()).unwrap();
        assert!(e.mean.abs() <= 3.0 / (n as f64).sqrt());
        let var = e.stderr * e.stderr * n as f64;
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn frozen_path_integrals() {
        let b = zero_batch(1.5, 64);
        for c in [ExpFactor::One, ExpFactor::Two] {
            let f = exp_integral(&b, 0.0, c).unwrap();
            assert!(f.integral.iter().all(|&v| (v - 1.5).abs() < 1e-14));
            assert!(f.endpoint.iter().all(|&v| v == 1.0));
        }
        // trapezoid on e^{2αu}: compare with the exact integral at fine resolution
        let b = zero_batch(1.0, 4096);
        let alpha = 0.7;
        let f = exp_integral(&b, alpha, ExpFactor::Two).unwrap();
        let exact = ((2.0 * alpha).exp() - 1.0) / (2.0 * alpha);
        assert!((f.integral[0] - exact).abs() < 1e-6);
    }

    #[test]
    fn gamma_functional_cases() {
        let b = zero_batch(2.0, 32);
        let lam = 0.5;
        let g = gamma_functional(&b, 0.0, lam).unwrap();
        assert!(g.iter().all(|&v| (v - 1.0 / (1.0 + lam * 2.0)).abs() < 1e-14));
        let tiny = gamma_functional(&b, 0.3, 1e-12).unwrap();
        assert!(tiny.iter().all(|&v| (v - (0.3f64 * 2.0).exp()).abs() < 1e-9));
        assert!(gamma_functional(&b, 0.0, 0.0).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        let b = PathBatch::from_rows(g, Seed(0), 0.0, vec![0.0, 400.0, 400.0]).unwrap();
        assert!(matches!(exp_integral(&b, 0.0, ExpFactor::Two), Err(Error::Overflow(_))));
    }

    #[test]
    fn mean_of_a_matches_fubini() {
        let n = 200_000;
        let g = TimeGrid::with_resolution(1.0, DEFAULT_STEPS_PER_UNIT).unwrap();
        let s = exp_functional_sample(Seed(3), &g, n, 0.0, ExpFactor::Two, Exec::Sequential).unwrap();
        let a: Vec<f64> = s.iter().map(|p| p.0).collect();
        let e = mc_reduce(&a).unwrap();
        let exact = (2f64.exp() - 1.0) / 2.0;
        assert!((e.mean - exact).abs() <= 3.0 * e.stderr, "{e:?} vs {exact}");
    }

    #[test]
    fn grid_refinement_moves_mean_of_a_within_noise() {
        let n = 100_000;
        let coarse = TimeGrid::new(1.0, 256).unwrap();
        let fine = TimeGrid::new(1.0, 512).unwrap();
        let f = |g: &TimeGrid, s: u64| {
            let v = exp_functional_sample(Seed(s), g, n, 0.0, ExpFactor::Two, Exec::Sequential).unwrap();
            mc_reduce(&v.iter().map(|p| p.0).collect::<Vec<_>>()).unwrap()
        };
        let (a, b) = (f(&coarse, 10), f(&fine, 11));
        assert!(a.agrees_with(&b, 3.0), "{a:?} {b:?}");
    }

    proptest! {
        #[test]
        fn functionals_positive_and_gamma_bounded(seed in 0u64..1000, alpha in -1.0f64..1.0, lam in 0.01f64..5.0) {
            let g = TimeGrid::new(1.0, 32).unwrap();
            let b = sample_bm_paths(Seed(seed), g, 8, 0.0, Exec::Sequential).unwrap();
            let f = exp_integral(&b, alpha, ExpFactor::One).unwrap();
            prop_assert!(f.integral.iter().all(|&v| v >= 0.0));
            prop_assert!(f.endpoint.iter().all(|&v| v > 0.0));
            let gam = gamma_functional(&b, alpha, lam).unwrap();
            for (gv, e) in gam.iter().zip(&f.endpoint) {
                prop_assert!(*gv > 0.0 && *gv <= *e);
            }
        }

        #[test]
        fn integral_nondecreasing_in_horizon(seed in 0u64..1000, alpha in -1.0f64..1.0) {
            let g = TimeGrid::new(1.0, 64).unwrap();
            let b = sample_bm_paths(Seed(seed), g, 4, 0.0, Exec::Sequential).unwrap();
            let half = TimeGrid::new(0.5, 32).unwrap();
            for p in b.paths() {
                let (full, _) = path_exp_functional(p, &g, alpha, 2.0).unwrap();
                let (part, _) = path_exp_functional(&p[..33], &half, alpha, 2.0).unwrap();
                prop_assert!(part <= full);
            }
        }
    }
}
