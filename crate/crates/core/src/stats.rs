//! Monte Carlo reduction, empirical CDFs and the fixed-level gates used to
//! decide whether two laws agree.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{param, Result};

/// Significance level of every distributional gate.
pub const GATE_LEVEL: f64 = 1e-3;

/// Width, in combined standard errors, of every estimate-vs-estimate gate.
pub const STDERR_GATE: f64 = 3.0;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MCEstimate {
    /// A deterministic value carried through the same interfaces as MC output.
    pub fn exact(value: f64) -> Self {
        MCEstimate { mean: value, stderr: 0.0, n: 0 }
    }

    /// Distance to `other` in units of the combined standard error.
    pub fn z_score(&self, other: &MCEstimate) -> f64 {
        z_score(self.mean - other.mean, self.stderr.hypot(other.stderr))
    }

    /// `|self − other| ≤ k·√(se₁² + se₂²)`.
    pub fn agrees_with(&self, other: &MCEstimate, k: f64) -> bool {
        self.z_score(other) <= k
    }

    pub fn scale(&self, c: f64) -> MCEstimate {
        MCEstimate { mean: self.mean * c, stderr: self.stderr * c.abs(), n: self.n }
    }
}

fn z_score(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        diff.abs() / se
    }
}

/// Mean and standard error `s/√n` with the unbiased sample deviation.
pub fn mc_reduce(values: &[f64]) -> Result<MCEstimate> {
    let n = values.len();
    if n < 2 {
        return param(format!("mc_reduce needs at least 2 values, got {n}"));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let stderr = (ss / (nf - 1.0)).sqrt() / nf.sqrt();
    Ok(MCEstimate { mean, stderr, n })
}

/// Right-continuous empirical distribution function.
#[derive(Clone, Debug)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return param("ECDF of an empty sample");
        }
        if sample.iter().any(|v| v.is_nan()) {
            return param("ECDF sample contains NaN");
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Empirical `P(X ≤ x)` as an estimate with binomial standard error.
    pub fn prob_le(&self, x: f64) -> MCEstimate {
        let n = self.sorted.len();
        let p = self.eval(x);
        MCEstimate { mean: p, stderr: (p * (1.0 - p) / n as f64).sqrt(), n }
    }
}

/// Asymptotic Kolmogorov quantile `c(α) = √(−ln(α/2)/2)`.
pub fn kolmogorov_quantile(level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt()
}

/// Result of a two-sample Kolmogorov–Smirnov comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub threshold: f64,
    pub n_left: usize,
    pub n_right: usize,
}

impl KsResult {
    pub fn pass(&self) -> bool {
        self.statistic <= self.threshold
    }
}

/// Two-sample KS statistic `sup |F_a − F_b|` with the level-[`GATE_LEVEL`]
/// threshold `c(α)·√((n+m)/(nm))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let ea = Ecdf::new(a)?;
    let eb = Ecdf::new(b)?;
    Ok(ks_sorted(ea.sorted(), eb.sorted()))
}

pub(crate) fn ks_sorted(a: &[f64], b: &[f64]) -> KsResult {
    let (n, m) = (a.len(), b.len());
    let (nf, mf) = (n as f64, m as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / nf - j as f64 / mf).abs());
    }
    let threshold = kolmogorov_quantile(GATE_LEVEL) * ((nf + mf) / (nf * mf)).sqrt();
    KsResult { statistic: d, threshold, n_left: n, n_right: m }
}

/// One cell of a binned model: probability mass of `(lo, hi]` and its
/// standard error (zero when the model is exact).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBin {
    pub lo: f64,
    pub hi: f64,
    pub p: f64,
    pub se: f64,
}

/// Pearson goodness-of-fit outcome.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chi2Result {
    pub statistic: f64,
    pub dof: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// Pearson χ² test of `sample` against an exact density, with cells given
/// by `edges` plus one cell collecting everything outside `[edges₀, edges_k]`.
pub fn chi2_gof<F: Fn(f64) -> f64>(sample: &[f64], density: F, edges: &[f64]) -> Result<Chi2Result> {
    if edges.len() < 2 {
        return param("chi2_gof needs at least two bin edges");
    }
    let mut bins = Vec::with_capacity(edges.len());
    let mut inside = 0.0;
    for w in edges.windows(2) {
        let p = crate::specfun::integrate(&density, w[0], w[1], 1e-10)?.max(0.0);
        inside += p;
        bins.push(ModelBin { lo: w[0], hi: w[1], p, se: 0.0 });
    }
    bins.push(ModelBin {
        lo: f64::NAN,
        hi: f64::NAN,
        p: (1.0 - inside).max(0.0),
        se: 0.0,
    });
    chi2_gof_binned(sample, &bins)
}

/// χ² test against binned model probabilities that may themselves carry
/// Monte Carlo error. Each cell's variance is `n·p + n²·se²`. A bin whose
/// `lo`/`hi` are NaN is the complement of all other bins.
pub fn chi2_gof_binned(sample: &[f64], bins: &[ModelBin]) -> Result<Chi2Result> {
    let n = sample.len();
    if n == 0 {
        return param("chi2_gof on an empty sample");
    }
    let nf = n as f64;
    let ecdf = Ecdf::new(sample)?;
    let sorted = ecdf.sorted();
    let count_le = |x: f64| sorted.partition_point(|&v| v <= x) as f64;

    let mut cells: Vec<(f64, f64, f64)> = Vec::with_capacity(bins.len());
    let mut claimed = 0.0;
    let mut complement = None;
    for b in bins {
        if b.lo.is_nan() {
            complement = Some(*b);
            continue;
        }
        let observed = count_le(b.hi) - count_le(b.lo);
        claimed += observed;
        cells.push((observed, nf * b.p, (nf * b.se).powi(2)));
    }
    if let Some(b) = complement {
        cells.push((nf - claimed, nf * b.p, (nf * b.se).powi(2)));
    }

    // merge neighbours until every expected count reaches 5
    let mut merged: Vec<(f64, f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0, 0.0);
    for c in cells {
        acc = (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2);
        if acc.1 >= 5.0 {
            merged.push(acc);
            acc = (0.0, 0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match merged.last_mut() {
            Some(last) => *last = (last.0 + acc.0, last.1 + acc.1, last.2 + acc.2),
            None => merged.push(acc),
        }
    }
    if merged.len() < 2 {
        return param(format!(
            "chi2_gof needs at least two cells with expected count ≥ 5, got {}",
            merged.len()
        ));
    }
    let statistic: f64 = merged
        .iter()
        .map(|&(o, e, v)| {
            let var = e + v;
            if var > 0.0 {
                (o - e).powi(2) / var
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = merged.len() - 1;
    let threshold = ChiSquared::new(dof as f64)
        .map_err(|e| crate::Error::Parameter(e.to_string()))?
        .inverse_cdf(1.0 - GATE_LEVEL);
    Ok(Chi2Result { statistic, dof, threshold, pass: statistic <= threshold })
}
