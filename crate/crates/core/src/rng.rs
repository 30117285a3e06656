//! Per-path random streams.
//!
//! Every Monte Carlo path draws from its own ChaCha8 stream, keyed by a
//! master [`Seed`] and the path index. A path therefore sees the same numbers
//! whether batches are generated sequentially or spread over a thread pool,
//! and whatever the order in which workers pick up paths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Master seed of an experiment or of one sampler inside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Independent child seed for a sub-computation (e.g. the `W` noise
    /// of an SDE whose coefficient process `Y` uses the parent seed).
    pub fn derive(self, domain: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(domain.wrapping_add(0x5851_f42d_4c95_7f2d))))
    }

    /// Random stream of path `index`.
    pub fn path_rng(self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index as u64);
        rng
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Stateless 64-bit mixer (Steele, Lea & Flood).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// How per-path work is scheduled. Results never depend on the choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    #[default]
    Sequential,
    Parallel,
}

impl Exec {
    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// Fallible variant of [`Exec::map`]; the first error in index order wins.
    pub fn try_map<T, F>(self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }

    /// Like [`Exec::try_map`] but hands every call a scratch buffer that is
    /// reused across indices handled by the same worker.
    pub fn try_map_with<T, F>(self, n: usize, scratch_len: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &mut Vec<f64>) -> Result<T> + Sync + Send,
    {
        let out: Vec<Result<T>> = match self {
            Exec::Sequential => {
                let mut buf = vec![0.0; scratch_len];
                (0..n).map(|i| f(i, &mut buf)).collect()
            }
            Exec::Parallel => (0..n)
                .into_par_iter()
                .map_init(|| vec![0.0; scratch_len], |buf, i| f(i, buf))
                .collect(),
        };
        out.into_iter().collect()
    }
}
