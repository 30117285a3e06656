// The joint Laplace transform of `(e^{B_t}, ∫e^{2B})` and its
// γ-derivatives, checked against direct simulation.

use hypbessel::laplace::{hbn_default_step, lt_hbn, lt_vector, vector_functional_mc};
use hypbessel::paths::TimeGrid;
use hypbessel::specfun::{QuadratureRule, DEFAULT_GH_NODES};
use hypbessel::{Exec, Result, Seed};

const N: usize = 20_000;

pub fn run_example() -> Result<()> {
    let rule = QuadratureRule::gauss_hermite(DEFAULT_GH_NODES)?;
    let (gamma, lambda, t) = (2.0, 1.0, 0.5);
    let grid = TimeGrid::with_resolution(t, 256)?;

    let exact = lt_vector(gamma, lambda, t, &rule)?;
    let mc = vector_functional_mc(gamma, lambda, 0.0, t, &grid, Seed(1), N, Exec::Sequential)?;
    println!("k = 0: quadrature {exact:.6}, MC {:.6} ± {:.1e}", mc.mean, mc.stderr);

    for k in 1..=3u32 {
        let h = hbn_default_step(gamma);
        let d = lt_hbn(k, gamma, lambda, t, h, &rule)?;
        let mc = vector_functional_mc(gamma, lambda, k as f64, t, &grid, Seed(1 + k as u64), N, Exec::Sequential)?;
        println!("k = {k}: derivative {d:.6}, MC with drift k {:.6} ± {:.1e}", mc.mean, mc.stderr);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
