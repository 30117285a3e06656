// Two identities for `A_t = ∫₀ᵗ e^{2B_u}du`: a closed-form expectation and
// the moments `E A_t^λ` through a Gaussian expectation.

use hypbessel::densities::{corollary_a_identity, moment_a};
use hypbessel::paths::TimeGrid;
use hypbessel::{Exec, Result, Seed};

const N: usize = 20_000;

pub fn run_example() -> Result<()> {
    for (z, t) in [(1.0, 1.0), (2.0, 0.5)] {
        let grid = TimeGrid::with_resolution(t, 256)?;
        let (mc, exact) = corollary_a_identity(z, t, &grid, Seed(1), N, Exec::Sequential)?;
        println!("E[A^(-1/2) e^(-(cosh z - 1)/4A)], z = {z}, t = {t}: {:.5} ± {:.1e}, closed form {exact:.5}", mc.mean, mc.stderr);
    }
    for lambda in [0.5, 1.0, 2.0] {
        let t = 1.0;
        let grid = TimeGrid::with_resolution(t, 256)?;
        let (a, g) = moment_a(lambda, t, &grid, Seed(2), N, Exec::Sequential)?;
        println!("E A_1^{lambda}: {:.4} ± {:.1e} vs Gaussian side {:.4} ± {:.1e}", a.mean, a.stderr, g.mean, g.stderr);
    }
    println!("(E A_1 = (e² − 1)/2 = {:.4})", 0.5 * 2f64.exp_m1());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
