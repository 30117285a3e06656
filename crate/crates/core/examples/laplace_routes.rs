// `E exp(−λ cosh R_t)` by every route, including the deterministic
// Brownian reference at α = −1/2.

use hypbessel::densities::conditional_laplace;
use hypbessel::laplace::{evaluate, lt_alpha_minus1, LtMethod, LtQuery, McConfig};
use hypbessel::paths::TimeGrid;
use hypbessel::{Exec, Result, Seed};

const N: usize = 20_000;

pub fn run_example() -> Result<()> {
    for alpha in [-0.5, 0.0, 1.0] {
        let q = LtQuery::new(alpha, 1.0, 0.5, 1.0)?;
        println!("α = {alpha}, x = 1, t = 0.5, λ = 1");
        let mut methods = LtMethod::MONTE_CARLO.to_vec();
        if alpha == -0.5 {
            methods.push(LtMethod::Quadrature);
        }
        for (i, m) in methods.into_iter().enumerate() {
            let mc = McConfig { n: N, steps_per_unit: 256, seed: Seed(10 + i as u64), exec: Exec::Sequential };
            let r = evaluate(&q, m, &mc)?;
            println!("  {:>10}: {:.6} ± {:.1e}", m, r.mean, r.stderr);
        }
    }

    let grid = TimeGrid::with_resolution(1.0, 256)?;
    let e = lt_alpha_minus1(0.5, 1.0, 1.0, &grid, Seed(20), N, Exec::Sequential)?;
    println!("index −1, x = 0.5, t = 1, λ = 1: {:.6} ± {:.1e}", e.mean, e.stderr);

    // the Bessel-J0 kernel behind the j0 route, conditional on B_t = x
    for x in [-1.0, 0.0, 1.0] {
        println!("E(exp(−½∫e^{{2B}}) | B_1 = {x}) = {:.6}", conditional_laplace(x, 1.0, 1.0, 1e-10)?);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
