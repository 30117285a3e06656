// Sample paths of R and of the processes that represent it.
//
// ```text
// cargo run --release --example simulate_paths
// ```

use hypbessel::paths::TimeGrid;
use hypbessel::sde::{r_terminal, sample_besq_exact, simulate_r, simulate_xi, theta_terminal};
use hypbessel::stats::{ks_two_sample, mc_reduce};
use hypbessel::{BesqSpec, Exec, ProcessSpec, Result, Seed};

const N: usize = 20_000;

pub fn run_example() -> Result<()> {
    let spec = ProcessSpec::new(1.0, 0.5)?;
    let grid = TimeGrid::with_resolution(0.5, 256)?;

    let batch = simulate_r(&spec, grid, Seed(1), 4, Exec::Sequential)?;
    println!("four paths of R, α = 1, from 0.5:");
    for p in batch.paths() {
        println!("  R_0 = {:.3}  R_0.25 = {:.3}  R_0.5 = {:.3}", p[0], p[64], p[128]);
    }

    // R = arcosh θ with θ from its own SDE
    let r = r_terminal(&spec, &grid, Seed(2), N, Exec::Sequential)?;
    let (theta, clamps) = theta_terminal(spec.alpha, spec.x0.cosh(), &grid, Seed(3), N, Exec::Sequential)?;
    let from_theta: Vec<f64> = theta.iter().map(|t| t.acosh()).collect();
    let ks = ks_two_sample(&r, &from_theta)?;
    println!("R_t vs arcosh θ_t: D = {:.4} (threshold {:.4}), clamped steps {:.2e}", ks.statistic, ks.threshold, clamps.fraction());

    let xi = simulate_xi(0.0, grid, Seed(4), 1_000, Exec::Sequential)?;
    println!("mean ξ_0.5 from 0: {:.4}", mc_reduce(&xi.terminal())?.mean);

    // E X_t = x0 + δt for a squared Bessel process
    let besq = BesqSpec::from_dimension(3.0, 1.0)?;
    let x = mc_reduce(&sample_besq_exact(&besq, 2.0, Seed(5), N, Exec::Sequential)?)?;
    println!("BESQ(3) from 1 at t = 2: mean {:.4} ± {:.4}, exact 7", x.mean, x.stderr);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
