// `E exp(−λ cosh R_T)` at an independent exponential time `T`, with both
// readings of the double-integral formula.

use hypbessel::densities::{exp_time_transform, ReconcileStatus};
use hypbessel::{Exec, ProcessSpec, Result, Seed};

pub fn run_example() -> Result<()> {
    let spec = ProcessSpec::new(0.0, 0.0)?;
    let r = exp_time_transform(1.0, 1.0, &spec, 128, Seed(3), 10_000, Exec::Sequential)?;
    println!("δ = 1, λ = 1: MC {:.5} ± {:.1e}", r.mc.mean, r.mc.stderr);
    for o in &r.readings {
        let tag = match o.status {
            ReconcileStatus::Reconciled => "agrees",
            ReconcileStatus::Unreconciled => "disagrees",
            ReconcileStatus::Unavailable => "unavailable",
        };
        println!("  {:?}: {:?} ({tag})", o.reading, o.value);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
