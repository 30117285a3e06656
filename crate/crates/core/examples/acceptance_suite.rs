// The acceptance suite on a reduced budget. The full budget is the
// default `AcceptanceConfig`; `hypb acceptance` runs it from the shell.
// Below about 10⁴ draws the broken-clock Bougerol control loses power
// and criterion 4 can go red; criterion 2 makes 144 unadjusted 3σ
// comparisons, so a single chance failure there is not unusual either.

use hypbessel::acceptance::{run_acceptance_with, AcceptanceConfig};
use hypbessel::Result;

pub fn run_example() -> Result<()> {
    let config = AcceptanceConfig { n: 10_000, steps_per_unit: 128, determinism_n: 500, ..Default::default() };
    let report = run_acceptance_with(&config, |c, took| println!("{}  [{:.1}s]", c.summary(), took.as_secs_f64()))?;
    println!("failed: {:?}", report.failed());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
