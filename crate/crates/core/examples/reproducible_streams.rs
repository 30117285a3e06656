// Seeds, derived seeds and schedule-independent results.

use hypbessel::laplace::{evaluate, LtMethod, LtQuery, McConfig};
use hypbessel::{Exec, Result, Seed};

pub fn run_example() -> Result<()> {
    let seed = Seed(42);
    println!("seed {seed} derives {} and {}", seed.derive(0), seed.derive(1));

    let q = LtQuery::new(0.0, 1.0, 1.0, 1.0)?;
    let run = |exec| evaluate(&q, LtMethod::Gbm, &McConfig { n: 5_000, steps_per_unit: 128, seed, exec });
    let (a, b) = (run(Exec::Sequential)?, run(Exec::Parallel)?);
    println!("sequential {:.15}\nparallel   {:.15}", a.mean, b.mean);
    assert_eq!(a, b);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
