// Bougerol's identity `sinh(B_t) = W_{A_t}` in law, its shifted form and
// its characteristic-function version, plus a broken variant that the
// test must reject.

use hypbessel::identities::{check_bougerol, check_bougerol_general, check_charfn, CheckConfig, Control, IdentityVerdict, SeedPair};
use hypbessel::{Exec, Result, Seed};

fn show(v: &IdentityVerdict) {
    println!("{:<40} {:.4} / {:.4}  {}", v.name, v.statistic, v.threshold, if v.pass { "pass" } else { "reject" });
}

pub fn run_example() -> Result<()> {
    let cfg = CheckConfig { n: 20_000, steps_per_unit: 256, exec: Exec::Sequential };
    let seeds = SeedPair::split(Seed(7));
    show(&check_bougerol(1.0, Control::None, seeds, &cfg)?);
    show(&check_bougerol_general(1.0, 0.5, Control::None, seeds, &cfg)?);
    show(&check_charfn(0.5, 1.0, 1.0, seeds, &cfg)?);
    show(&check_bougerol(1.0, Control::ClockIsTime, seeds, &cfg)?);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
