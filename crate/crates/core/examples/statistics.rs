// Monte Carlo reduction, empirical CDFs and the fixed-level gates.

use hypbessel::paths::standard_normal;
use hypbessel::stats::{chi2_gof, ks_two_sample, mc_reduce, Ecdf};
use hypbessel::{Result, Seed};

pub fn run_example() -> Result<()> {
    let draw = |seed: u64, shift: f64| -> Vec<f64> {
        (0..20_000).map(|i| shift + standard_normal(&mut Seed(seed).path_rng(i))).collect()
    };
    let (a, b, c) = (draw(1, 0.0), draw(2, 0.0), draw(3, 0.1));

    let m = mc_reduce(&a)?;
    println!("mean {:.4} ± {:.4}", m.mean, m.stderr);
    let p = Ecdf::new(&a)?.prob_le(1.0);
    println!("P(Z ≤ 1) ≈ {:.4} ± {:.4} (exact 0.8413)", p.mean, p.stderr);

    let same = ks_two_sample(&a, &b)?;
    let shifted = ks_two_sample(&a, &c)?;
    println!("KS same law: {:.4} / {:.4} pass = {}", same.statistic, same.threshold, same.pass());
    println!("KS shifted by 0.1: {:.4} / {:.4} pass = {}", shifted.statistic, shifted.threshold, shifted.pass());

    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let edges: Vec<f64> = (0..=16).map(|i| -4.0 + 0.5 * i as f64).collect();
    let chi = chi2_gof(&a, phi, &edges)?;
    println!("χ² = {:.2} on {} dof, threshold {:.2}, pass = {}", chi.statistic, chi.dof, chi.threshold, chi.pass);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
