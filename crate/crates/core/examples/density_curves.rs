// Densities of `cosh R_t` and `R_t` for a process started at 0, written
// as CSV with JSON metadata under the system temp directory.

use hypbessel::densities::{cosh_bm_curve, g_curve, geometric_z_grid, ZeroLawSample};
use hypbessel::paths::TimeGrid;
use hypbessel::specfun::{QuadratureRule, DEFAULT_GH_NODES};
use hypbessel::{Exec, Result, Seed};

const N: usize = 20_000;

pub fn run_example() -> Result<()> {
    let t = 1.0;
    let zs = geometric_z_grid(1e-3, 9.0, 12)?;
    let grid = TimeGrid::with_resolution(0.25 * t, 256)?;

    // α = 0 two ways: the mixture over A_{t/4} and the derivative of G
    let law = ZeroLawSample::draw(0.0, t, &grid, Seed(1), N, Exec::Sequential)?;
    let mixture = law.cosh_curve(&zs, Exec::Sequential)?;
    let g = g_curve(t, &zs, &QuadratureRule::gauss_hermite(DEFAULT_GH_NODES)?, Exec::Sequential)?;
    println!("{:>10} {:>12} {:>10} {:>12}", "z", "mixture", "stderr", "G route");
    for (m, g) in mixture.points.iter().zip(&g.points) {
        println!("{:>10.4} {:>12.6} {:>10.1e} {:>12.6}", m.z, m.value, m.stderr, g.value);
    }
    let upper = law.truncation()?;
    println!("normalization on [1, {upper:.2}]: {:.5}", law.normalization(upper)?);

    // α = −1/2 is Brownian motion, whose cosh has a closed-form density
    let bm = ZeroLawSample::draw(-0.5, t, &grid, Seed(2), N, Exec::Sequential)?;
    let exact = cosh_bm_curve(t, &zs)?;
    let est = bm.cosh_curve(&zs, Exec::Sequential)?;
    let worst = est
        .points
        .iter()
        .zip(&exact.points)
        .map(|(e, x)| (e.value - x.value).abs() / e.stderr)
        .fold(0.0, f64::max);
    println!("α = −1/2 against cosh(B_t): worst deviation {worst:.2} stderr");

    let r = ZeroLawSample::draw(1.0, t, &grid, Seed(3), N, Exec::Sequential)?;
    let r_curve = r.r_curve(&[0.25, 0.5, 1.0, 2.0, 3.0], Exec::Sequential)?;
    for p in &r_curve.points {
        println!("α = 1: density of R_1 at {:.2} is {:.5}", p.z, p.value);
    }

    let dir = std::env::temp_dir().join("hypb-density-curves");
    std::fs::create_dir_all(&dir)?;
    for (curve, stem) in [(&mixture, "mixture"), (&g, "g-route"), (&r_curve, "r-alpha1")] {
        let (csv, _) = curve.write_files(&dir, stem)?;
        println!("wrote {}", csv.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
