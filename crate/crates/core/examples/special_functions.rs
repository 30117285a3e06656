// Bessel functions, the auxiliary kernels and the squared-Bessel law.

use hypbessel::specfun::{
    besq_cdf, besq_density, bessel_i, bessel_i_scaled, bessel_j0, g_function, integrate_to_inf, phi_kernel, self_check,
    varphi, QuadratureRule, DEFAULT_GH_NODES,
};
use hypbessel::{BesqSpec, Result};

pub fn run_example() -> Result<()> {
    for x in [0.0, 1.0, 2.404_825_557_695_773, 20.0] {
        println!("J0({x}) = {:+.12}", bessel_j0(x));
    }
    println!("I_2.5(3) = {:.12}, e^(-500) I_0(500) = {:.12}", bessel_i(2.5, 3.0)?, bessel_i_scaled(0.0, 500.0)?);
    println!("φ(0.5, 1) = {:.10}, varphi_y(z) at (1, 0.5) = {:.10}", phi_kernel(0.5, 1.0)?, varphi(1.0, 0.5));

    let rule = QuadratureRule::gauss_hermite(DEFAULT_GH_NODES)?;
    println!("G_0.25(y) = E exp(−y/A): {:?}", [0.0, 0.5, 2.0].map(|y| g_function(0.25, y, &rule).map(|g| (g * 1e8).round() / 1e8)));

    let spec = BesqSpec::new(0.5, 1.0)?;
    let mass = integrate_to_inf(&|y| besq_density(&spec, 1.0, y).unwrap_or(f64::NAN), 0.0, 1e-10)?;
    println!("BESQ density mass {mass:.10}, P(X_1 ≤ 2) = {:.8}", besq_cdf(&spec, 1.0, 2.0)?);

    for c in self_check()? {
        println!("{:<45} max error {:.2e} (tolerance {:.0e})", c.name, c.max_error, c.tolerance);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
