//! Special functions and the auxiliary kernels used by the representations.
//! Everything here is a pure function of its arguments.

mod besq;
mod bessel;
mod kernels;
mod quadrature;
mod selfcheck;

pub use besq::{besq_cdf, besq_density};
pub use bessel::{bessel_i, bessel_i_scaled, bessel_j0, I_CROSSOVER, J0_CROSSOVER};
pub use kernels::{g_function, phi_kernel, varphi, G_TOLERANCE};
pub(crate) use kernels::g_function_on;
pub use selfcheck::{i_integral, j0_integral, self_check, GridCheck};
pub use quadrature::{integrate, integrate_to_inf, integrate_with, QuadratureRule, RuleKind, DEFAULT_GH_NODES};

pub use statrs::function::gamma::{gamma, ln_gamma};
