//! Independent numerical checks: adaptive quadrature of every integral that
//! has a closed form elsewhere in the crate, and brute-force minimisers for
//! the optimality conditions.

pub mod entropy;
pub mod minimize;
pub mod quad;

pub use entropy::{
    central_moment_1d, entropy_quad_1d, entropy_quad_2d, m_rel_entropy_quad, m_rel_entropy_quad_form, mass_2d,
    RelEntropyForm,
};
pub use minimize::{minimize_kh_grid, minimize_theta, pythagorean_defect, GridConfig, KhMinimum, PythagoreanCheck, ThetaMinimum};
pub use quad::{integrate_1d, integrate_2d, integrate_axis, Axis, Integral, QuadratureConfig, Truncation};
