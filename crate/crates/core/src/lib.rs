//! Porous medium flow on the q-Gaussian family.
//!
//! The porous medium equation `∂ₜρ = Δρ^{2−q}` maps q-Gaussians to
//! q-Gaussians, and on that family every object of its Wasserstein
//! gradient-flow structure has a closed form. This crate provides:
//!
//! - [`qmath`]: the deformed exponential/logarithm pair and all normalising
//!   constants (`C₀`, `C₁`, `α`, `A`, `B`, `C`) packed into [`QParams`].
//! - [`qgaussian`]: 1D q-Gaussians, bivariate m-Gaussians, and closed-form
//!   m-entropy differences and m-relative entropies.
//! - [`pme_flow`]: the exact semigroup, the Barenblatt profile and a
//!   finite-difference PDE residual.
//! - [`functionals`]: `W₂²`, the Tsallis entropy difference, the JKO
//!   functional `K_h`, the rate-like functional `J_h`, the expansion
//!   coefficients `a`, `b` and the rescaled functionals whose `h → 0` limits
//!   are studied.
//! - [`oracle`]: adaptive quadrature and brute-force minimisers that recompute
//!   the closed forms along independent routes.
//!
//! Everything is pure and works on immutable values.

pub mod error;
pub mod functionals;
pub mod oracle;
pub mod pme_flow;
pub mod qgaussian;
pub mod qmath;
pub mod roots;
pub mod special;

pub use error::{Error, Result};
pub use qgaussian::{MBivariate, QGaussian1D, SupportInterval};
pub use qmath::{make_params, q_exp, q_log, QParams};
