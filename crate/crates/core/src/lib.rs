//! Numerics for Serrin's overdetermined problem on periodic domains
//! `Ω_φ = {(z, t) ∈ ℝⁿ × ℝᵐ : |z| < φ(t)}`.
//!
//! The crate is organized bottom-up:
//!
//! * [`specfun`]: modified Bessel functions, the radial profile `h`, the
//!   dispersion function `σ` and the bifurcation radius `λ*(n)`.
//! * [`modes`]: permutation-symmetric cosine polynomials on the torus and the
//!   diagonal linearized Neumann operator `ℋ_λ`.
//! * [`forward`]: spectral Dirichlet solver on the fixed cylinder and the
//!   nonlinear Neumann-trace operator `H(φ)`.
//! * [`branch`]: Newton continuation of the bifurcating branch `s ↦ (λ_s, μ_s)`.
//! * [`geometry`]: volume, relative perimeter, Cheeger ratio and the
//!   P-function gradient bound.
//!
//! Data-parallel loops go through [`exec::Execution`]; with the `parallel`
//! feature disabled every policy runs sequentially.

pub mod branch;
mod error;
pub mod exec;
pub mod forward;
pub mod geometry;
pub mod modes;
pub mod specfun;

pub use error::{Error, Result};
pub use exec::Execution;
