//! The forward map `φ ↦ H(φ)`: solve `-Δu = 1` on `{|z| < φ(t)}` with
//! `u = 0` on the boundary and return the outward normal derivative along
//! the boundary as a function of `t`.
//!
//! Solutions are radial in `z`, so the problem is posed for `U(r, t)` on the
//! fixed cylinder `[0, 1] × Tᵐ` through `ρ = φ(t) r` and discretized by
//! Chebyshev collocation in `r` and Fourier collocation in `t`.

mod export;
mod grid;
mod operator;
mod solve;

pub use export::{export_solution, ExportDescriptor};
pub use grid::{CylinderGrid, GridSpec, TorusSymmetry};
pub use operator::{assemble_transformed_operator, check_positive, effective_degree, TransformedOperator};
pub use solve::{neumann_trace, residual_g, solve_dirichlet, CylinderSolution, ALIASING_LIMIT};
