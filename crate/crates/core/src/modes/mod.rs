//! Permutation-symmetric cosine polynomials on the torus `Tᵐ` and the
//! linearized Neumann operator `ℋ_λ`, which is diagonal on them.

mod multi_index;
mod operator;
mod trig_poly;

pub use multi_index::{ModeBasis, MultiIndex};
pub use operator::{
    apply_h_lambda, eigenvalue, radial_mode_solve, solve_h_lambda_shifted, RadialModeSolution,
    DEGENERACY_THRESHOLD, RANGE_TOLERANCE,
};
pub use trig_poly::{PointValue, SymmetricTrigPolynomial};

/// Default truncation degree (max-norm cutoff) of the cosine basis.
pub const DEFAULT_DEGREE: u32 = 8;
