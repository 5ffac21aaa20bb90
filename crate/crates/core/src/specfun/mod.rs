//! Modified Bessel functions, the radial profile `h` and the dispersion
//! function `σ` whose zero is the bifurcation radius `λ*(n)`.
//!
//! `σ` is available along two independent routes: the Bessel ratio
//! `I_{ν+1}/I_ν` (with `ν = (n - 2)/2`, or `tanh` for `n = 1`) and direct
//! integration of the initial value problem for `h`. The routes share no code.

mod bessel;
mod dispersion;
mod profile;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_ratio};
pub use dispersion::{
    dispersion_sample, find_lambda_star, sigma, sigma_ode, sigma_prime, sigma_prime_ode,
    DispersionSample,
};
pub use profile::{profile_h, profile_log_ratio, profile_log_ratio_many, Profile};

use crate::{Error, Result};

/// Order `ν = (n - 2)/2` of the Bessel function attached to dimension `n ≥ 2`.
pub fn bessel_order(n: u32) -> f64 {
    (n as f64 - 2.0) / 2.0
}

pub(crate) fn check_dimension(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("space dimension n must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn check_argument(rho: f64) -> Result<()> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("argument must be finite and >= 0, got {rho}")));
    }
    Ok(())
}
