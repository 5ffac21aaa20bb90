//! The dispersion function `σ(ρ) = (ρ h'(ρ)/h(ρ) - 1) / n`, its derivative,
//! and the bifurcation radius `λ*(n)`, the unique positive zero of `σ`.

use serde::{Deserialize, Serialize};

use super::bessel::bessel_ratio;
use super::profile::profile_log_ratio;
use super::{bessel_order, check_argument, check_dimension};
use crate::{Error, Result};

/// `σ` and `σ'` at one argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub n: u32,
    pub rho: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
}

pub fn dispersion_sample(n: u32, rho: f64) -> Result<DispersionSample> {
    Ok(DispersionSample {
        n,
        rho,
        sigma: sigma(n, rho)?,
        sigma_prime: if rho == 0.0 { 0.0 } else { sigma_prime(n, rho)? },
    })
}

/// `h'/h` through the closed forms: `tanh ρ` for `n = 1`, `I_{ν+1}/I_ν` otherwise.
fn log_derivative(n: u32, rho: f64) -> Result<f64> {
    check_dimension(n)?;
    check_argument(rho)?;
    if n == 1 {
        Ok(rho.tanh())
    } else {
        bessel_ratio(bessel_order(n), rho)
    }
}

/// `σ(ρ)` via the Bessel (or hyperbolic) closed form. `σ(0) = -1/n`.
pub fn sigma(n: u32, rho: f64) -> Result<f64> {
    let y = log_derivative(n, rho)?;
    Ok((rho * y - 1.0) / n as f64)
}

/// `σ(ρ)` via numerical integration of the profile ODE.
pub fn sigma_ode(n: u32, rho: f64) -> Result<f64> {
    let p = profile_log_ratio(n, rho)?;
    Ok((rho * p.ratio - 1.0) / n as f64)
}

/// `n h² σ' = (2 - n) h' h + ρ (h² - h'²)`, divided through by `h²`.
fn sigma_prime_from_ratio(n: u32, rho: f64, y: f64) -> f64 {
    ((2.0 - n as f64) * y + rho * (1.0 - y) * (1.0 + y)) / n as f64
}

/// `σ'(ρ)` for `ρ > 0`.
pub fn sigma_prime(n: u32, rho: f64) -> Result<f64> {
    if rho <= 0.0 {
        return Err(Error::Domain(format!("sigma_prime needs rho > 0, got {rho}")));
    }
    let y = log_derivative(n, rho)?;
    Ok(sigma_prime_from_ratio(n, rho, y))
}

/// `σ'(ρ)` from the integrated profile.
pub fn sigma_prime_ode(n: u32, rho: f64) -> Result<f64> {
    if rho <= 0.0 {
        return Err(Error::Domain(format!("sigma_prime needs rho > 0, got {rho}")));
    }
    let p = profile_log_ratio(n, rho)?;
    Ok(sigma_prime_from_ratio(n, rho, p.ratio))
}

/// Width below which bisection hands over to Newton.
const BISECTION_WIDTH: f64 = 1e-2;

/// The unique zero of `σ` on `(0, ∞)`.
///
/// `σ(0) = -1/n < 0` and `σ(ρ)/ρ → 1/n`, so doubling from `ρ = 1` always
/// brackets the root. Bisection narrows the bracket, then Newton with `σ'`
/// finishes; any Newton iterate leaving the bracket is replaced by the
/// midpoint.
pub fn find_lambda_star(n: u32) -> Result<f64> {
    check_dimension(n)?;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while sigma(n, hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if sigma(n, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = sigma(n, x)?;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = f / sigma_prime(n, x)?;
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
