use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trig_poly::SymmetricTrigPolynomial;
use crate::specfun::{profile_log_ratio_many, sigma};
use crate::{Error, Result};

/// Largest coefficient allowed on the excluded shell in
/// [`solve_h_lambda_shifted`].
pub const RANGE_TOLERANCE: f64 = 1e-12;

/// Smallest admissible `|σ(λ|k|) - σ(λ ℓ₀)|` divisor.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be finite and > 0, got {lambda}")));
    }
    Ok(())
}

/// Eigenvalue `σ(λ ℓ)` of `ℋ_λ` on the shell `|k| = ℓ`.
pub fn eigenvalue(n: u32, lambda: f64, ell: f64) -> Result<f64> {
    check_lambda(lambda)?;
    sigma(n, lambda * ell)
}

/// `σ(λ|k|)` for every shell present in `v`, keyed by `|k|²`.
fn shell_eigenvalues(n: u32, lambda: f64, v: &SymmetricTrigPolynomial) -> Result<BTreeMap<u32, f64>> {
    let mut table = BTreeMap::new();
    for k in v.basis().indices() {
        let ell2 = k.ell2();
        if let std::collections::btree_map::Entry::Vacant(e) = table.entry(ell2) {
            e.insert(eigenvalue(n, lambda, (ell2 as f64).sqrt())?);
        }
    }
    Ok(table)
}

/// `ℋ_λ v = Σ_k σ(λ|k|) c_k ω_k`.
pub fn apply_h_lambda(n: u32, lambda: f64, v: &SymmetricTrigPolynomial) -> Result<SymmetricTrigPolynomial> {
    let table = shell_eigenvalues(n, lambda, v)?;
    let mut out = v.clone();
    for (c, k) in out.coeffs_mut().iter_mut().zip(v.basis().indices()) {
        *c *= table[&k.ell2()];
    }
    Ok(out)
}

/// Solves `(ℋ_λ - σ(λ ℓ₀)) w = rhs` with `w` vanishing on the shell
/// `|k| = ℓ₀`. `rhs` must vanish there too.
pub fn solve_h_lambda_shifted(
    n: u32,
    lambda: f64,
    ell0: u32,
    rhs: &SymmetricTrigPolynomial,
) -> Result<SymmetricTrigPolynomial> {
    let excluded = ell0 * ell0;
    let shift = eigenvalue(n, lambda, ell0 as f64)?;
    let table = shell_eigenvalues(n, lambda, rhs)?;
    let on_shell = rhs.shell_magnitude(excluded);
    if on_shell > RANGE_TOLERANCE {
        return Err(Error::NotInRange {
            shell: ell0,
            magnitude: on_shell,
        });
    }
    let mut out = rhs.clone();
    for (c, k) in out.coeffs_mut().iter_mut().zip(rhs.basis().indices()) {
        if k.ell2() == excluded {
            *c = 0.0;
            continue;
        }
        let divisor = table[&k.ell2()] - shift;
        if divisor.abs() < DEGENERACY_THRESHOLD {
            return Err(Error::NearDegenerate {
                index: k.entries().to_vec(),
                divisor,
            });
        }
        *c /= divisor;
    }
    Ok(out)
}

/// Solution of `b'' + (n-1)/r b' - λ²ℓ² b = 0` on `[0, 1]` with
/// `b'(0) = 0`, `b(1) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialModeSolution {
    pub n: u32,
    pub lambda: f64,
    pub ell: f64,
    pub b_prime_at_1: f64,
    /// `(r, b(r))` on a uniform grid, if requested.
    pub profile: Option<Vec<(f64, f64)>>,
}

impl RadialModeSolution {
    /// `(b'(1) - 1)/n`, which equals `σ(λ ℓ)`.
    pub fn dispersion(&self) -> f64 {
        (self.b_prime_at_1 - 1.0) / self.n as f64
    }
}

/// Rescales to the profile problem: `b(r) = h(ρ₀ r)/h(ρ₀)` with `ρ₀ = λℓ`.
/// `profile_points > 1` also samples `b` at that many uniform radii.
pub fn radial_mode_solve(n: u32, lambda: f64, ell: f64, profile_points: usize) -> Result<RadialModeSolution> {
    check_lambda(lambda)?;
    if !(ell >= 0.0) || !ell.is_finite() {
        return Err(Error::Domain(format!("ell must be finite and >= 0, got {ell}")));
    }
    let rho0 = lambda * ell;
    let radii: Vec<f64> = if profile_points > 1 {
        (0..profile_points)
            .map(|i| i as f64 / (profile_points - 1) as f64)
            .collect()
    } else {
        Vec::new()
    };
    let mut points: Vec<f64> = radii.iter().map(|r| rho0 * r).collect();
    points.push(rho0);
    let profiles = profile_log_ratio_many(n, &points)?;
    let end = profiles[profiles.len() - 1];
    let profile = (profile_points > 1).then(|| {
        radii
            .iter()
            .zip(&profiles)
            .map(|(&r, p)| (r, (p.log_h - end.log_h).exp()))
            .collect()
    });
    Ok(RadialModeSolution {
        n,
        lambda,
        ell,
        b_prime_at_1: rho0 * end.ratio,
        profile,
    })
}
