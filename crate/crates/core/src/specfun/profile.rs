//! The radial profile `h` solving `h'' + (n-1)/ρ h' - h = 0`, `h(0) = 1`,
//! `h'(0) = 0`, obtained by numerical integration.
//!
//! `h` grows like `e^ρ`, so the integrator carries `(ln h, y)` with
//! `y = h'/h` instead of `(h, h')`:
//!
//! ```text
//! (ln h)' = y,     y' = 1 - y² - (n - 1) y / ρ.
//! ```
//!
//! The regular singular point at `ρ = 0` is stepped over with the even power
//! series of `h` up to `ρ = δ`.

use super::{check_argument, check_dimension};
use crate::Result;

/// End of the power-series start.
const SERIES_START: f64 = 1e-3;
const RTOL: f64 = 1e-14;
const ATOL: f64 = 1e-16;

/// `h` at one point, stored in overflow-free form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    pub rho: f64,
    pub log_h: f64,
    /// `h'(ρ) / h(ρ)`.
    pub ratio: f64,
}

impl Profile {
    pub fn h(&self) -> f64 {
        self.log_h.exp()
    }

    pub fn h_prime(&self) -> f64 {
        self.ratio * self.h()
    }
}

/// `(h(ρ), h'(ρ))`. Overflows to infinity past `ρ ≈ 700`; use
/// [`profile_log_ratio`] there.
pub fn profile_h(n: u32, rho: f64) -> Result<(f64, f64)> {
    let p = profile_log_ratio(n, rho)?;
    Ok((p.h(), p.h_prime()))
}

pub fn profile_log_ratio(n: u32, rho: f64) -> Result<Profile> {
    Ok(profile_log_ratio_many(n, &[rho])?[0])
}

/// Evaluates the profile at every requested point with a single sweep of the
/// integrator. Output order matches input order.
pub fn profile_log_ratio_many(n: u32, rhos: &[f64]) -> Result<Vec<Profile>> {
    check_dimension(n)?;
    for &rho in rhos {
        check_argument(rho)?;
    }
    let mut order: Vec<usize> = (0..rhos.len()).collect();
    order.sort_by(|&a, &b| rhos[a].total_cmp(&rhos[b]));

    let mut out = vec![
        Profile {
            rho: 0.0,
            log_h: 0.0,
            ratio: 0.0
        };
        rhos.len()
    ];
    let mut stepper = Stepper::new(n);
    for idx in order {
        let rho = rhos[idx];
        out[idx] = if rho <= SERIES_START {
            series_profile(n, rho)
        } else {
            stepper.advance_to(rho)
        };
    }
    Ok(out)
}

fn series_profile(n: u32, rho: f64) -> Profile {
    // h = Σ a_i ρ^{2i}, a_i = a_{i-1} / (2i (2i + n - 2)).
    let x = rho * rho;
    let mut a = 1.0;
    let mut power = 1.0;
    let mut h = 1.0;
    let mut hp_over_rho = 0.0;
    for i in 1..12 {
        let two_i = 2.0 * i as f64;
        a /= two_i * (two_i + n as f64 - 2.0);
        hp_over_rho += two_i * a * power;
        power *= x;
        h += a * power;
    }
    Profile {
        rho,
        log_h: h.ln(),
        ratio: rho * hp_over_rho / h,
    }
}

fn rhs(n: u32, rho: f64, y: [f64; 2]) -> [f64; 2] {
    let ratio = y[1];
    [ratio, 1.0 - ratio * ratio - (n as f64 - 1.0) * ratio / rho]
}

/// Adaptive Dormand–Prince 5(4) integrator for the `(ln h, y)` system.
struct Stepper {
    n: u32,
    rho: f64,
    state: [f64; 2],
    step: f64,
}

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Stepper {
    fn new(n: u32) -> Self {
        let start = series_profile(n, SERIES_START);
        Stepper {
            n,
            rho: SERIES_START,
            state: [start.log_h, start.ratio],
            step: 1e-4,
        }
    }

    fn advance_to(&mut self, target: f64) -> Profile {
        while self.rho < target {
            let remaining = target - self.rho;
            let landing = self.step >= remaining;
            let h = if landing { remaining } else { self.step };
            let (next, err) = self.trial(h);
            if err <= 1.0 {
                self.rho = if landing { target } else { self.rho + h };
                self.state = next;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // Do not let a short landing step shrink the cruising step size.
            if !(landing && err <= 1.0) || factor < 1.0 {
                self.step = h * factor;
            }
        }
        Profile {
            rho: self.rho,
            log_h: self.state[0],
            ratio: self.state[1],
        }
    }

    fn trial(&self, h: f64) -> ([f64; 2], f64) {
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut y = self.state;
            for (j, kj) in k.iter().enumerate().take(s) {
                y[0] += h * A[s][j] * kj[0];
                y[1] += h * A[s][j] * kj[1];
            }
            k[s] = rhs(self.n, self.rho + C[s] * h, y);
        }
        let mut next = self.state;
        let mut delta = [0.0; 2];
        for s in 0..6 {
            next[0] += h * A[6][s] * k[s][0];
            next[1] += h * A[6][s] * k[s][1];
        }
        for s in 0..7 {
            delta[0] += h * E[s] * k[s][0];
            delta[1] += h * E[s] * k[s][1];
        }
        let mut err: f64 = 0.0;
        for c in 0..2 {
            let scale = ATOL + RTOL * self.state[c].abs().max(next[c].abs());
            err = err.max(delta[c].abs() / scale);
        }
        (next, err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        for n in 1..6 {
            assert_eq!(profile_h(n, 0.0).unwrap(), (1.0, 0.0));
        }
    }

    #[test]
    fn n1_is_cosh() {
        for &rho in &[1e-4, 0.5, 1.0, 3.0, 12.0] {
            let (h, hp) = profile_h(1, rho).unwrap();
            assert!(((h - rho.cosh()) / rho.cosh()).abs() < 1e-11, "rho={rho}");
            assert!(((hp - rho.sinh()) / rho.sinh()).abs() < 1e-11, "rho={rho}");
        }
    }

    #[test]
    fn sweep_matches_pointwise() {
        let rhos = [5.0, 0.2, 1e-4, 2.5, 40.0];
        let many = profile_log_ratio_many(3, &rhos).unwrap();
        for (p, &rho) in many.iter().zip(&rhos) {
            let single = profile_log_ratio(3, rho).unwrap();
            assert_eq!(p.rho, rho);
            assert!((p.ratio - single.ratio).abs() < 1e-12);
        }
    }
}
