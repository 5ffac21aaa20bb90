//! Volume, relative perimeter and Cheeger ratio of `Ω_φ` inside a period
//! cell, the divergence-theorem balance, and the gradient bound carried by
//! `P = |∇u|²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::branch::BranchPoint;
use crate::forward::{solve_dirichlet, CylinderGrid, CylinderSolution, TransformedOperator};
use crate::modes::SymmetricTrigPolynomial;
use crate::{Error, Execution, Result};

/// The slab `ℝⁿ × ∏ (a_i π, b_i π)`, stored as the integers `a_i < b_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodCell {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
}

impl PeriodCell {
    pub fn new(a: Vec<i64>, b: Vec<i64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Invalid("cell bounds must be non-empty and of equal length".into()));
        }
        if a.iter().zip(&b).any(|(x, y)| x >= y) {
            return Err(Error::Invalid(format!("cell needs a < b, got a = {a:?}, b = {b:?}")));
        }
        Ok(PeriodCell { a, b })
    }

    /// `(0, 2π)ᵐ`.
    pub fn full_period(m: usize) -> Self {
        PeriodCell {
            a: vec![0; m],
            b: vec![2; m],
        }
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// `∏ (b_i - a_i) π`.
    pub fn measure(&self) -> f64 {
        self.a.iter().zip(&self.b).map(|(a, b)| (b - a) as f64 * PI).product()
    }

    /// Parses `a1:b1,a2:b2,...` in units of `π`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for part in text.split(',') {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| Error::Invalid(format!("cell range `{part}` is not of the form a:b")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Invalid(format!("cell bound `{s}` is not an integer")))
            };
            a.push(parse(lo)?);
            b.push(parse(hi)?);
        }
        PeriodCell::new(a, b)
    }
}

/// `|S^{n-1}| = 2 π^{n/2} / Γ(n/2)`; `|S⁰| = 2`.
pub fn sphere_area(n: u32) -> f64 {
    if n == 1 {
        return 2.0;
    }
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / libm::tgamma(half)
}

/// Trapezoid intervals per `π` for integrands built from `φ` of degree `K`
/// raised to the power `n`.
fn nodes_per_pi(phi: &SymmetricTrigPolynomial, n: u32) -> usize {
    (n as usize * phi.degree() as usize + 1).max(64)
}

/// Tensor trapezoid rule over the cell. On each `(a π, b π)` the integrand
/// is even and `2π`-periodic, so the rule is spectrally accurate.
fn integrate<F: Fn(&[f64]) -> f64>(cell: &PeriodCell, per_pi: usize, f: F) -> f64 {
    let m = cell.m();
    let h = PI / per_pi as f64;
    let counts: Vec<usize> = cell
        .a
        .iter()
        .zip(&cell.b)
        .map(|(a, b)| (b - a) as usize * per_pi)
        .collect();
    let mut idx = vec![0usize; m];
    let mut t = vec![0.0; m];
    // Neumaier-compensated sum; the terms share a sign and there are many.
    let (mut total, mut carry) = (0.0f64, 0.0f64);
    loop {
        let mut w = 1.0;
        for j in 0..m {
            t[j] = cell.a[j] as f64 * PI + h * idx[j] as f64;
            if idx[j] == 0 || idx[j] == counts[j] {
                w *= 0.5;
            }
        }
        let term = w * f(&t);
        let next = total + term;
        carry += if total.abs() >= term.abs() {
            (total - next) + term
        } else {
            (term - next) + total
        };
        total = next;
        let mut j = m;
        loop {
            if j == 0 {
                return (total + carry) * h.powi(m as i32);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] <= counts[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

fn check_cell(phi: &SymmetricTrigPolynomial, cell: &PeriodCell) -> Result<()> {
    if phi.m() != cell.m() {
        return Err(Error::Invalid(format!(
            "profile lives on T^{} but the cell has {} directions",
            phi.m(),
            cell.m()
        )));
    }
    Ok(())
}

/// `|Ω_φ ∩ S| = |S^{n-1}|/n ∫_cell φⁿ dt`.
pub fn cell_volume(phi: &SymmetricTrigPolynomial, n: u32, cell: &PeriodCell) -> Result<f64> {
    check_cell(phi, cell)?;
    let integral = integrate(cell, nodes_per_pi(phi, n), |t| phi.eval(t).powi(n as i32));
    Ok(sphere_area(n) / n as f64 * integral)
}

/// Area of `∂Ω_φ ∩ S`: `|S^{n-1}| ∫_cell φ^{n-1} √(1 + |∇φ|²) dt`.
pub fn cell_perimeter(phi: &SymmetricTrigPolynomial, n: u32, cell: &PeriodCell) -> Result<f64> {
    check_cell(phi, cell)?;
    let integral = integrate(cell, nodes_per_pi(phi, n), |t| {
        let v = phi.eval_with_derivatives(t);
        let g2: f64 = v.grad.iter().map(|g| g * g).sum();
        v.value.powi(n as i32 - 1) * (1.0 + g2).sqrt()
    });
    Ok(sphere_area(n) * integral)
}

/// Perimeter over volume of `Ω_{φ_s} ∩ S`; `n/λ_s` on the branch.
pub fn cheeger_ratio(point: &BranchPoint, cell: &PeriodCell) -> Result<f64> {
    let phi = point.profile();
    Ok(cell_perimeter(&phi, point.n, cell)? / cell_volume(&phi, point.n, cell)?)
}

/// `|Ω_φ ∩ S| + ∫_{∂Ω_φ ∩ S} ∂_ν u`, which vanishes because `-Δu = 1` and
/// the flux through the flat faces of the cell is zero. `trace` is the
/// computed normal derivative.
pub fn divergence_closure(
    phi: &SymmetricTrigPolynomial,
    trace: &SymmetricTrigPolynomial,
    n: u32,
    cell: &PeriodCell,
) -> Result<f64> {
    check_cell(phi, cell)?;
    let flux = integrate(cell, nodes_per_pi(phi, n), |t| {
        let v = phi.eval_with_derivatives(t);
        let g2: f64 = v.grad.iter().map(|g| g * g).sum();
        v.value.powi(n as i32 - 1) * (1.0 + g2).sqrt() * trace.eval(t)
    });
    Ok(cell_volume(phi, n, cell)? + sphere_area(n) * flux)
}

/// Discrete check of `|∇u|² < λ²/n²` inside with equality on the boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PFunctionReport {
    /// `λ²/n²`.
    pub bound: f64,
    pub p_max_interior: f64,
    /// `bound - p_max_interior`.
    pub margin: f64,
    /// `max |P - bound|` over boundary nodes.
    pub p_boundary_dev: f64,
    /// Smallest `ΔP` over interior nodes.
    pub laplacian_min: f64,
    /// `2/(n + m)`.
    pub laplacian_bound: f64,
}

impl PFunctionReport {
    pub fn passes(&self, boundary_tol: f64, laplacian_tol: f64) -> bool {
        self.margin > 0.0
            && self.p_boundary_dev < boundary_tol
            && self.laplacian_min >= self.laplacian_bound - laplacian_tol
    }
}

/// `P = |∇u|²` at every node, from `∂_ρ u = U_r/φ` and
/// `∂_{t_j} u = U_j - r (φ_j/φ) U_r`.
pub fn p_function(sol: &CylinderSolution) -> Result<Vec<f64>> {
    let grid: &CylinderGrid = &sol.grid;
    let nr = grid.nr();
    let d1 = grid.radial_d1();
    let f1 = grid.fourier_d1();
    let radial = grid.radial_nodes();
    let mut out = vec![0.0; grid.len()];
    for p in 0..grid.torus_len() {
        let v = sol.phi.eval_with_derivatives(&grid.node_point(p));
        let idx = grid.node_indices(p);
        let lines: Vec<Vec<usize>> = (0..grid.m()).map(|j| grid.line(p, j)).collect();
        for i in 0..nr {
            let u_r: f64 = (0..nr).map(|k| d1[(i, k)] * sol.u[p * nr + k]).sum();
            let mut total = (u_r / v.value).powi(2);
            for j in 0..grid.m() {
                let u_j: f64 = lines[j]
                    .iter()
                    .enumerate()
                    .map(|(q, &pq)| f1[(idx[j], q)] * sol.u[pq * nr + i])
                    .sum();
                total += (u_j - radial[i] * v.grad[j] / v.value * u_r).powi(2);
            }
            out[p * nr + i] = total;
        }
    }
    Ok(out)
}

pub fn p_function_check(sol: &CylinderSolution, lambda: f64) -> Result<PFunctionReport> {
    let grid = &sol.grid;
    let n = grid.n() as f64;
    let nr = grid.nr();
    let bound = lambda * lambda / (n * n);
    let p = p_function(sol)?;
    let op = TransformedOperator::new(&sol.phi, grid)?;
    let lap = op.apply(&p);
    let mut p_max_interior = f64::NEG_INFINITY;
    let mut p_boundary_dev = 0.0f64;
    let mut laplacian_min = f64::INFINITY;
    for (a, (&v, &l)) in p.iter().zip(&lap).enumerate() {
        if a % nr == 0 {
            p_boundary_dev = p_boundary_dev.max((v - bound).abs());
        } else {
            p_max_interior = p_max_interior.max(v);
            laplacian_min = laplacian_min.min(l);
        }
    }
    Ok(PFunctionReport {
        bound,
        p_max_interior,
        margin: bound - p_max_interior,
        p_boundary_dev,
        laplacian_min,
        laplacian_bound: 2.0 / (n + grid.m() as f64),
    })
}

/// Everything checked for one branch point in one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub s: f64,
    pub cell: PeriodCell,
    pub volume: f64,
    pub perimeter: f64,
    pub ratio: f64,
    /// `n/λ_s`.
    pub expected_ratio: f64,
    pub closure_residual: f64,
    pub p_max_interior: f64,
    pub p_margin: f64,
    pub p_boundary_dev: f64,
    pub p_laplacian_min: f64,
    pub p_laplacian_bound: f64,
}

/// Solves the Dirichlet problem for `point` on its own grid and evaluates
/// all geometric checks in `cell`.
pub fn geometry_report(point: &BranchPoint, cell: &PeriodCell, exec: Execution) -> Result<GeometryReport> {
    let grid = CylinderGrid::new(point.grid)?;
    let phi = point.profile();
    let sol = solve_dirichlet(&phi, &grid, exec)?;
    let volume = cell_volume(&phi, point.n, cell)?;
    let perimeter = cell_perimeter(&phi, point.n, cell)?;
    let closure_residual = divergence_closure(&phi, &sol.trace, point.n, cell)?;
    let pf = p_function_check(&sol, point.lambda)?;
    Ok(GeometryReport {
        s: point.s,
        cell: cell.clone(),
        volume,
        perimeter,
        ratio: perimeter / volume,
        expected_ratio: point.n as f64 / point.lambda,
        closure_residual,
        p_max_interior: pf.p_max_interior,
        p_margin: pf.margin,
        p_boundary_dev: pf.p_boundary_dev,
        p_laplacian_min: pf.laplacian_min,
        p_laplacian_bound: pf.laplacian_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn cell_parsing() {
        let c = PeriodCell::parse("0:2,-1:3").unwrap();
        assert_eq!(c.a, vec![0, -1]);
        assert_eq!(c.b, vec![2, 3]);
        assert!((c.measure() - 8.0 * PI * PI).abs() < 1e-12);
        assert!(PeriodCell::parse("2:0").is_err());
        assert!(PeriodCell::parse("0-2").is_err());
        assert!(PeriodCell::parse("0:x").is_err());
    }

    #[test]
    fn cylinder_volume_and_perimeter() {
        let lambda = 1.7;
        let phi = SymmetricTrigPolynomial::constant(1, 4, lambda).unwrap();
        let cell = PeriodCell::full_period(1);
        let v = cell_volume(&phi, 2, &cell).unwrap();
        let p = cell_perimeter(&phi, 2, &cell).unwrap();
        assert!((v - PI * lambda * lambda * 2.0 * PI).abs() < 1e-12);
        assert!((p - 2.0 * PI * lambda * 2.0 * PI).abs() < 1e-12);
    }
}
