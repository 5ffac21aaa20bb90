use std::sync::Arc;

use nalgebra::DVector;

use super::grid::CylinderGrid;
use super::operator::TransformedOperator;
use crate::modes::{ModeBasis, SymmetricTrigPolynomial};
use crate::{Error, Execution, Result};

/// Largest tolerated gap between the sampled Neumann trace and its
/// projection onto the cosine basis of the working degree.
pub const ALIASING_LIMIT: f64 = 1e-6;

/// Discrete solution of `-Δu = 1` in `{|z| < φ(t)}`, `u = 0` on the
/// boundary, in cylinder variables.
#[derive(Clone, Debug)]
pub struct CylinderSolution {
    pub grid: CylinderGrid,
    /// The profile `φ` the domain was built from.
    pub phi: SymmetricTrigPolynomial,
    /// `U(r, t)` in grid layout.
    pub u: Vec<f64>,
    /// Neumann trace at the reduced torus nodes.
    pub trace_samples: Vec<f64>,
    /// Projection of the trace onto the cosine basis of degree `K`.
    pub trace: SymmetricTrigPolynomial,
    /// `max |samples - projection|` over the torus nodes.
    pub aliasing_residual: f64,
    /// `‖A w - b‖∞` of the interior linear system after refinement.
    pub solve_residual: f64,
}

impl CylinderSolution {
    pub fn value(&self, p: usize, i: usize) -> f64 {
        self.u[p * self.grid.nr() + i]
    }

    /// `U(0, t)` at each reduced torus node.
    pub fn axis_values(&self) -> Vec<f64> {
        let nr = self.grid.nr();
        self.u.chunks(nr).map(|col| self.grid.axis_value(col)).collect()
    }

    /// `U` expanded to the full torus grid, radial index fastest, torus
    /// indices in row-major order.
    pub fn full_values(&self) -> Vec<f64> {
        let nr = self.grid.nr();
        let mut out = Vec::with_capacity(self.grid.full_len() * nr);
        for f in 0..self.grid.full_len() {
            let p = self.grid.reduced_of_full(f);
            out.extend_from_slice(&self.u[p * nr..(p + 1) * nr]);
        }
        out
    }
}

/// Solves the Dirichlet problem on `Ω_φ` and samples its Neumann trace.
///
/// The unknown is split as `U = φ²(1 - r²)/(2n) + W`. The first part is
/// the exact solution for constant `φ`, so `W` is driven only by the
/// variation of `φ`:
///
/// ```text
/// L W = -(1/n) Σ_j (φ_j² + φ φ_jj),   W(1, t) = 0.
/// ```
///
/// The split is exact on the grid because `φ²` is resolved, and it keeps the
/// `O(1)` part of the trace out of the differentiated unknown.
pub fn solve_dirichlet(phi: &SymmetricTrigPolynomial, grid: &CylinderGrid, exec: Execution) -> Result<CylinderSolution> {
    let op = TransformedOperator::new(phi, grid)?;
    let samples = op.samples();
    let n = grid.n() as f64;
    let nr = grid.nr();
    let tl = grid.torus_len();

    let forcing: Vec<f64> = (0..tl)
        .map(|p| {
            let s: f64 = samples.grad[p]
                .iter()
                .zip(&samples.hess[p])
                .map(|(g, h)| g * g + samples.phi[p] * h)
                .sum();
            -s / n
        })
        .collect();

    let (w, solve_residual) = if forcing.iter().all(|&f| f == 0.0) {
        (DVector::zeros(op.interior_len()), 0.0)
    } else {
        let a = op.interior_matrix(exec);
        let b = DVector::from_fn(op.interior_len(), |row, _| forcing[row / (nr - 1)]);
        let lu = a.clone().lu();
        let mut x = lu.solve(&b).ok_or_else(|| singular(&lu))?;
        let r = &b - &a * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
        let res = (&b - &a * &x).amax();
        if !res.is_finite() {
            return Err(Error::LinearSolve(format!("non-finite residual; {}", diagnostic(&lu))));
        }
        (x, res)
    };

    let radial = grid.radial_nodes();
    let mut u = vec![0.0; grid.len()];
    for p in 0..tl {
        let base = samples.phi[p] * samples.phi[p] / (2.0 * n);
        for i in 0..nr {
            let wi = if i == 0 { 0.0 } else { w[op.interior_index(p, i)] };
            u[p * nr + i] = base * (1.0 - radial[i] * radial[i]) + wi;
        }
    }

    let d1 = grid.radial_d1();
    let trace_samples: Vec<f64> = (0..tl)
        .map(|p| {
            let w_r: f64 = (1..nr).map(|k| d1[(0, k)] * w[op.interior_index(p, k)]).sum();
            let phi_p = samples.phi[p];
            (-phi_p * phi_p / n + w_r) * (1.0 + samples.grad_sq(p)).sqrt() / phi_p
        })
        .collect();

    let basis = Arc::new(ModeBasis::new(grid.m(), grid.degree())?);
    let (trace, aliasing_residual) = project(grid, &trace_samples, basis);

    Ok(CylinderSolution {
        grid: grid.clone(),
        phi: phi.clone(),
        u,
        trace_samples,
        trace,
        aliasing_residual,
        solve_residual,
    })
}

fn diagnostic(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> String {
    let diag = lu.u().diagonal();
    let max = diag.amax();
    let min = diag.iter().fold(f64::INFINITY, |acc, d| acc.min(d.abs()));
    format!("pivot ratio min/max = {:.3e}", min / max)
}

fn singular(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> Error {
    Error::LinearSolve(format!("singular system; {}", diagnostic(lu)))
}

/// `t ↦ Σ_{p ∈ orbit(k)} ∏_j cos(p_j t_j)` at node `p`.
fn symmetric_mode(basis: &ModeBasis, index: usize, t: &[f64]) -> f64 {
    basis
        .orbit(index)
        .iter()
        .map(|q| q.iter().zip(t).map(|(&qj, &tj)| (qj as f64 * tj).cos()).product::<f64>())
        .sum()
}

/// Discrete `L²` projection of symmetric node values onto `basis`, and the
/// largest pointwise gap between the values and the projection.
pub(crate) fn project(grid: &CylinderGrid, values: &[f64], basis: Arc<ModeBasis>) -> (SymmetricTrigPolynomial, f64) {
    let points: Vec<Vec<f64>> = (0..grid.torus_len()).map(|p| grid.node_point(p)).collect();
    let coeffs: Vec<f64> = (0..basis.len())
        .map(|i| {
            let k = &basis.indices()[i];
            let sum: f64 = points
                .iter()
                .enumerate()
                .map(|(p, t)| grid.weight(p) * values[p] * symmetric_mode(&basis, i, t))
                .sum();
            sum * grid.cell_measure() / (k.orbit_size() as f64 * k.mode_norm_sq())
        })
        .collect();
    let poly = SymmetricTrigPolynomial::from_coeffs(basis, coeffs).expect("sized from basis");
    let residual = points
        .iter()
        .zip(values)
        .fold(0.0f64, |acc, (t, v)| acc.max((poly.eval(t) - v).abs()));
    (poly, residual)
}

/// `H(φ)`, the outward normal derivative of the solution along the boundary
/// `|z| = φ(t)`, as a cosine polynomial of the grid's working degree.
pub fn neumann_trace(sol: &CylinderSolution) -> Result<SymmetricTrigPolynomial> {
    if sol.aliasing_residual > ALIASING_LIMIT {
        return Err(Error::Aliasing {
            residual: sol.aliasing_residual,
            limit: ALIASING_LIMIT,
        });
    }
    Ok(sol.trace.clone())
}

/// `G(λ, v) = H(λ + v) + λ/n`, which vanishes exactly when the domain
/// `{|z| < λ + v(t)}` has constant normal derivative `-λ/n`.
pub fn residual_g(
    lambda: f64,
    vp: &SymmetricTrigPolynomial,
    grid: &CylinderGrid,
    exec: Execution,
) -> Result<SymmetricTrigPolynomial> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be finite and > 0, got {lambda}")));
    }
    let phi = vp.add_constant(lambda);
    let sol = solve_dirichlet(&phi, grid, exec)?;
    let trace = neumann_trace(&sol)?;
    Ok(trace.add_constant(lambda / grid.n() as f64))
}
