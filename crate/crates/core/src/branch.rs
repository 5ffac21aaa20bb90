//! Continuation of the branch of non-cylindrical solutions bifurcating from
//! the straight cylinder of radius `λ*`.
//!
//! Points on the branch are written `φ_s = λ_s + s (v₀ + μ_s)` where
//! `v₀ = Σ_j cos t_j` spans the kernel of `ℋ_{λ*}` and `μ_s` has no
//! first-shell component. For fixed `s ≠ 0` the unknowns `(λ, μ)` solve
//!
//! ```text
//! F(λ, μ) = G(λ, s (v₀ + μ)) / s = 0,
//! ```
//!
//! one equation per cosine coefficient. The first-shell equation is paired
//! with `λ`. At `s = 0` the quotient is replaced by its limit
//! `ℋ_λ (v₀ + μ)`, evaluated spectrally.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::forward::{residual_g, CylinderGrid, GridSpec};
use crate::modes::{apply_h_lambda, ModeBasis, MultiIndex, SymmetricTrigPolynomial};
use crate::specfun::{find_lambda_star, sigma_prime};
use crate::{Error, Execution, Result};

/// `v₀ = cos t₁ + … + cos t_m`.
pub fn kernel_vector(m: usize, degree: u32) -> Result<SymmetricTrigPolynomial> {
    SymmetricTrigPolynomial::mode(m, degree, MultiIndex::first_shell(m).entries())
}

/// `σ'(λ*)`, the rate at which the kernel eigenvalue crosses zero. The
/// bifurcation is transversal when it is positive.
pub fn transversality_check(n: u32) -> Result<f64> {
    sigma_prime(n, find_lambda_star(n)?)
}

/// One converged point of the branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub s: f64,
    pub lambda: f64,
    pub mu: SymmetricTrigPolynomial,
    /// `‖G(λ_s, s(v₀ + μ_s))‖∞` over cosine coefficients.
    pub residual: f64,
    pub iters: usize,
    pub n: u32,
    pub grid: GridSpec,
}

impl BranchPoint {
    /// `φ_s = λ_s + s (v₀ + μ_s)`.
    pub fn profile(&self) -> SymmetricTrigPolynomial {
        let v0 = kernel_vector(self.mu.m(), self.mu.degree()).expect("m >= 1");
        v0.axpy(1.0, &self.mu)
            .expect("same basis")
            .scaled(self.s)
            .add_constant(self.lambda)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let p: BranchPoint = serde_json::from_str(line)?;
        if p.mu.coeff(MultiIndex::first_shell(p.mu.m()).entries()) != Some(0.0) {
            return Err(Error::Invalid(format!("branch point at s = {} has a first-shell component", p.s)));
        }
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Bound on `‖F‖∞`.
    pub tol: f64,
    pub max_iters: usize,
    /// Relative forward-difference step of the Jacobian.
    pub fd_step: f64,
    pub exec: Execution,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-9,
            max_iters: 25,
            fd_step: 1e-6,
            exec: Execution::default(),
        }
    }
}

/// Maps the reduced unknown vector `[λ, μ without first shell]` to
/// `(λ, μ)` and back.
#[derive(Clone, Debug)]
struct Layout {
    basis: Arc<ModeBasis>,
    first: usize,
}

impl Layout {
    fn new(m: usize, degree: u32) -> Result<Self> {
        let basis = Arc::new(ModeBasis::new(m, degree)?);
        let first = basis
            .position(MultiIndex::first_shell(m).entries())
            .ok_or_else(|| Error::Invalid("degree must be at least 1".into()))?;
        Ok(Layout { basis, first })
    }

    fn len(&self) -> usize {
        self.basis.len()
    }

    fn pack(&self, lambda: f64, mu: &SymmetricTrigPolynomial) -> DVector<f64> {
        let mu = mu.with_degree(self.basis.degree());
        let mut x = DVector::zeros(self.len());
        x[0] = lambda;
        let mut a = 1;
        for (i, &c) in mu.coeffs().iter().enumerate() {
            if i != self.first {
                x[a] = c;
                a += 1;
            }
        }
        x
    }

    fn unpack(&self, x: &DVector<f64>) -> (f64, SymmetricTrigPolynomial) {
        let mut coeffs = vec![0.0; self.len()];
        let mut a = 1;
        for (i, c) in coeffs.iter_mut().enumerate() {
            if i != self.first {
                *c = x[a];
                a += 1;
            }
        }
        let mu = SymmetricTrigPolynomial::from_coeffs(self.basis.clone(), coeffs).expect("sized");
        (x[0], mu)
    }

    /// Equations, with the first-shell equation first so that it pairs with
    /// `λ`.
    fn equations(&self, g: &SymmetricTrigPolynomial) -> DVector<f64> {
        let c = g.coeffs();
        let mut out = DVector::zeros(self.len());
        out[0] = c[self.first];
        let mut a = 1;
        for (i, &v) in c.iter().enumerate() {
            if i != self.first {
                out[a] = v;
                a += 1;
            }
        }
        out
    }
}

/// The reduced system at fixed `s` on a fixed grid.
struct Reduced<'a> {
    s: f64,
    grid: &'a CylinderGrid,
    layout: Layout,
    v0: SymmetricTrigPolynomial,
    exec: Execution,
}

impl<'a> Reduced<'a> {
    fn new(s: f64, grid: &'a CylinderGrid, exec: Execution) -> Result<Self> {
        let layout = Layout::new(grid.m(), grid.degree())?;
        let v0 = kernel_vector(grid.m(), grid.degree())?;
        Ok(Reduced {
            s,
            grid,
            layout,
            v0,
            exec,
        })
    }

    /// `G(λ, s (v₀ + μ))` evaluated through the Dirichlet solver.
    fn g(&self, x: &DVector<f64>, exec: Execution) -> Result<SymmetricTrigPolynomial> {
        let (lambda, mu) = self.layout.unpack(x);
        let v = self.v0.axpy(1.0, &mu)?.scaled(self.s);
        residual_g(lambda, &v, self.grid, exec)
    }

    fn f(&self, x: &DVector<f64>, exec: Execution) -> Result<DVector<f64>> {
        if self.s == 0.0 {
            let (lambda, mu) = self.layout.unpack(x);
            let v = self.v0.axpy(1.0, &mu)?;
            return Ok(self.layout.equations(&apply_h_lambda(self.grid.n(), lambda, &v)?));
        }
        Ok(self.layout.equations(&self.g(x, exec)?) / self.s)
    }

    fn jacobian(&self, x: &DVector<f64>, fx: &DVector<f64>, step: f64) -> Result<DMatrix<f64>> {
        let size = x.len();
        let inner = if self.exec.is_parallel() {
            Execution::Sequential
        } else {
            self.exec
        };
        let columns = self.exec.map_range(size, |j| {
            let h = step * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            self.f(&xp, inner).map(|fp| (fp - fx) / h)
        });
        let mut jac = DMatrix::zeros(size, size);
        for (j, col) in columns.into_iter().enumerate() {
            jac.set_column(j, &col?);
        }
        Ok(jac)
    }
}

/// Forward-difference Jacobian of the reduced system at `(λ, μ)`; row 0 is
/// the first-shell equation and column 0 the `λ` derivative.
pub fn reduced_jacobian(
    s: f64,
    lambda: f64,
    mu: &SymmetricTrigPolynomial,
    grid: &CylinderGrid,
    opts: &NewtonOptions,
) -> Result<DMatrix<f64>> {
    let sys = Reduced::new(s, grid, opts.exec)?;
    let x = sys.layout.pack(lambda, mu);
    let fx = sys.f(&x, opts.exec)?;
    sys.jacobian(&x, &fx, opts.fd_step)
}

/// Newton iteration on the reduced system at fixed `s`, from the guess
/// `(λ, μ)`.
pub fn newton_correct(
    s: f64,
    lambda: f64,
    mu: &SymmetricTrigPolynomial,
    grid: &CylinderGrid,
    opts: &NewtonOptions,
) -> Result<BranchPoint> {
    if !s.is_finite() {
        return Err(Error::Invalid(format!("s must be finite, got {s}")));
    }
    let sys = Reduced::new(s, grid, opts.exec)?;
    let mut x = sys.layout.pack(lambda, mu);
    let mut fx = sys.f(&x, opts.exec)?;
    let mut iters = 0;
    while fx.amax() >= opts.tol {
        if iters == opts.max_iters {
            return Err(Error::NonConvergence {
                iters,
                residual: fx.amax(),
            });
        }
        let jac = sys.jacobian(&x, &fx, opts.fd_step)?;
        let dx = jac
            .lu()
            .solve(&fx)
            .ok_or_else(|| Error::LinearSolve(format!("singular reduced Jacobian at s = {s}")))?;
        x -= dx;
        fx = sys.f(&x, opts.exec)?;
        iters += 1;
    }
    let residual = sys.g(&x, opts.exec)?.max_abs_coeff();
    let (lambda, mu) = sys.layout.unpack(&x);
    Ok(BranchPoint {
        s,
        lambda,
        mu,
        residual,
        iters,
        n: grid.n(),
        grid: *grid.spec(),
    })
}

/// Points reached by [`trace_branch`] and why each direction stopped early,
/// if it did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BranchTrace {
    /// Sorted by increasing `s`.
    pub points: Vec<BranchPoint>,
    pub diagnostics: Vec<String>,
}

/// Marches `s = 0, ±ds, ±2ds, …` while `|s| ≤ s_max`, predicting each
/// point by linear extrapolation of the previous two and correcting with
/// [`newton_correct`]. A failed correction ends that direction.
pub fn trace_branch(grid: &CylinderGrid, s_max: f64, ds: f64, opts: &NewtonOptions) -> Result<BranchTrace> {
    if !(ds > 0.0) || !ds.is_finite() {
        return Err(Error::Invalid(format!("ds must be positive, got {ds}")));
    }
    if !(s_max >= 0.0) || !s_max.is_finite() {
        return Err(Error::Invalid(format!("s_max must be >= 0, got {s_max}")));
    }
    let lambda_star = find_lambda_star(grid.n())?;
    let zero = SymmetricTrigPolynomial::zeros(grid.m(), grid.degree())?;
    let origin = newton_correct(0.0, lambda_star, &zero, grid, opts)?;
    let steps = (s_max / ds * (1.0 + 1e-12)).floor() as usize;

    let mut trace = BranchTrace::default();
    let mut sides = Vec::new();
    for dir in [-1.0, 1.0] {
        let mut accepted = vec![origin.clone()];
        for j in 1..=steps {
            let s = dir * ds * j as f64;
            let (lambda, mu) = predict(&accepted, s);
            match newton_correct(s, lambda, &mu, grid, opts) {
                Ok(p) => accepted.push(p),
                Err(e) => {
                    trace.diagnostics.push(format!("stopped before s = {s}: {e}"));
                    break;
                }
            }
        }
        accepted.remove(0);
        sides.push(accepted);
    }
    let mut left = sides.remove(0);
    left.reverse();
    trace.points = left;
    trace.points.push(origin);
    trace.points.extend(sides.remove(0));
    Ok(trace)
}

fn predict(accepted: &[BranchPoint], s: f64) -> (f64, SymmetricTrigPolynomial) {
    let last = &accepted[accepted.len() - 1];
    if accepted.len() < 2 {
        return (last.lambda, last.mu.clone());
    }
    let prev = &accepted[accepted.len() - 2];
    let t = (s - last.s) / (last.s - prev.s);
    let lambda = last.lambda + t * (last.lambda - prev.lambda);
    let mu = last.mu.axpy(t, &last.mu.axpy(-1.0, &prev.mu).expect("same basis")).expect("same basis");
    (lambda, mu)
}

/// `‖G(λ, 0)‖∞` for each `λ`: the straight cylinders, which solve the
/// problem for every radius.
pub fn trivial_branch_residuals(lambdas: &[f64], grid: &CylinderGrid, exec: Execution) -> Result<Vec<f64>> {
    let zero = SymmetricTrigPolynomial::zeros(grid.m(), grid.degree())?;
    lambdas
        .iter()
        .map(|&l| residual_g(l, &zero, grid, exec).map(|g| g.max_abs_coeff()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_vector_is_cosine_sum() {
        let v = kernel_vector(2, 3).unwrap();
        let t = [0.4, 2.0];
        assert!((v.eval(&t) - (0.4f64.cos() + 2.0f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn layout_round_trip() {
        let layout = Layout::new(2, 3).unwrap();
        let mut mu = SymmetricTrigPolynomial::zeros(2, 3).unwrap();
        mu.set_coeff(&[2, 1], 0.5).unwrap();
        mu.set_coeff(&[0, 0], -0.25).unwrap();
        let x = layout.pack(1.5, &mu);
        assert_eq!(x.len(), mu.coeffs().len());
        let (l, back) = layout.unpack(&x);
        assert_eq!(l, 1.5);
        assert_eq!(back, mu);
    }

    #[test]
    fn origin_needs_no_iterations() {
        let grid = CylinderGrid::new(GridSpec::new(2, 1, 4, 10, 18)).unwrap();
        let l = find_lambda_star(2).unwrap();
        let zero = SymmetricTrigPolynomial::zeros(1, 4).unwrap();
        let p = newton_correct(0.0, l, &zero, &grid, &NewtonOptions::default()).unwrap();
        assert_eq!(p.iters, 0);
        assert_eq!(p.lambda, l);
        assert!(p.residual < 1e-12);
    }

    #[test]
    fn origin_from_offset_guess() {
        let grid = CylinderGrid::new(GridSpec::new(1, 1, 4, 10, 18)).unwrap();
        let mut mu = SymmetricTrigPolynomial::zeros(1, 4).unwrap();
        mu.set_coeff(&[2], 0.1).unwrap();
        let p = newton_correct(0.0, 1.3, &mu, &grid, &NewtonOptions::default()).unwrap();
        assert!((p.lambda - find_lambda_star(1).unwrap()).abs() < 1e-10);
        assert!(p.mu.max_abs_coeff() < 1e-10);
    }

    #[test]
    fn rejects_bad_steps() {
        let grid = CylinderGrid::new(GridSpec::new(1, 1, 4, 10, 18)).unwrap();
        assert!(trace_branch(&grid, 0.1, 0.0, &NewtonOptions::default()).is_err());
        assert!(trace_branch(&grid, -0.1, 0.01, &NewtonOptions::default()).is_err());
    }
}
