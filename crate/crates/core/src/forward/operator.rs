use nalgebra::DMatrix;

use super::grid::CylinderGrid;
use crate::modes::SymmetricTrigPolynomial;
use crate::{Error, Execution, Result};

/// Samples per `π` and direction used for the positivity check, relative to
/// `Nt`.
const POSITIVITY_OVERSAMPLING: usize = 8;

/// Checks `φ > 0` on a grid 16 times finer than the torus grid.
pub fn check_positive(phi: &SymmetricTrigPolynomial, nt: usize) -> Result<()> {
    let (min, at) = phi.sampled_minimum(POSITIVITY_OVERSAMPLING * nt);
    if !(min > 0.0) {
        return Err(Error::NonPositive { min, at });
    }
    Ok(())
}

/// Highest entry of any mode carrying a nonzero coefficient.
pub fn effective_degree(phi: &SymmetricTrigPolynomial) -> u32 {
    phi.iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|(k, _)| k.max_entry())
        .max()
        .unwrap_or(0)
}

/// `φ`, `∇φ` and the diagonal of `∇²φ` at each reduced torus node.
#[derive(Clone, Debug)]
pub(crate) struct ProfileSamples {
    pub phi: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
    pub hess: Vec<Vec<f64>>,
}

impl ProfileSamples {
    fn new(phi: &SymmetricTrigPolynomial, grid: &CylinderGrid) -> Self {
        let mut out = ProfileSamples {
            phi: Vec::with_capacity(grid.torus_len()),
            grad: Vec::with_capacity(grid.torus_len()),
            hess: Vec::with_capacity(grid.torus_len()),
        };
        for p in 0..grid.torus_len() {
            let v = phi.eval_with_derivatives(&grid.node_point(p));
            out.phi.push(v.value);
            out.grad.push(v.grad);
            out.hess.push(v.hess_diag);
        }
        out
    }

    /// `|∇φ|²` at node `p`.
    pub fn grad_sq(&self, p: usize) -> f64 {
        self.grad[p].iter().map(|g| g * g).sum()
    }
}

/// The Laplacian of the physical domain `{|z| < φ(t)}`, acting on z-radial
/// functions and pulled back to the cylinder by `ρ = φ(t) r`. With
/// `a_j = φ_j/φ`:
///
/// ```text
/// L U = (U_rr + (n-1)/r U_r) / φ²
///     + Σ_j [ U_jj - 2 r a_j U_rj + r² a_j² U_rr + r (2 a_j² - φ_jj/φ) U_r ]
/// ```
#[derive(Clone, Debug)]
pub struct TransformedOperator<'g> {
    grid: &'g CylinderGrid,
    samples: ProfileSamples,
    /// `lines[p][j]`: reduced nodes along direction `j` through `p`.
    lines: Vec<Vec<Vec<usize>>>,
}

pub fn assemble_transformed_operator<'g>(
    phi: &SymmetricTrigPolynomial,
    grid: &'g CylinderGrid,
) -> Result<TransformedOperator<'g>> {
    TransformedOperator::new(phi, grid)
}

impl<'g> TransformedOperator<'g> {
    pub fn new(phi: &SymmetricTrigPolynomial, grid: &'g CylinderGrid) -> Result<Self> {
        if phi.m() != grid.m() {
            return Err(Error::Invalid(format!(
                "profile lives on T^{} but the grid on T^{}",
                phi.m(),
                grid.m()
            )));
        }
        let degree = effective_degree(phi);
        if degree > grid.degree() {
            return Err(Error::UnderResolved(format!(
                "profile has degree {degree} but the grid resolves K = {}",
                grid.degree()
            )));
        }
        check_positive(phi, grid.nt())?;
        let samples = ProfileSamples::new(phi, grid);
        let lines = (0..grid.torus_len())
            .map(|p| (0..grid.m()).map(|j| grid.line(p, j)).collect())
            .collect();
        Ok(TransformedOperator { grid, samples, lines })
    }

    pub fn grid(&self) -> &CylinderGrid {
        self.grid
    }

    pub(crate) fn samples(&self) -> &ProfileSamples {
        &self.samples
    }

    /// `(c_rr, c_r, c_rj)` at radial node `i`, torus node `p`.
    fn coefficients(&self, i: usize, p: usize) -> (f64, f64, Vec<f64>) {
        let n = self.grid.n() as f64;
        let r = self.grid.radial_nodes()[i];
        let phi = self.samples.phi[p];
        let mut a2 = 0.0;
        let mut first = 0.0;
        let mut mixed = Vec::with_capacity(self.grid.m());
        for (g, h) in self.samples.grad[p].iter().zip(&self.samples.hess[p]) {
            let a = g / phi;
            a2 += a * a;
            first += 2.0 * a * a - h / phi;
            mixed.push(-2.0 * r * a);
        }
        let c_rr = 1.0 / (phi * phi) + r * r * a2;
        let c_r = (n - 1.0) / (r * phi * phi) + r * first;
        (c_rr, c_r, mixed)
    }

    /// `L U` at every grid node, including `r = 1`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let nr = self.grid.nr();
        let tl = self.grid.torus_len();
        assert_eq!(u.len(), nr * tl, "grid function has the wrong length");
        let d1 = self.grid.radial_d1();
        let d2 = self.grid.radial_d2();
        let f1 = self.grid.fourier_d1();
        let f2 = self.grid.fourier_d2();
        let radial = |mat: &nalgebra::DMatrix<f64>, p: usize, i: usize| -> f64 {
            (0..nr).map(|k| mat[(i, k)] * u[p * nr + k]).sum()
        };
        let u_r: Vec<f64> = (0..tl)
            .flat_map(|p| (0..nr).map(move |i| (p, i)))
            .map(|(p, i)| radial(d1, p, i))
            .collect();
        let mut out = vec![0.0; u.len()];
        for p in 0..tl {
            let idx = self.grid.node_indices(p);
            for i in 0..nr {
                let (c_rr, c_r, mixed) = self.coefficients(i, p);
                let mut v = c_rr * radial(d2, p, i) + c_r * u_r[p * nr + i];
                for (j, line) in self.lines[p].iter().enumerate() {
                    let row = idx[j];
                    for (q, &pq) in line.iter().enumerate() {
                        v += f2[(row, q)] * u[pq * nr + i] + mixed[j] * f1[(row, q)] * u_r[pq * nr + i];
                    }
                }
                out[p * nr + i] = v;
            }
        }
        out
    }

    /// Number of interior unknowns, `(Nr - 1)` per torus node.
    pub fn interior_len(&self) -> usize {
        (self.grid.nr() - 1) * self.grid.torus_len()
    }

    /// Position of grid value `(p, i)`, `i ≥ 1`, among the interior unknowns.
    pub fn interior_index(&self, p: usize, i: usize) -> usize {
        p * (self.grid.nr() - 1) + (i - 1)
    }

    /// Dense matrix of `L` restricted to interior nodes, with the `r = 1`
    /// column dropped (homogeneous Dirichlet data). Rows are built under
    /// `exec`.
    pub fn interior_matrix(&self, exec: Execution) -> DMatrix<f64> {
        let nr = self.grid.nr();
        let size = self.interior_len();
        let d1 = self.grid.radial_d1();
        let d2 = self.grid.radial_d2();
        let f1 = self.grid.fourier_d1();
        let f2 = self.grid.fourier_d2();
        let rows = exec.map_range(size, |row| {
            let p = row / (nr - 1);
            let i = row % (nr - 1) + 1;
            let (c_rr, c_r, mixed) = self.coefficients(i, p);
            let mut out = vec![0.0; size];
            for k in 1..nr {
                out[self.interior_index(p, k)] += c_rr * d2[(i, k)] + c_r * d1[(i, k)];
            }
            let idx = self.grid.node_indices(p);
            for (j, line) in self.lines[p].iter().enumerate() {
                for (q, &pq) in line.iter().enumerate() {
                    out[self.interior_index(pq, i)] += f2[(idx[j], q)];
                    let w = mixed[j] * f1[(idx[j], q)];
                    if w != 0.0 {
                        for k in 1..nr {
                            out[self.interior_index(pq, k)] += w * d1[(i, k)];
                        }
                    }
                }
            }
            out
        });
        DMatrix::from_fn(size, size, |a, b| rows[a][b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::GridSpec;

    #[test]
    fn constant_profile_paraboloid_maps_to_minus_one() {
        for n in 1..4 {
            let lambda = 1.3;
            let grid = CylinderGrid::new(GridSpec::new(n, 2, 2, 10, 10)).unwrap();
            let phi = SymmetricTrigPolynomial::constant(2, 2, lambda).unwrap();
            let op = TransformedOperator::new(&phi, &grid).unwrap();
            let u: Vec<f64> = (0..grid.torus_len())
                .flat_map(|_| grid.radial_nodes().iter())
                .map(|r| lambda * lambda * (1.0 - r * r) / (2.0 * n as f64))
                .collect();
            for v in op.apply(&u) {
                assert!((v + 1.0).abs() < 1e-11, "{v}");
            }
        }
    }

    #[test]
    fn matrix_agrees_with_apply() {
        let grid = CylinderGrid::new(GridSpec::new(2, 2, 1, 8, 6)).unwrap();
        let mut phi = SymmetricTrigPolynomial::constant(2, 1, 1.5).unwrap();
        phi.set_coeff(&[1, 0], 0.2).unwrap();
        let op = TransformedOperator::new(&phi, &grid).unwrap();
        let nr = grid.nr();
        let u: Vec<f64> = (0..grid.len())
            .map(|a| if a % nr == 0 { 0.0 } else { ((a * 7919) % 101) as f64 / 101.0 })
            .collect();
        let interior: Vec<f64> = u.iter().enumerate().filter(|(a, _)| a % nr != 0).map(|(_, &v)| v).collect();
        let mat = op.interior_matrix(Execution::Sequential);
        let prod = &mat * nalgebra::DVector::from_vec(interior);
        let full = op.apply(&u);
        for p in 0..grid.torus_len() {
            for i in 1..nr {
                let a = full[p * nr + i];
                let b = prod[op.interior_index(p, i)];
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn rejects_bad_profiles() {
        let grid = CylinderGrid::new(GridSpec::new(1, 1, 2, 8, 10)).unwrap();
        let mut phi = SymmetricTrigPolynomial::constant(1, 3, 0.5).unwrap();
        phi.set_coeff(&[1], 0.6).unwrap();
        assert!(matches!(TransformedOperator::new(&phi, &grid), Err(Error::NonPositive { .. })));
        let mut phi = SymmetricTrigPolynomial::constant(1, 3, 1.0).unwrap();
        phi.set_coeff(&[3], 0.1).unwrap();
        assert!(matches!(TransformedOperator::new(&phi, &grid), Err(Error::UnderResolved(_))));
    }
}
