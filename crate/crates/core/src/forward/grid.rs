use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which torus symmetries the discrete unknowns are reduced by.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusSymmetry {
    /// Every torus node is an unknown.
    Full,
    /// Evenness in each `t_j`: nodes folded onto `[0, π]ᵐ`.
    Even,
    /// Evenness plus invariance under coordinate permutations.
    #[default]
    EvenPermutation,
}

/// Resolution descriptor of the cylinder `[0, 1]_r × Tᵐ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: u32,
    pub m: usize,
    /// Working truncation degree of torus polynomials.
    #[serde(rename = "K")]
    pub degree: u32,
    /// Radial nodes in `(0, 1]`.
    pub nr: usize,
    /// Nodes per torus direction.
    pub nt: usize,
    #[serde(default)]
    pub symmetry: TorusSymmetry,
}

impl GridSpec {
    pub fn new(n: u32, m: usize, degree: u32, nr: usize, nt: usize) -> Self {
        GridSpec {
            n,
            m,
            degree,
            nr,
            nt,
            symmetry: TorusSymmetry::default(),
        }
    }

    /// Defaults: `K = 8, Nr = 24, Nt = 48` for `m = 1`; `K = 6, Nr = 24,
    /// Nt = 26` otherwise.
    pub fn default_for(n: u32, m: usize) -> Self {
        if m <= 1 {
            GridSpec::new(n, m, 8, 24, 48)
        } else {
            GridSpec::new(n, m, 6, 24, 26)
        }
    }

    pub fn with_symmetry(mut self, symmetry: TorusSymmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    /// Same grid with `Nr` and `Nt` doubled.
    pub fn refined(self) -> Self {
        GridSpec {
            nr: 2 * self.nr,
            nt: 2 * self.nt,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::Invalid("m must be at least 1".into()));
        }
        if self.nr < 8 {
            return Err(Error::UnderResolved(format!("Nr = {} < 8", self.nr)));
        }
        if self.nt % 2 != 0 {
            return Err(Error::Invalid(format!("Nt = {} must be even", self.nt)));
        }
        let need = 4 * self.degree as usize + 2;
        if self.nt < need {
            return Err(Error::UnderResolved(format!(
                "Nt = {} < 4K + 2 = {need} for K = {}",
                self.nt, self.degree
            )));
        }
        Ok(())
    }
}

/// Collocation grid on the cylinder.
///
/// Radially, `U(·, t)` is the restriction of an even function on `[-1, 1]`
/// sampled at the Chebyshev points `cos(kπ/N)`, `N = 2 Nr - 1`. Only the
/// `Nr` positive points are kept and the differentiation matrices are folded
/// accordingly, so the axis `r = 0` is never a node. Node 0 is `r = 1`.
///
/// On the torus the nodes are `2π i / Nt` per direction, reduced to one
/// representative per symmetry orbit. Grid functions are stored with the
/// radial index fastest: `value[p * Nr + i]`.
#[derive(Clone, Debug)]
pub struct CylinderGrid {
    spec: GridSpec,
    radial: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    angles: Vec<f64>,
    f1: DMatrix<f64>,
    f2: DMatrix<f64>,
    /// Per-direction node indices of each reduced node.
    nodes: Vec<Vec<usize>>,
    weights: Vec<f64>,
    full_to_reduced: Vec<usize>,
}

impl CylinderGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let (radial, d1, d2) = folded_chebyshev(spec.nr);
        let (angles, f1, f2) = fourier(spec.nt);
        let (nodes, weights, full_to_reduced) = reduce(spec.m, spec.nt, spec.symmetry);
        Ok(CylinderGrid {
            spec,
            radial,
            d1,
            d2,
            angles,
            f1,
            f2,
            nodes,
            weights,
            full_to_reduced,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn n(&self) -> u32 {
        self.spec.n
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn degree(&self) -> u32 {
        self.spec.degree
    }

    pub fn nr(&self) -> usize {
        self.spec.nr
    }

    pub fn nt(&self) -> usize {
        self.spec.nt
    }

    /// Radial nodes, decreasing from `r = 1`.
    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial
    }

    /// First radial derivative acting on even functions.
    pub fn radial_d1(&self) -> &DMatrix<f64> {
        &self.d1
    }

    /// Second radial derivative acting on even functions.
    pub fn radial_d2(&self) -> &DMatrix<f64> {
        &self.d2
    }

    /// The `Nt` angles `2π i / Nt`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn fourier_d1(&self) -> &DMatrix<f64> {
        &self.f1
    }

    pub fn fourier_d2(&self) -> &DMatrix<f64> {
        &self.f2
    }

    /// Number of reduced torus nodes.
    pub fn torus_len(&self) -> usize {
        self.nodes.len()
    }

    /// Number of values in a grid function.
    pub fn len(&self) -> usize {
        self.torus_len() * self.nr()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-direction angle indices of reduced node `p`.
    pub fn node_indices(&self, p: usize) -> &[usize] {
        &self.nodes[p]
    }

    pub fn node_point(&self, p: usize) -> Vec<f64> {
        self.nodes[p].iter().map(|&i| self.angles[i]).collect()
    }

    /// Number of full-grid nodes represented by reduced node `p`.
    pub fn weight(&self, p: usize) -> f64 {
        self.weights[p]
    }

    pub fn full_len(&self) -> usize {
        self.full_to_reduced.len()
    }

    /// Reduced node holding the value at full-grid node `full`, whose angle
    /// indices are its base-`Nt` digits, most significant first.
    pub fn reduced_of_full(&self, full: usize) -> usize {
        self.full_to_reduced[full]
    }

    /// Reduced node of an arbitrary tuple of angle indices.
    pub fn reduced_of(&self, indices: &[usize]) -> usize {
        let nt = self.nt();
        let full = indices.iter().fold(0, |acc, &i| acc * nt + i % nt);
        self.full_to_reduced[full]
    }

    /// For reduced node `p` and direction `j`, the reduced nodes met when the
    /// `j`-th angle index runs through `0..Nt`.
    pub fn line(&self, p: usize, j: usize) -> Vec<usize> {
        let mut idx = self.nodes[p].clone();
        (0..self.nt())
            .map(|q| {
                idx[j] = q;
                self.reduced_of(&idx)
            })
            .collect()
    }

    /// Value at `r = 0` of the even interpolant through one radial column,
    /// by the barycentric formula on the full Chebyshev grid.
    pub fn axis_value(&self, column: &[f64]) -> f64 {
        let nr = self.nr();
        let big = 2 * nr - 1;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..=big {
            let (x, f) = if k < nr {
                (self.radial[k], column[k])
            } else {
                (-self.radial[big - k], column[big - k])
            };
            let mut w = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == 0 || k == big {
                w *= 0.5;
            }
            num += w * f / -x;
            den += w / -x;
        }
        num / den
    }

    /// Trapezoid weight `(2π/Nt)ᵐ` of one full-grid node.
    pub fn cell_measure(&self) -> f64 {
        (2.0 * PI / self.nt() as f64).powi(self.m() as i32)
    }
}

/// Positive Chebyshev nodes for `N = 2 nr - 1` with first and second
/// derivative matrices folded for even functions.
fn folded_chebyshev(nr: usize) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let big = 2 * nr - 1;
    let x: Vec<f64> = (0..=big)
        .map(|k| (PI * k as f64 / big as f64).cos())
        .collect();
    let c = |k: usize| {
        let base = if k == 0 || k == big { 2.0 } else { 1.0 };
        if k % 2 == 0 {
            base
        } else {
            -base
        }
    };
    let mut d = DMatrix::<f64>::zeros(big + 1, big + 1);
    for i in 0..=big {
        let mut row_sum = 0.0;
        for j in 0..=big {
            if i != j {
                // sin-difference form of x_i - x_j avoids cancellation.
                let diff = -2.0
                    * (PI * (i + j) as f64 / (2 * big) as f64).sin()
                    * (PI * (i as f64 - j as f64) / (2 * big) as f64).sin();
                let v = c(i) / c(j) / diff;
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    let mut dd = &d * &d;
    // Exact annihilation of constants sharpens the endpoint rows.
    for i in 0..=big {
        let off: f64 = (0..=big).filter(|&j| j != i).map(|j| dd[(i, j)]).sum();
        dd[(i, i)] = -off;
    }
    let mut d1 = DMatrix::zeros(nr, nr);
    let mut d2 = DMatrix::zeros(nr, nr);
    for i in 0..nr {
        for k in 0..nr {
            d1[(i, k)] = d[(i, k)] + d[(i, big - k)];
            d2[(i, k)] = dd[(i, k)] + dd[(i, big - k)];
        }
    }
    (x[..nr].to_vec(), d1, d2)
}

/// Equispaced periodic nodes and spectral differentiation matrices.
fn fourier(nt: usize) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let h = 2.0 * PI / nt as f64;
    let angles = (0..nt).map(|i| h * i as f64).collect();
    let mut f1 = DMatrix::zeros(nt, nt);
    let mut f2 = DMatrix::zeros(nt, nt);
    let diag = -PI * PI / (3.0 * h * h) - 1.0 / 6.0;
    for i in 0..nt {
        for j in 0..nt {
            if i == j {
                f2[(i, j)] = diag;
                continue;
            }
            let d = (i as isize - j as isize).rem_euclid(nt as isize) as usize;
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            let half = 0.5 * h * d as f64;
            f1[(i, j)] = 0.5 * sign / half.tan();
            f2[(i, j)] = -0.5 * sign / (half.sin() * half.sin());
        }
    }
    (angles, f1, f2)
}

fn canonical(idx: &[usize], nt: usize, symmetry: TorusSymmetry) -> Vec<usize> {
    match symmetry {
        TorusSymmetry::Full => idx.to_vec(),
        TorusSymmetry::Even | TorusSymmetry::EvenPermutation => {
            let mut c: Vec<usize> = idx.iter().map(|&i| i.min(nt - i)).collect();
            if symmetry == TorusSymmetry::EvenPermutation {
                c.sort_unstable_by(|a, b| b.cmp(a));
            }
            c
        }
    }
}

type Reduction = (Vec<Vec<usize>>, Vec<f64>, Vec<usize>);

fn reduce(m: usize, nt: usize, symmetry: TorusSymmetry) -> Reduction {
    let total = nt.pow(m as u32);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut lookup: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut map = Vec::with_capacity(total);
    let mut idx = vec![0usize; m];
    for _ in 0..total {
        let key = canonical(&idx, nt, symmetry);
        let next = nodes.len();
        let p = *lookup.entry(key.clone()).or_insert(next);
        if p == next {
            nodes.push(key);
            weights.push(0.0);
        }
        weights[p] += 1.0;
        map.push(p);
        for j in (0..m).rev() {
            idx[j] += 1;
            if idx[j] < nt {
                break;
            }
            idx[j] = 0;
        }
    }
    (nodes, weights, map)
}
