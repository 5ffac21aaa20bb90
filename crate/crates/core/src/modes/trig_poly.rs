use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::multi_index::{ModeBasis, MultiIndex};
use crate::{Error, Result};

/// An even, 2π-periodic, permutation-invariant function on `Tᵐ`:
///
/// ```text
/// f(t) = Σ_k c_k Σ_{p ∈ orbit(k)} ∏_j cos(p_j t_j)
/// ```
///
/// with one coefficient per canonical index `k`, `|k|∞ ≤ degree`. Symmetry
/// holds by construction.
#[derive(Clone, Debug)]
pub struct SymmetricTrigPolynomial {
    basis: Arc<ModeBasis>,
    coeffs: Vec<f64>,
}

/// Value, gradient and diagonal of the Hessian at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointValue {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess_diag: Vec<f64>,
}

impl PartialEq for SymmetricTrigPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.m() == other.m() && self.degree() == other.degree() && self.coeffs == other.coeffs
    }
}

impl SymmetricTrigPolynomial {
    pub fn zeros(m: usize, degree: u32) -> Result<Self> {
        let basis = Arc::new(ModeBasis::new(m, degree)?);
        Ok(Self::from_basis(basis))
    }

    pub fn from_basis(basis: Arc<ModeBasis>) -> Self {
        let coeffs = vec![0.0; basis.len()];
        SymmetricTrigPolynomial { basis, coeffs }
    }

    pub fn from_coeffs(basis: Arc<ModeBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Invalid(format!(
                "expected {} coefficients, got {}",
                basis.len(),
                coeffs.len()
            )));
        }
        Ok(SymmetricTrigPolynomial { basis, coeffs })
    }

    pub fn constant(m: usize, degree: u32, value: f64) -> Result<Self> {
        let mut p = Self::zeros(m, degree)?;
        p.coeffs[0] = value;
        Ok(p)
    }

    /// The symmetrized mode `Σ_{p ∈ orbit(k)} ω_p`.
    pub fn mode(m: usize, degree: u32, k: &[u32]) -> Result<Self> {
        let mut p = Self::zeros(m, degree)?;
        p.set_coeff(k, 1.0)?;
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.basis.m()
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree()
    }

    pub fn basis(&self) -> &Arc<ModeBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: &[u32]) -> Option<f64> {
        self.basis.position(k).map(|i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, k: &[u32], value: f64) -> Result<()> {
        let i = self.basis.position(k).ok_or_else(|| {
            Error::Invalid(format!("mode {k:?} outside m = {}, K = {}", self.m(), self.degree()))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.basis.indices().iter().zip(self.coeffs.iter().copied())
    }

    /// Copy with a different truncation degree; coefficients above the new
    /// degree are dropped.
    pub fn with_degree(&self, degree: u32) -> Self {
        if degree == self.degree() {
            return self.clone();
        }
        let basis = Arc::new(ModeBasis::new(self.m(), degree).expect("m >= 1"));
        let mut out = Self::from_basis(basis);
        for (k, c) in self.iter() {
            if let Some(i) = out.basis.position(k.entries()) {
                out.coeffs[i] = c;
            }
        }
        out
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        if self.m() != other.m() {
            return Err(Error::Invalid(format!(
                "torus dimensions differ: {} vs {}",
                self.m(),
                other.m()
            )));
        }
        let degree = self.degree().max(other.degree());
        Ok((self.with_degree(degree), other.with_degree(degree)))
    }

    /// `self + alpha * other`, at the larger of the two degrees.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        let (mut a, b) = self.aligned(other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += alpha * y;
        }
        Ok(a)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= alpha);
        out
    }

    pub fn add_constant(&self, value: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// Largest coefficient magnitude on the shell `|k|² = ell2`.
    pub fn shell_magnitude(&self, ell2: u32) -> f64 {
        self.iter()
            .filter(|(k, _)| k.ell2() == ell2)
            .fold(0.0, |acc, (_, c)| acc.max(c.abs()))
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        let tables = CosTables::new(t, self.degree());
        let mut value = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let sum: f64 = self
                .basis
                .orbit(i)
                .iter()
                .map(|p| p.iter().enumerate().map(|(j, &q)| tables.cos(j, q)).product::<f64>())
                .sum();
            value += c * sum;
        }
        value
    }

    pub fn eval_with_derivatives(&self, t: &[f64]) -> PointValue {
        let m = self.m();
        let tables = CosTables::new(t, self.degree());
        let mut out = PointValue {
            value: 0.0,
            grad: vec![0.0; m],
            hess_diag: vec![0.0; m],
        };
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for p in self.basis.orbit(i) {
                let full: f64 = p.iter().enumerate().map(|(j, &q)| tables.cos(j, q)).product();
                out.value += c * full;
                for j in 0..m {
                    let q = p[j];
                    if q == 0 {
                        continue;
                    }
                    let others: f64 = p
                        .iter()
                        .enumerate()
                        .filter(|&(l, _)| l != j)
                        .map(|(l, &ql)| tables.cos(l, ql))
                        .product();
                    let qf = q as f64;
                    out.grad[j] -= c * qf * tables.sin(j, q) * others;
                    out.hess_diag[j] -= c * qf * qf * full;
                }
            }
        }
        out
    }

    /// Minimum over a uniform grid of `points_per_pi + 1` samples per
    /// direction on `[0, π]`, which covers the torus by evenness and
    /// periodicity. Returns the value and its location.
    pub fn sampled_minimum(&self, points_per_pi: usize) -> (f64, Vec<f64>) {
        let m = self.m();
        let count = points_per_pi + 1;
        let ts: Vec<f64> = (0..count)
            .map(|i| std::f64::consts::PI * i as f64 / points_per_pi as f64)
            .collect();
        let degree = self.degree() as usize;
        let table: Vec<Vec<f64>> = ts
            .iter()
            .map(|&t| (0..=degree).map(|q| (q as f64 * t).cos()).collect())
            .collect();
        let mut best = (f64::INFINITY, vec![0.0; m]);
        let mut idx = vec![0usize; m];
        // Permutation symmetry: non-increasing sample indices suffice.
        loop {
            let mut value = 0.0;
            for (i, &c) in self.coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let sum: f64 = self
                    .basis
                    .orbit(i)
                    .iter()
                    .map(|p| p.iter().zip(&idx).map(|(&q, &s)| table[s][q as usize]).product::<f64>())
                    .sum();
                value += c * sum;
            }
            if value < best.0 {
                best = (value, idx.iter().map(|&s| ts[s]).collect());
            }
            // Next non-increasing index tuple.
            let mut j = m;
            loop {
                if j == 0 {
                    return best;
                }
                j -= 1;
                let cap = if j == 0 { count - 1 } else { idx[j - 1] };
                if idx[j] < cap {
                    idx[j] += 1;
                    for v in idx.iter_mut().skip(j + 1) {
                        *v = 0;
                    }
                    break;
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolyJson::from(self)).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PolyJson = serde_json::from_str(text)?;
        Self::try_from(raw)
    }
}

struct CosTables {
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl CosTables {
    fn new(t: &[f64], degree: u32) -> Self {
        let cos = t
            .iter()
            .map(|&tj| (0..=degree).map(|q| (q as f64 * tj).cos()).collect())
            .collect();
        let sin = t
            .iter()
            .map(|&tj| (0..=degree).map(|q| (q as f64 * tj).sin()).collect())
            .collect();
        CosTables { cos, sin }
    }

    fn cos(&self, j: usize, q: u32) -> f64 {
        self.cos[j][q as usize]
    }

    fn sin(&self, j: usize, q: u32) -> f64 {
        self.sin[j][q as usize]
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    k: Vec<u32>,
    c: f64,
}

/// Wire form: `{"m": int, "K": int, "coeffs": [{"k": [...], "c": float}]}`.
#[derive(Serialize, Deserialize)]
pub(crate) struct PolyJson {
    m: usize,
    #[serde(rename = "K")]
    degree: u32,
    coeffs: Vec<CoeffJson>,
}

impl From<&SymmetricTrigPolynomial> for PolyJson {
    fn from(p: &SymmetricTrigPolynomial) -> Self {
        PolyJson {
            m: p.m(),
            degree: p.degree(),
            coeffs: p
                .iter()
                .map(|(k, c)| CoeffJson {
                    k: k.entries().to_vec(),
                    c,
                })
                .collect(),
        }
    }
}

impl TryFrom<PolyJson> for SymmetricTrigPolynomial {
    type Error = Error;

    fn try_from(raw: PolyJson) -> Result<Self> {
        let mut p = SymmetricTrigPolynomial::zeros(raw.m, raw.degree)?;
        let mut seen = vec![false; p.basis.len()];
        for entry in raw.coeffs {
            let i = p.basis.position(&entry.k).ok_or_else(|| {
                Error::Invalid(format!("mode {:?} outside m = {}, K = {}", entry.k, raw.m, raw.degree))
            })?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Invalid(format!("mode {:?} listed twice", entry.k)));
            }
            if !entry.c.is_finite() {
                return Err(Error::Invalid(format!("coefficient of {:?} is not finite", entry.k)));
            }
            p.coeffs[i] = entry.c;
        }
        Ok(p)
    }
}

impl Serialize for SymmetricTrigPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymmetricTrigPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        SymmetricTrigPolynomial::try_from(raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_shape_evaluates_to_cosine_sum() {
        let mut p = SymmetricTrigPolynomial::zeros(2, 3).unwrap();
        p.set_coeff(&[1, 0], 1.0).unwrap();
        let t = [0.3, 1.1];
        assert!((p.eval(&t) - (0.3f64.cos() + 1.1f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_closed_form() {
        // f = cos(2t1)cos(t2) + cos(t1)cos(2t2) + 0.5
        let mut p = SymmetricTrigPolynomial::constant(2, 2, 0.5).unwrap();
        p.set_coeff(&[2, 1], 1.0).unwrap();
        let (a, b) = (0.4f64, 1.3f64);
        let v = p.eval_with_derivatives(&[a, b]);
        let f = (2.0 * a).cos() * b.cos() + a.cos() * (2.0 * b).cos() + 0.5;
        let fa = -2.0 * (2.0 * a).sin() * b.cos() - a.sin() * (2.0 * b).cos();
        let faa = -4.0 * (2.0 * a).cos() * b.cos() - a.cos() * (2.0 * b).cos();
        assert!((v.value - f).abs() < 1e-14);
        assert!((v.grad[0] - fa).abs() < 1e-14);
        assert!((v.hess_diag[0] - faa).abs() < 1e-14);
    }

    #[test]
    fn json_wire_format() {
        let mut p = SymmetricTrigPolynomial::zeros(2, 1).unwrap();
        p.set_coeff(&[1, 0], 0.25).unwrap();
        assert_eq!(
            p.to_json(),
            r#"{"m":2,"K":1,"coeffs":[{"k":[0,0],"c":0.0},{"k":[1,0],"c":0.25},{"k":[1,1],"c":0.0}]}"#
        );
        let back = SymmetricTrigPolynomial::from_json(r#"{"m":2,"K":1,"coeffs":[{"k":[0,1],"c":0.25}]}"#)
            .unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn json_rejects_bad_modes() {
        assert!(SymmetricTrigPolynomial::from_json(r#"{"m":1,"K":1,"coeffs":[{"k":[2],"c":1.0}]}"#).is_err());
        assert!(SymmetricTrigPolynomial::from_json(
            r#"{"m":1,"K":1,"coeffs":[{"k":[1],"c":1.0},{"k":[1],"c":2.0}]}"#
        )
        .is_err());
        assert!(SymmetricTrigPolynomial::from_json(r#"{"m":1,"K":1,"coeffs":[{"k":[0,0],"c":1.0}]}"#).is_err());
    }

    #[test]
    fn sampled_minimum_finds_trough() {
        let mut p = SymmetricTrigPolynomial::constant(2, 1, 1.0).unwrap();
        p.set_coeff(&[1, 0], 0.3).unwrap();
        let (min, at) = p.sampled_minimum(32);
        assert!((min - 0.4).abs() < 1e-14);
        assert!(at.iter().all(|&t| (t - std::f64::consts::PI).abs() < 1e-14));
    }
}
