use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A cosine mode index `k ∈ ℕ₀ᵐ`, stored as the sorted-descending
/// representative of its permutation orbit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(mut entries: Vec<u32>) -> Self {
        entries.sort_unstable_by(|a, b| b.cmp(a));
        MultiIndex(entries)
    }

    pub fn zero(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    /// `(1, 0, …, 0)`, the canonical index of the first shell `|k| = 1`.
    pub fn first_shell(m: usize) -> Self {
        let mut k = vec![0; m];
        k[0] = 1;
        MultiIndex(k)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    /// `|k|²`, the integer shell label.
    pub fn ell2(&self) -> u32 {
        self.0.iter().map(|&k| k * k).sum()
    }

    /// `|k|`.
    pub fn ell(&self) -> f64 {
        (self.ell2() as f64).sqrt()
    }

    pub fn max_entry(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|&&k| k != 0).count()
    }

    /// `m! / ∏ (multiplicity)!`.
    pub fn orbit_size(&self) -> usize {
        let mut size = factorial(self.m());
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j < self.0.len() && self.0[j] == self.0[i] {
                j += 1;
            }
            size /= factorial(j - i);
            i = j;
        }
        size
    }

    /// Every distinct permutation of the entries, in lexicographic order.
    pub fn orbit(&self) -> Vec<Vec<u32>> {
        let mut current: Vec<u32> = self.0.iter().rev().copied().collect();
        let mut out = vec![current.clone()];
        while next_permutation(&mut current) {
            out.push(current.clone());
        }
        out
    }

    /// `∫_{[0,2π]ᵐ} ω_k² dt` for any single member `ω_k = ∏ cos(k_j t_j)` of the orbit.
    pub fn mode_norm_sq(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.m() as i32) / 2f64.powi(self.nonzero_count() as i32)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// The canonical indices with `|k|∞ ≤ degree`, ordered by shell `|k|²` and
/// then lexicographically. Shells are contiguous in this order.
#[derive(Debug, PartialEq)]
pub struct ModeBasis {
    m: usize,
    degree: u32,
    indices: Vec<MultiIndex>,
    orbits: Vec<Vec<Vec<u32>>>,
    lookup: HashMap<MultiIndex, usize>,
}

impl ModeBasis {
    pub fn new(m: usize, degree: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Invalid("torus dimension m must be at least 1".into()));
        }
        let mut indices = Vec::new();
        let mut buf = Vec::with_capacity(m);
        enumerate(m, degree, &mut buf, &mut indices);
        indices.sort_by(|a, b| a.ell2().cmp(&b.ell2()).then_with(|| a.cmp(b)));
        let orbits = indices.iter().map(MultiIndex::orbit).collect();
        let lookup = indices.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        Ok(ModeBasis {
            m,
            degree,
            indices,
            orbits,
            lookup,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn orbit(&self, i: usize) -> &[Vec<u32>] {
        &self.orbits[i]
    }

    /// Position of the canonical form of `k`, if it lies in the basis.
    pub fn position(&self, k: &[u32]) -> Option<usize> {
        if k.len() != self.m {
            return None;
        }
        self.lookup.get(&MultiIndex::new(k.to_vec())).copied()
    }
}

fn enumerate(m: usize, bound: u32, buf: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if buf.len() == m {
        out.push(MultiIndex(buf.clone()));
        return;
    }
    for k in (0..=bound).rev() {
        buf.push(k);
        enumerate(m, k, buf, out);
        buf.pop();
    }
}
