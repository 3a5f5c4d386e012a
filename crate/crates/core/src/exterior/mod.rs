//! Exterior algebra on ℝⁿ with the Euclidean metric and the orientation
//! `dx_1 ∧ … ∧ dx_n`.

mod form;
mod json;
mod ops;

pub use form::Form;
pub use json::{form_from_json, form_to_json, FormJson, TermJson};
pub use ops::{
    codiff_sign, codiff_terms, codifferential, d, d_terms, fd_codifferential, fd_codifferential_at,
    fd_d, fd_d_at, hodge_star, l2_inner, laplacian, wedge, DerivTerm, L2Inner,
};

use std::fmt;

use crate::error::{Error, Result};

/// Strictly increasing multi-index `I = (i_1 < … < i_q)` over `1..=n`, stored 0-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    n: usize,
    entries: Vec<usize>,
}

impl MultiIndex {
    /// From 1-based entries, as written `dx_1 ∧ dx_3`.
    pub fn new(n: usize, one_based: &[usize]) -> Result<Self> {
        let entries: Vec<usize> = one_based.iter().map(|&i| i.wrapping_sub(1)).collect();
        Self::from_zero_based(n, entries).map_err(|_| Error::InvalidMultiIndex(one_based.to_vec()))
    }

    pub fn from_zero_based(n: usize, entries: Vec<usize>) -> Result<Self> {
        let increasing = entries.windows(2).all(|w| w[0] < w[1]);
        if !increasing || entries.iter().any(|&i| i >= n) || entries.len() > n {
            return Err(Error::InvalidMultiIndex(entries.iter().map(|i| i.wrapping_add(1)).collect()));
        }
        Ok(MultiIndex { n, entries })
    }

    pub fn empty(n: usize) -> Self {
        MultiIndex { n, entries: Vec::new() }
    }

    /// `(1, …, n)`
    pub fn full(n: usize) -> Self {
        MultiIndex { n, entries: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 0-based entries.
    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.entries.iter().map(|i| i + 1).collect()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.entries.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> MultiIndex {
        MultiIndex { n: self.n, entries: (0..self.n).filter(|i| !self.contains(*i)).collect() }
    }

    /// All increasing multi-indices of length `q`, in lexicographic order.
    pub fn all(n: usize, q: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, q: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == q {
                out.push(MultiIndex { n, entries: cur.clone() });
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(n, q, i + 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if q <= n {
            rec(n, q, 0, &mut Vec::new(), &mut out);
        }
        out
    }

    /// Position of this index in [`MultiIndex::all`]`(n, len)`.
    pub fn position(&self) -> usize {
        let q = self.entries.len();
        let mut pos = 0;
        let mut prev = 0;
        for (slot, &e) in self.entries.iter().enumerate() {
            for skipped in prev..e {
                pos += binomial(self.n - skipped - 1, q - slot - 1);
            }
            prev = e + 1;
        }
        pos
    }

    /// `dx_I ∧ dx_J = sign · dx_{I∪J}`, or `None` when the indices overlap.
    pub fn wedge(&self, other: &MultiIndex) -> Option<(MultiIndex, bool)> {
        let mut inversions = 0usize;
        for &a in &self.entries {
            if other.contains(a) {
                return None;
            }
            inversions += other.entries.iter().filter(|&&b| b < a).count();
        }
        let mut merged: Vec<usize> = self.entries.iter().chain(&other.entries).copied().collect();
        merged.sort_unstable();
        Some((MultiIndex { n: self.n, entries: merged }, inversions % 2 == 1))
    }

    /// `dx_j ∧ dx_I`, or `None` when `j ∈ I`.
    pub fn insert(&self, j: usize) -> Option<(MultiIndex, bool)> {
        MultiIndex { n: self.n, entries: vec![j] }.wedge(self)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.entries.iter().map(|i| format!("dx{}", i + 1)).collect();
        write!(f, "{}", parts.join("∧"))
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_follow_lexicographic_order() {
        for n in 1..=6 {
            for q in 0..=n {
                let all = MultiIndex::all(n, q);
                assert_eq!(all.len(), binomial(n, q));
                for (k, idx) in all.iter().enumerate() {
                    assert_eq!(idx.position(), k, "{idx} in n={n}");
                }
            }
        }
    }

    #[test]
    fn rejects_non_increasing() {
        assert!(MultiIndex::new(3, &[2, 1]).is_err());
        assert!(MultiIndex::new(3, &[1, 1]).is_err());
        assert!(MultiIndex::new(3, &[4]).is_err());
        assert!(MultiIndex::new(3, &[0]).is_err());
        assert!(MultiIndex::new(3, &[1, 3]).is_ok());
    }

    #[test]
    fn wedge_signs() {
        let i = |v: &[usize]| MultiIndex::new(3, v).unwrap();
        assert_eq!(i(&[1]).wedge(&i(&[2])), Some((i(&[1, 2]), false)));
        assert_eq!(i(&[2]).wedge(&i(&[1])), Some((i(&[1, 2]), true)));
        assert_eq!(i(&[1]).wedge(&i(&[1])), None);
        assert_eq!(i(&[3]).wedge(&i(&[1, 2])), Some((i(&[1, 2, 3]), false)));
        assert_eq!(i(&[2]).wedge(&i(&[1, 3])), Some((i(&[1, 2, 3]), true)));
    }
}
