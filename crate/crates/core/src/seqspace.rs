//! Finitely supported complex sequences on an integer lattice.
//!
//! Inner products are linear in the first argument and conjugate-linear in
//! the second: `inner(u, v) = Σ u(k) · conj(v(k))`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::C64;

/// Finitely supported vector. Stored entries are never exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FinVec {
    rank: u8,
    entries: BTreeMap<Index, C64>,
}

impl FinVec {
    pub fn zeros(rank: usize) -> Self {
        FinVec { rank: rank as u8, entries: BTreeMap::new() }
    }

    /// Basis vector `e_k`.
    pub fn basis(k: Index) -> Self {
        let mut v = FinVec::zeros(k.rank());
        v.entries.insert(k, C64::new(1.0, 0.0));
        v
    }

    pub fn from_entries<I>(rank: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Index, C64)>,
    {
        let mut v = FinVec::zeros(rank);
        for (k, x) in entries {
            if k.rank() != rank {
                return Err(Error::RankMismatch { expected: rank, found: k.rank() });
            }
            v.add_at(k, x);
        }
        Ok(v)
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    pub fn get(&self, k: &Index) -> C64 {
        self.entries.get(k).copied().unwrap_or_default()
    }

    /// Accumulates `x` at `k`, dropping the entry if it cancels to exactly 0.
    pub fn add_at(&mut self, k: Index, x: C64) {
        debug_assert_eq!(k.rank(), self.rank());
        if x == C64::new(0.0, 0.0) {
            return;
        }
        let slot = self.entries.entry(k).or_default();
        *slot += x;
        if *slot == C64::new(0.0, 0.0) {
            self.entries.remove(&k);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index, &C64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True iff every entry is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> Vec<Index> {
        self.entries.keys().copied().collect()
    }

    pub fn scale(&self, a: C64) -> FinVec {
        let mut out = FinVec::zeros(self.rank());
        for (k, x) in &self.entries {
            out.add_at(*k, a * x);
        }
        out
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: C64, other: &FinVec) -> FinVec {
        assert_eq!(self.rank, other.rank, "vector rank mismatch");
        let mut out = self.clone();
        for (k, x) in &other.entries {
            out.add_at(*k, a * x);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    /// Optional epsilon prune for series tails; entries with modulus `<= eps`
    /// are dropped. Nothing calls this implicitly.
    pub fn pruned(&self, eps: f64) -> FinVec {
        FinVec {
            rank: self.rank,
            entries: self.entries.iter().filter(|(_, x)| x.norm() > eps).map(|(k, x)| (*k, *x)).collect(),
        }
    }

    /// Keeps the entries whose index satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Index) -> bool) -> FinVec {
        FinVec {
            rank: self.rank,
            entries: self.entries.iter().filter(|(k, _)| keep(k)).map(|(k, x)| (*k, *x)).collect(),
        }
    }
}

impl Add for &FinVec {
    type Output = FinVec;
    fn add(self, rhs: &FinVec) -> FinVec {
        self.axpy(C64::new(1.0, 0.0), rhs)
    }
}

impl Sub for &FinVec {
    type Output = FinVec;
    fn sub(self, rhs: &FinVec) -> FinVec {
        self.axpy(C64::new(-1.0, 0.0), rhs)
    }
}

/// `Σ u(k)·conj(v(k))`.
pub fn inner(u: &FinVec, v: &FinVec) -> Result<C64> {
    if u.rank != v.rank {
        return Err(Error::RankMismatch { expected: u.rank(), found: v.rank() });
    }
    let (small, large, flip) =
        if u.entries.len() <= v.entries.len() { (u, v, false) } else { (v, u, true) };
    let mut acc = C64::new(0.0, 0.0);
    for (k, x) in &small.entries {
        if let Some(y) = large.entries.get(k) {
            acc += if flip { y * x.conj() } else { x * y.conj() };
        }
    }
    Ok(acc)
}

pub fn norm(u: &FinVec) -> f64 {
    let s: f64 = u.entries.values().fold(0.0, |a, x| a + x.norm_sqr());
    libm::sqrt(s)
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
///
/// A vector is dropped when what is left of it after projection has norm
/// below `tol · max_input_norm`.
pub fn orthonormalize(vs: &[FinVec], tol: f64) -> Vec<FinVec> {
    assert!(tol > 0.0, "tolerance must be positive");
    let scale = vs.iter().map(norm).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut basis: Vec<FinVec> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _pass in 0..2 {
            for q in &basis {
                let c = inner(&w, q).expect("rank checked by caller");
                w = w.axpy(-c, q);
            }
        }
        let n = norm(&w);
        if n >= tol * scale {
            basis.push(w.scale(C64::new(1.0 / n, 0.0)));
        }
    }
    basis
}
