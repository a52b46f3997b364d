//! Lattice indices, lattice descriptors and finite windows.
//!
//! Points are ordered lexicographically on their coordinates; every dense
//! section built anywhere in the workspace uses that ordering.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

/// Largest supported index rank. Rank 3 only arises from direct sums of
/// rank-2 operators (the summand tag is the trailing coordinate).
pub const MAX_RANK: usize = 3;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index {
    coords: [i64; MAX_RANK],
    rank: u8,
}

impl Index {
    /// Panics if `coords` is empty or longer than [`MAX_RANK`].
    pub fn new(coords: &[i64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_RANK,
            "index rank must be in 1..={MAX_RANK}"
        );
        let mut c = [0; MAX_RANK];
        c[..coords.len()].copy_from_slice(coords);
        Index { coords: c, rank: coords.len() as u8 }
    }

    pub fn d1(k: i64) -> Self {
        Index::new(&[k])
    }

    pub fn d2(a: i64, b: i64) -> Self {
        Index::new(&[a, b])
    }

    pub fn zero(rank: usize) -> Self {
        Index::new(&[0; MAX_RANK][..rank])
    }

    /// Unit offset along `axis`, scaled by `step`.
    pub fn unit(rank: usize, axis: usize, step: i64) -> Self {
        let mut c = [0; MAX_RANK];
        c[axis] = step;
        Index::new(&c[..rank])
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.rank as usize]
    }

    #[inline]
    pub fn get(&self, axis: usize) -> i64 {
        self.coords()[axis]
    }

    /// Appends one trailing coordinate.
    pub fn push(&self, value: i64) -> Self {
        let r = self.rank();
        let mut c = self.coords;
        c[r] = value;
        Index { coords: c, rank: self.rank + 1 }
    }

    /// Splits off the trailing coordinate. Panics on rank-1 indices.
    pub fn split_last(&self) -> (Index, i64) {
        let r = self.rank();
        assert!(r >= 2, "cannot split a rank-1 index");
        (Index::new(&self.coords[..r - 1]), self.coords[r - 1])
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl Add for Index {
    type Output = Index;
    fn add(self, rhs: Index) -> Index {
        assert_eq!(self.rank, rhs.rank, "index rank mismatch");
        let mut c = self.coords;
        for (a, b) in c.iter_mut().zip(rhs.coords.iter()) {
            *a += *b;
        }
        Index { coords: c, rank: self.rank }
    }
}

impl Sub for Index {
    type Output = Index;
    fn sub(self, rhs: Index) -> Index {
        self + (-rhs)
    }
}

impl Neg for Index {
    type Output = Index;
    fn neg(self) -> Index {
        let mut c = self.coords;
        for a in c.iter_mut() {
            *a = -*a;
        }
        Index { coords: c, rank: self.rank }
    }
}

impl fmt::Debug for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// One coordinate axis of a product lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// `k ≥ 0`
    Natural,
    /// all integers
    Integer,
    /// `0 ≤ k < n` (an internal finite-dimensional coordinate)
    Finite(u32),
}

impl Axis {
    #[inline]
    pub fn contains(&self, k: i64) -> bool {
        match *self {
            Axis::Natural => k >= 0,
            Axis::Integer => true,
            Axis::Finite(n) => k >= 0 && k < n as i64,
        }
    }

    fn bounds(&self) -> (Option<i64>, Option<i64>) {
        match *self {
            Axis::Natural => (Some(0), None),
            Axis::Integer => (None, None),
            Axis::Finite(n) => (Some(0), Some(n as i64 - 1)),
        }
    }
}

/// Index set an operator acts on.
///
/// `Tagged(a, b)` is the disjoint union of `a` (trailing coordinate 0) and
/// `b` (trailing coordinate 1); both summands share a rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lattice {
    Grid(Vec<Axis>),
    Tagged(Arc<Lattice>, Arc<Lattice>),
}

impl Lattice {
    pub fn natural() -> Self {
        Lattice::Grid(vec![Axis::Natural])
    }

    pub fn integer() -> Self {
        Lattice::Grid(vec![Axis::Integer])
    }

    pub fn grid(axes: &[Axis]) -> Self {
        assert!(!axes.is_empty() && axes.len() <= MAX_RANK);
        Lattice::Grid(axes.to_vec())
    }

    pub fn tagged(left: Lattice, right: Lattice) -> Self {
        assert_eq!(left.rank(), right.rank(), "direct summands must share a rank");
        assert!(left.rank() < MAX_RANK);
        Lattice::Tagged(Arc::new(left), Arc::new(right))
    }

    pub fn rank(&self) -> usize {
        match self {
            Lattice::Grid(axes) => axes.len(),
            Lattice::Tagged(a, _) => a.rank() + 1,
        }
    }

    pub fn contains(&self, k: &Index) -> bool {
        if k.rank() != self.rank() {
            return false;
        }
        match self {
            Lattice::Grid(axes) => axes.iter().zip(k.coords()).all(|(a, &c)| a.contains(c)),
            Lattice::Tagged(a, b) => {
                let (sub, tag) = k.split_last();
                match tag {
                    0 => a.contains(&sub),
                    1 => b.contains(&sub),
                    _ => false,
                }
            }
        }
    }

    /// Summand lattice for a tag of a `Tagged` lattice.
    pub fn summand(&self, tag: i64) -> Option<&Lattice> {
        match (self, tag) {
            (Lattice::Tagged(a, _), 0) => Some(a),
            (Lattice::Tagged(_, b), 1) => Some(b),
            _ => None,
        }
    }

    /// Hull bounds of the lattice along `axis` (`None` = unbounded).
    pub fn axis_bounds(&self, axis: usize) -> (Option<i64>, Option<i64>) {
        match self {
            Lattice::Grid(axes) => axes[axis].bounds(),
            Lattice::Tagged(a, b) => {
                if axis == self.rank() - 1 {
                    return (Some(0), Some(1));
                }
                let (alo, ahi) = a.axis_bounds(axis);
                let (blo, bhi) = b.axis_bounds(axis);
                let lo = match (alo, blo) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    _ => None,
                };
                let hi = match (ahi, bhi) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    _ => None,
                };
                (lo, hi)
            }
        }
    }

    /// Largest distance from `k` to the lower face of a half-infinite axis
    /// (0 on `ℤ` and finite axes). Tagged lattices use the summand of `k`.
    pub fn depth(&self, k: &Index) -> i64 {
        match self {
            Lattice::Grid(axes) => axes
                .iter()
                .zip(k.coords())
                .map(|(a, &c)| match a.bounds() {
                    (Some(lo), None) => (c - lo).max(0),
                    _ => 0,
                })
                .max()
                .unwrap_or(0),
            Lattice::Tagged(..) => {
                let (sub, tag) = k.split_last();
                self.summand(tag).map_or(0, |s| s.depth(&sub))
            }
        }
    }

    /// Axes along which the lattice is unbounded in at least one direction.
    pub fn is_unbounded_axis(&self, axis: usize) -> bool {
        let (lo, hi) = self.axis_bounds(axis);
        lo.is_none() || hi.is_none()
    }

    /// Lattice points inside a box, lexicographic order.
    pub fn points_in(&self, window: &Window) -> Vec<Index> {
        let r = self.rank();
        assert_eq!(window.lo.rank(), r);
        let lo = window.lo.coords();
        let hi = window.hi.coords();
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cur: Vec<i64> = lo.to_vec();
        loop {
            let idx = Index::new(&cur);
            if self.contains(&idx) {
                out.push(idx);
            }
            // odometer, last coordinate fastest
            let mut axis = r;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < hi[axis] {
                    cur[axis] += 1;
                    for a in axis + 1..r {
                        cur[a] = lo[a];
                    }
                    break;
                }
            }
        }
    }

    /// Bounding box of `support` padded by `guard` on every axis, clamped to
    /// the lattice hull.
    pub fn padded_box(&self, support: &[Index], guard: i64) -> Window {
        let r = self.rank();
        let mut lo = [i64::MAX; MAX_RANK];
        let mut hi = [i64::MIN; MAX_RANK];
        for k in support {
            for a in 0..r {
                lo[a] = lo[a].min(k.get(a));
                hi[a] = hi[a].max(k.get(a));
            }
        }
        if support.is_empty() {
            lo = [0; MAX_RANK];
            hi = [0; MAX_RANK];
        }
        for a in 0..r {
            let (blo, bhi) = self.axis_bounds(a);
            lo[a] = lo[a].saturating_sub(guard);
            hi[a] = hi[a].saturating_add(guard);
            if let Some(b) = blo {
                lo[a] = lo[a].max(b);
            }
            if let Some(b) = bhi {
                hi[a] = hi[a].min(b);
            }
        }
        Window { lo: Index::new(&lo[..r]), hi: Index::new(&hi[..r]) }
    }

    /// Window of extent `n` used by the windowed diagnostics: `0..n` on
    /// natural axes, a centred run of `n` integers on integer axes, and the
    /// full range of bounded axes.
    pub fn standard_window(&self, n: usize) -> Window {
        let r = self.rank();
        let n = n.max(1) as i64;
        let mut lo = [0; MAX_RANK];
        let mut hi = [0; MAX_RANK];
        for a in 0..r {
            match self.axis_bounds(a) {
                (Some(l), Some(h)) => {
                    lo[a] = l;
                    hi[a] = h;
                }
                (Some(l), None) => {
                    lo[a] = l;
                    hi[a] = l + n - 1;
                }
                (None, Some(h)) => {
                    lo[a] = h - n + 1;
                    hi[a] = h;
                }
                (None, None) => {
                    lo[a] = -(n / 2);
                    hi[a] = lo[a] + n - 1;
                }
            }
        }
        Window { lo: Index::new(&lo[..r]), hi: Index::new(&hi[..r]) }
    }

    /// The first `count` lattice points ordered by shell (largest absolute
    /// coordinate over unbounded axes), then lexicographically. On `ℕ` this
    /// is `0, 1, 2, …`; on `ℤ` it is `0, -1, 1, -2, 2, …`.
    pub fn first_points(&self, count: usize) -> Vec<Index> {
        let r = self.rank();
        let unbounded: Vec<usize> = (0..r).filter(|&a| self.is_unbounded_axis(a)).collect();
        let mut out: Vec<Index> = Vec::new();
        let mut shell = 0i64;
        while out.len() < count {
            let mut lo = [0; MAX_RANK];
            let mut hi = [0; MAX_RANK];
            for a in 0..r {
                let (blo, bhi) = self.axis_bounds(a);
                lo[a] = blo.unwrap_or(-shell);
                hi[a] = bhi.unwrap_or(shell);
            }
            let window = Window { lo: Index::new(&lo[..r]), hi: Index::new(&hi[..r]) };
            for p in self.points_in(&window) {
                let s = unbounded.iter().map(|&a| p.get(a).abs()).max().unwrap_or(0);
                if s == shell {
                    out.push(p);
                    if out.len() == count {
                        break;
                    }
                }
            }
            if unbounded.is_empty() {
                break;
            }
            shell += 1;
        }
        out
    }
}

/// Inclusive coordinate box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: Index,
    pub hi: Index,
}

impl Window {
    pub fn new(lo: Index, hi: Index) -> Self {
        assert_eq!(lo.rank(), hi.rank());
        Window { lo, hi }
    }

    pub fn contains(&self, k: &Index) -> bool {
        k.rank() == self.lo.rank()
            && k.coords()
                .iter()
                .zip(self.lo.coords().iter().zip(self.hi.coords()))
                .all(|(c, (l, h))| c >= l && c <= h)
    }

    /// Distance from `k` to the nearest face of the box that is a truncation
    /// (i.e. not also a face of the lattice hull).
    pub fn edge_distance(&self, lattice: &Lattice, k: &Index) -> i64 {
        let mut d = i64::MAX;
        for a in 0..k.rank() {
            let (blo, bhi) = lattice.axis_bounds(a);
            if blo.map_or(true, |b| b < self.lo.get(a)) {
                d = d.min(k.get(a) - self.lo.get(a));
            }
            if bhi.map_or(true, |b| b > self.hi.get(a)) {
                d = d.min(self.hi.get(a) - k.get(a));
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points_on_half_line_and_line() {
        let n = Lattice::natural().first_points(4);
        assert_eq!(n, vec![Index::d1(0), Index::d1(1), Index::d1(2), Index::d1(3)]);
        let z = Lattice::integer().first_points(5);
        assert_eq!(z, vec![Index::d1(0), Index::d1(-1), Index::d1(1), Index::d1(-2), Index::d1(2)]);
    }

    #[test]
    fn first_points_block_lattice_covers_internal_axis() {
        let l = Lattice::grid(&[Axis::Natural, Axis::Finite(2)]);
        let p = l.first_points(4);
        assert_eq!(p, vec![Index::d2(0, 0), Index::d2(0, 1), Index::d2(1, 0), Index::d2(1, 1)]);
    }

    #[test]
    fn first_points_finite_lattice_terminates() {
        let l = Lattice::grid(&[Axis::Finite(3)]);
        assert_eq!(l.first_points(10).len(), 3);
    }

    #[test]
    fn tagged_lattice_membership() {
        let l = Lattice::tagged(Lattice::integer(), Lattice::natural());
        assert!(l.contains(&Index::d2(-4, 0)));
        assert!(!l.contains(&Index::d2(-4, 1)));
        assert!(l.contains(&Index::d2(4, 1)));
        assert!(!l.contains(&Index::d2(0, 2)));
        assert_eq!(l.axis_bounds(0), (None, None));
        assert_eq!(l.axis_bounds(1), (Some(0), Some(1)));
    }

    #[test]
    fn padded_box_clamps_to_hull() {
        let l = Lattice::natural();
        let w = l.padded_box(&[Index::d1(2), Index::d1(5)], 4);
        assert_eq!(w, Window::new(Index::d1(0), Index::d1(9)));
        assert_eq!(l.points_in(&w).len(), 10);
    }

    #[test]
    fn points_in_is_lexicographic() {
        let l = Lattice::grid(&[Axis::Natural, Axis::Natural]);
        let pts = l.points_in(&Window::new(Index::d2(0, 0), Index::d2(1, 1)));
        assert_eq!(pts, vec![Index::d2(0, 0), Index::d2(0, 1), Index::d2(1, 0), Index::d2(1, 1)]);
    }

    #[test]
    fn depth_counts_distance_to_half_line_faces() {
        assert_eq!(Lattice::natural().depth(&Index::d1(7)), 7);
        assert_eq!(Lattice::integer().depth(&Index::d1(-7)), 0);
        let sum = Lattice::tagged(Lattice::integer(), Lattice::natural());
        assert_eq!(sum.depth(&Index::d2(5, 0)), 0);
        assert_eq!(sum.depth(&Index::d2(5, 1)), 5);
        let block = Lattice::grid(&[Axis::Natural, Axis::Finite(3)]);
        assert_eq!(block.depth(&Index::d2(4, 2)), 4);
    }

    #[test]
    fn standard_window_centres_integer_axes() {
        let w = Lattice::integer().standard_window(4);
        assert_eq!(w, Window::new(Index::d1(-2), Index::d1(1)));
    }

    #[test]
    fn edge_distance_ignores_lattice_faces() {
        let l = Lattice::natural();
        let w = Window::new(Index::d1(0), Index::d1(10));
        assert_eq!(w.edge_distance(&l, &Index::d1(0)), 10);
        assert_eq!(w.edge_distance(&l, &Index::d1(7)), 3);
    }
}
