//! Band operators on lattice sequence spaces.
//!
//! A leaf operator is a list of bands `(offset, weight)` acting as
//! `(Tu)(k + offset) += weight(k) · u(k)`. Contributions landing outside the
//! lattice are dropped, which realizes the `T*e_0 = 0` boundary of unilateral
//! shifts. Products whose weights have no cheap closed form are kept as
//! composition nodes and applied factor by factor.
//!
//! `T⁻ = (T*T)⁻¹T*` is never formed. [`solve_gram`] applies `(T*T)⁻¹` to one
//! vector at a time on a guarded finite section and certifies the result
//! against the exact band Gram operator.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{cholesky_solve, hermitian_eigen, SparseSquare};
use crate::error::{Error, Result};
use crate::index::{Index, Lattice, Window};
use crate::seqspace::FinVec;
use crate::weight::BandWeight;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub offset: Index,
    pub weight: BandWeight,
}

#[derive(Debug, PartialEq)]
enum Node {
    Bands(Vec<Band>),
    /// `left ∘ right`
    Compose(BandOp, BandOp),
    /// Block diagonal on a tagged lattice.
    DirectSum(BandOp, BandOp),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandOp {
    lattice: Arc<Lattice>,
    node: Arc<Node>,
    offsets: Vec<Index>,
}

impl BandOp {
    /// Leaf operator from explicit bands. Bands sharing an offset are merged.
    pub fn from_bands(lattice: Lattice, bands: Vec<Band>) -> Result<Self> {
        for b in &bands {
            if b.offset.rank() != lattice.rank() {
                return Err(Error::RankMismatch { expected: lattice.rank(), found: b.offset.rank() });
            }
        }
        Ok(Self::leaf(Arc::new(lattice), bands))
    }

    fn leaf(lattice: Arc<Lattice>, bands: Vec<Band>) -> Self {
        let mut merged: BTreeMap<Index, Vec<BandWeight>> = BTreeMap::new();
        for b in bands {
            if b.weight.is_zero_const() {
                continue;
            }
            let weight = match b.weight {
                BandWeight::Seq { w: crate::weight::WeightFn::Constant(c), .. } => BandWeight::Const(c),
                w => w,
            };
            merged.entry(b.offset).or_default().push(weight);
        }
        let bands: Vec<Band> = merged
            .into_iter()
            .map(|(offset, mut ws)| {
                let weight = if ws.len() == 1 { ws.pop().unwrap() } else { BandWeight::Sum(ws) };
                Band { offset, weight }
            })
            .collect();
        let offsets = bands.iter().map(|b| b.offset).collect();
        BandOp { lattice, node: Arc::new(Node::Bands(bands)), offsets }
    }

    pub fn identity(lattice: Lattice) -> Self {
        let r = lattice.rank();
        Self::leaf(Arc::new(lattice), vec![Band { offset: Index::zero(r), weight: BandWeight::Const(ONE) }])
    }

    pub fn zero(lattice: Lattice) -> Self {
        Self::leaf(Arc::new(lattice), Vec::new())
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    /// Distinct band offsets, sorted.
    pub fn offsets(&self) -> &[Index] {
        &self.offsets
    }

    /// Explicit bands of a leaf operator; `None` for composition nodes.
    pub fn bands(&self) -> Option<&[Band]> {
        match &*self.node {
            Node::Bands(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.bands(), Some([b]) if b.offset == Index::zero(self.rank()) && b.weight == BandWeight::Const(ONE))
    }

    /// Largest `|offset|` coordinate over all bands.
    pub fn max_offset(&self) -> i64 {
        self.offsets.iter().map(|o| o.max_abs()).max().unwrap_or(0)
    }

    /// Matrix entry `⟨e_row, T e_col⟩`.
    pub fn entry(&self, row: &Index, col: &Index) -> C64 {
        if !self.lattice.contains(col) {
            return ZERO;
        }
        match &*self.node {
            Node::Bands(bands) => {
                let d = *row - *col;
                if !self.lattice.contains(row) {
                    return ZERO;
                }
                bands.iter().find(|b| b.offset == d).map_or(ZERO, |b| b.weight.eval(col, &self.lattice))
            }
            _ => self.apply_unchecked(&FinVec::basis(*col)).get(row),
        }
    }

    fn check_vector(&self, u: &FinVec) -> Result<()> {
        if u.rank() != self.rank() {
            return Err(Error::RankMismatch { expected: self.rank(), found: u.rank() });
        }
        if let Some((k, _)) = u.iter().find(|(k, _)| !self.lattice.contains(k)) {
            return Err(Error::OutsideLattice(*k));
        }
        Ok(())
    }

    /// Exact band action.
    pub fn apply(&self, u: &FinVec) -> Result<FinVec> {
        self.check_vector(u)?;
        Ok(self.apply_unchecked(u))
    }

    pub(crate) fn apply_unchecked(&self, u: &FinVec) -> FinVec {
        match &*self.node {
            Node::Bands(bands) => {
                let mut out = FinVec::zeros(self.rank());
                for (k, x) in u.iter() {
                    for b in bands {
                        let t = *k + b.offset;
                        if !self.lattice.contains(&t) {
                            continue;
                        }
                        let w = b.weight.eval(k, &self.lattice);
                        if w != ZERO {
                            out.add_at(t, w * x);
                        }
                    }
                }
                out
            }
            Node::Compose(a, b) => a.apply_unchecked(&b.apply_unchecked(u)),
            Node::DirectSum(a, b) => {
                let mut out = FinVec::zeros(self.rank());
                for (tag, op) in [(0, a), (1, b)] {
                    let part = FinVec::from_entries(
                        op.rank(),
                        u.iter().filter(|(k, _)| k.split_last().1 == tag).map(|(k, x)| (k.split_last().0, *x)),
                    )
                    .expect("summand rank");
                    for (k, x) in op.apply_unchecked(&part).iter() {
                        out.add_at(k.push(tag), *x);
                    }
                }
                out
            }
        }
    }

    /// `n` successive applications.
    pub fn apply_power(&self, n: usize, u: &FinVec) -> Result<FinVec> {
        self.check_vector(u)?;
        let mut v = u.clone();
        for _ in 0..n {
            if v.is_zero() {
                break;
            }
            v = self.apply_unchecked(&v);
        }
        Ok(v)
    }

    pub fn adjoint(&self) -> BandOp {
        match &*self.node {
            Node::Bands(bands) => {
                let out = bands
                    .iter()
                    .map(|b| {
                        let weight = match &b.weight {
                            BandWeight::Adjoint { inner, offset } if *offset == -b.offset => (**inner).clone(),
                            BandWeight::Const(c) => BandWeight::Const(c.conj()),
                            w => BandWeight::Adjoint { inner: Arc::new(w.clone()), offset: b.offset },
                        };
                        Band { offset: -b.offset, weight }
                    })
                    .collect();
                Self::leaf(self.lattice.clone(), out)
            }
            Node::Compose(a, b) => Self::compose_node(self.lattice.clone(), b.adjoint(), a.adjoint()),
            Node::DirectSum(a, b) => Self::direct_sum_node(self.lattice.clone(), a.adjoint(), b.adjoint()),
        }
    }

    /// Whether `k + offset` stays on the lattice for every lattice point `k`.
    fn offset_preserves_lattice(lattice: &Lattice, offset: &Index) -> bool {
        match lattice {
            Lattice::Grid(axes) => axes.iter().zip(offset.coords()).all(|(a, &o)| match a {
                crate::index::Axis::Integer => true,
                crate::index::Axis::Natural => o >= 0,
                crate::index::Axis::Finite(_) => o == 0,
            }),
            Lattice::Tagged(..) => offset.coords().iter().all(|&o| o == 0),
        }
    }

    fn product_weight(lattice: &Lattice, left: &Band, right: &Band) -> BandWeight {
        if let (BandWeight::Const(a), BandWeight::Const(b)) = (&left.weight, &right.weight) {
            if Self::offset_preserves_lattice(lattice, &right.offset) {
                return BandWeight::Const(a * b);
            }
        }
        BandWeight::Product {
            left: Arc::new(left.weight.clone()),
            right: Arc::new(right.weight.clone()),
            right_offset: right.offset,
        }
    }

    /// `A ∘ B`.
    pub fn compose(a: &BandOp, b: &BandOp) -> Result<BandOp> {
        if a.lattice != b.lattice {
            return Err(Error::LatticeMismatch);
        }
        if a.is_identity() {
            return Ok(b.clone());
        }
        if b.is_identity() {
            return Ok(a.clone());
        }
        if let (Some(ab), Some(bb)) = (a.bands(), b.bands()) {
            if ab.len() <= 1 || bb.len() <= 1 {
                let mut bands = Vec::with_capacity(ab.len() * bb.len());
                for l in ab {
                    for r in bb {
                        bands.push(Band { offset: l.offset + r.offset, weight: Self::product_weight(&a.lattice, l, r) });
                    }
                }
                return Ok(Self::leaf(a.lattice.clone(), bands));
            }
        }
        Ok(Self::compose_node(a.lattice.clone(), a.clone(), b.clone()))
    }

    fn compose_node(lattice: Arc<Lattice>, a: BandOp, b: BandOp) -> BandOp {
        let set: BTreeSet<Index> = a.offsets.iter().flat_map(|x| b.offsets.iter().map(move |y| *x + *y)).collect();
        BandOp { lattice, node: Arc::new(Node::Compose(a, b)), offsets: set.into_iter().collect() }
    }

    fn direct_sum_node(lattice: Arc<Lattice>, a: BandOp, b: BandOp) -> BandOp {
        let set: BTreeSet<Index> = a.offsets.iter().chain(b.offsets.iter()).map(|o| o.push(0)).collect();
        BandOp { lattice, node: Arc::new(Node::DirectSum(a, b)), offsets: set.into_iter().collect() }
    }

    /// Block operator `A ⊕ B` on the tagged union of the two lattices.
    pub fn direct_sum(a: &BandOp, b: &BandOp) -> Result<BandOp> {
        if a.rank() != b.rank() {
            return Err(Error::RankMismatch { expected: a.rank(), found: b.rank() });
        }
        if a.rank() >= crate::index::MAX_RANK {
            return Err(Error::InvalidArgument("direct sum would exceed the maximum index rank".into()));
        }
        let lattice = Arc::new(Lattice::tagged((*a.lattice).clone(), (*b.lattice).clone()));
        if let (Some(ab), Some(bb)) = (a.bands(), b.bands()) {
            let tag = |bands: &[Band], t: i64| -> Vec<Band> {
                bands
                    .iter()
                    .map(|x| Band { offset: x.offset.push(0), weight: BandWeight::Tagged { tag: t, inner: Arc::new(x.weight.clone()) } })
                    .collect()
            };
            let mut bands = tag(ab, 0);
            bands.extend(tag(bb, 1));
            return Ok(Self::leaf(lattice, bands));
        }
        Ok(Self::direct_sum_node(lattice, a.clone(), b.clone()))
    }

    /// `c · T`.
    pub fn scale(&self, c: C64) -> BandOp {
        match &*self.node {
            Node::Bands(bands) => {
                let out = bands
                    .iter()
                    .map(|b| Band {
                        offset: b.offset,
                        weight: match &b.weight {
                            BandWeight::Const(x) => BandWeight::Const(c * x),
                            w => BandWeight::Scaled(c, Arc::new(w.clone())),
                        },
                    })
                    .collect();
                Self::leaf(self.lattice.clone(), out)
            }
            _ => {
                let s = BandOp::identity((*self.lattice).clone()).scale(c);
                Self::compose_node(self.lattice.clone(), s, self.clone())
            }
        }
    }

    /// Lifts a rank-1 operator to act on coordinate `axis` of a rank-2
    /// product lattice whose other coordinate lives on `other` (`T ⊗ I` for
    /// `axis = 0`, `I ⊗ T` for `axis = 1`).
    pub fn tensor_identity(&self, axis: usize, other: crate::index::Axis) -> Result<BandOp> {
        let line = match &*self.lattice {
            Lattice::Grid(axes) if axes.len() == 1 => axes[0],
            _ => return Err(Error::InvalidArgument("tensor lifting needs a rank-1 product lattice".into())),
        };
        if axis > 1 {
            return Err(Error::InvalidArgument("lift axis must be 0 or 1".into()));
        }
        let axes = if axis == 0 { [line, other] } else { [other, line] };
        let lattice = Arc::new(Lattice::grid(&axes));
        self.lift_onto(axis, &lattice)
    }

    fn lift_onto(&self, axis: usize, lattice: &Arc<Lattice>) -> Result<BandOp> {
        match &*self.node {
            Node::Bands(bands) => {
                let out = bands
                    .iter()
                    .map(|b| Band {
                        offset: Index::unit(2, axis, b.offset.get(0)),
                        weight: match &b.weight {
                            BandWeight::Const(c) => BandWeight::Const(*c),
                            w => BandWeight::Lift { axis, lattice: self.lattice.clone(), inner: Arc::new(w.clone()) },
                        },
                    })
                    .collect();
                Ok(Self::leaf(lattice.clone(), out))
            }
            Node::Compose(a, b) => Ok(Self::compose_node(lattice.clone(), a.lift_onto(axis, lattice)?, b.lift_onto(axis, lattice)?)),
            Node::DirectSum(..) => Err(Error::InvalidArgument("cannot lift a direct sum".into())),
        }
    }
}

/// `T*T`.
pub fn gram(t: &BandOp) -> BandOp {
    BandOp::compose(&t.adjoint(), t).expect("adjoint shares the lattice")
}

/// `Tⁿ` (`T⁰ = I`).
pub fn power(t: &BandOp, n: usize) -> BandOp {
    let mut p = BandOp::identity(t.lattice().clone());
    for _ in 0..n {
        p = BandOp::compose(t, &p).expect("same lattice");
    }
    p
}

/// Controls the finite-section approximation of `(T*T)⁻¹`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramSolveParams {
    /// Initial padding of the solve window around the right-hand side.
    pub guard: usize,
    /// Relative residual target `‖G x − v‖ ≤ tol·‖v‖`.
    pub tol: f64,
    /// Hard cap on the number of window sites.
    pub max_window: usize,
}

impl Default for GramSolveParams {
    fn default() -> Self {
        GramSolveParams { guard: 16, tol: 1e-12, max_window: 1 << 16 }
    }
}

impl GramSolveParams {
    /// Defaults with the guard scaled to the operator: `2 · max|offset| · 8`.
    pub fn for_operator(t: &BandOp) -> Self {
        GramSolveParams { guard: (16 * t.max_offset().max(1)) as usize, ..Default::default() }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        GramSolveParams { tol, ..self }
    }
}

/// A certified Gram solve.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSolution {
    pub x: FinVec,
    /// `‖G x − v‖` recomputed with the exact band Gram.
    pub residual: f64,
    /// Sites in the final window.
    pub window: usize,
    pub attempts: usize,
}

/// Finite section of a band operator on a set of lattice points.
pub(crate) struct Section {
    pub points: Vec<Index>,
    pub matrix: SparseSquare,
}

impl Section {
    pub fn build(op: &BandOp, window: &Window) -> Section {
        let points = op.lattice().points_in(window);
        let pos: BTreeMap<Index, usize> = points.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut entries = Vec::new();
        for (j, k) in points.iter().enumerate() {
            for (row, x) in op.apply_unchecked(&FinVec::basis(*k)).iter() {
                if let Some(&i) = pos.get(row) {
                    entries.push((i, j, *x));
                }
            }
        }
        Section { matrix: SparseSquare { n: points.len(), entries }, points }
    }

    pub fn gather(&self, v: &FinVec) -> Vec<C64> {
        self.points.iter().map(|k| v.get(k)).collect()
    }

    pub fn scatter(&self, rank: usize, x: &[C64]) -> FinVec {
        let mut out = FinVec::zeros(rank);
        for (k, v) in self.points.iter().zip(x) {
            out.add_at(*k, *v);
        }
        out
    }

    /// Solves block by block; `None` if some block is not positive definite.
    pub fn solve_hpd(&self, b: &[C64]) -> Option<Vec<C64>> {
        let mut x = vec![ZERO; b.len()];
        for block in self.matrix.blocks() {
            let rhs: Vec<C64> = block.iter().map(|&i| b[i]).collect();
            if rhs.iter().all(|r| *r == ZERO) {
                continue;
            }
            if block.len() == 1 {
                let a = self.matrix.dense_block(&block).at(0, 0);
                if !(a.re > 0.0) {
                    return None;
                }
                x[block[0]] = rhs[0] / a.re;
                continue;
            }
            let sol = cholesky_solve(&self.matrix.dense_block(&block), &rhs)?;
            for (&i, s) in block.iter().zip(sol) {
                x[i] = s;
            }
        }
        Some(x)
    }
}

/// Solves `G x = v` for a Hermitian positive-definite band operator `G`.
///
/// The window starts at `support(v)` padded by `p.guard` and doubles its
/// padding until the exact residual meets `p.tol · ‖v‖`.
pub fn solve_hpd(g: &BandOp, v: &FinVec, p: &GramSolveParams) -> Result<GramSolution> {
    g.check_vector(v)?;
    if v.is_zero() {
        return Ok(GramSolution { x: FinVec::zeros(g.rank()), residual: 0.0, window: 0, attempts: 0 });
    }
    let vnorm = v.norm();
    let support = v.support();
    let mut guard = p.guard as i64;
    let mut attempts = 0;
    let mut last_residual = vnorm;
    let mut last_size = 0;
    loop {
        let window = g.lattice().padded_box(&support, guard);
        let size = g.lattice().points_in(&window).len();
        if size > p.max_window || (attempts > 0 && size == last_size) {
            return Err(Error::NoConvergence { residual: last_residual, window: last_size.max(size) });
        }
        attempts += 1;
        let section = Section::build(g, &window);
        let Some(xs) = section.solve_hpd(&section.gather(v)) else {
            return Err(Error::NoConvergence { residual: vnorm, window: size });
        };
        let x = section.scatter(g.rank(), &xs);
        let residual = (&g.apply_unchecked(&x) - v).norm();
        if residual <= p.tol * vnorm {
            return Ok(GramSolution { x, residual, window: size, attempts });
        }
        last_residual = residual;
        last_size = size;
        guard = (guard * 2).max(1);
    }
}

/// `(T*T)⁻¹ v`, certified.
pub fn solve_gram_detailed(t: &BandOp, v: &FinVec, p: &GramSolveParams) -> Result<GramSolution> {
    solve_hpd(&gram(t), v, p)
}

pub fn solve_gram(t: &BandOp, v: &FinVec, p: &GramSolveParams) -> Result<FinVec> {
    Ok(solve_gram_detailed(t, v, p)?.x)
}

/// `T⁻ v = (T*T)⁻¹ T* v`.
pub fn left_inverse_apply(t: &BandOp, v: &FinVec, p: &GramSolveParams) -> Result<FinVec> {
    LeftInverse::new(t, *p).apply(v)
}

/// `T⁻` bound to one operator, with its adjoint and Gram built once.
#[derive(Clone, Debug)]
pub struct LeftInverse {
    op: BandOp,
    adjoint: BandOp,
    gram: BandOp,
    params: GramSolveParams,
}

impl LeftInverse {
    pub fn new(t: &BandOp, params: GramSolveParams) -> Self {
        let adjoint = t.adjoint();
        let gram = BandOp::compose(&adjoint, t).expect("same lattice");
        LeftInverse { op: t.clone(), adjoint, gram, params }
    }

    pub fn op(&self) -> &BandOp {
        &self.op
    }

    pub fn adjoint(&self) -> &BandOp {
        &self.adjoint
    }

    pub fn gram(&self) -> &BandOp {
        &self.gram
    }

    pub fn apply(&self, v: &FinVec) -> Result<FinVec> {
        let w = self.adjoint.apply(v)?;
        Ok(solve_hpd(&self.gram, &w, &self.params)?.x)
    }

    /// `(T⁻)ⁿ v`.
    pub fn apply_power(&self, n: usize, v: &FinVec) -> Result<FinVec> {
        let mut y = v.clone();
        for _ in 0..n {
            if y.is_zero() {
                break;
            }
            y = self.apply(&y)?;
        }
        Ok(y)
    }
}

/// Smallest singular value of `T` restricted to vectors supported on the
/// standard window of extent `window`: `√λ_min` of the compressed Gram.
pub fn lower_bound_estimate(t: &BandOp, window: usize) -> f64 {
    let w = t.lattice().standard_window(window.max(1));
    let section = Section::build(&gram(t), &w);
    let mut lmin = f64::INFINITY;
    for block in section.matrix.blocks() {
        let e = hermitian_eigen(&section.matrix.dense_block(&block));
        if let Some(&l) = e.values.first() {
            lmin = lmin.min(l);
        }
    }
    if !lmin.is_finite() {
        return 0.0;
    }
    libm::sqrt(lmin.max(0.0))
}
