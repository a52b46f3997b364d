//! Wold-type decomposition `h = Ph + Σ_j TʲP₀(T⁻)ʲh` for left-invertible
//! band operators, evaluated per vector.
//!
//! `P_n` is always formed as `Tⁿ(Tⁿ)⁻`, which is the orthogonal projection
//! onto `Tⁿℋ` whether or not `T` is in class 𝒟. The series uses `(T⁻)ʲ`;
//! the gap between the two is reported as `classd_gap`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bandop::{gram, power, BandOp, GramSolveParams, LeftInverse, Section};
use crate::dense::hermitian_eigen;
use crate::error::{Error, Result};
use crate::seqspace::{inner, orthonormalize, FinVec};
use crate::C64;

/// Consecutive negligible steps required by the stopping rules.
pub const STOP_RUN: usize = 3;
/// Relative eigenvalue floor in [`analytic_criterion`].
pub const EIGEN_FLOOR: f64 = 1e-14;

/// `h − T T⁻ h`, the projection of `h` onto `ker T*`.
pub fn defect_project(t: &BandOp, h: &FinVec, p: &GramSolveParams) -> Result<FinVec> {
    defect_with(&LeftInverse::new(t, *p), h)
}

fn defect_with(li: &LeftInverse, h: &FinVec) -> Result<FinVec> {
    let back = li.op().apply(&li.apply(h)?)?;
    Ok(h - &back)
}

/// `P_n h = Tⁿ(Tⁿ)⁻h`; `n = 0` returns `h`.
pub fn nested_project(t: &BandOp, n: usize, h: &FinVec, p: &GramSolveParams) -> Result<FinVec> {
    if n == 0 {
        t.apply(&FinVec::zeros(h.rank()))?;
        return Ok(h.clone());
    }
    let tn = power(t, n);
    let li = LeftInverse::new(&tn, *p);
    tn.apply(&li.apply(h)?)
}

/// Outcome of iterating `P_n h` towards `Ph`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrongLimit {
    pub value: FinVec,
    /// `‖P_{n−1}h − P_n h‖` for `n = 1..=n_used`.
    pub history: Vec<f64>,
    pub n_used: usize,
    /// True when some `P_n h` was exactly zero.
    pub exact_zero: bool,
    iterates: Vec<FinVec>,
}

impl StrongLimit {
    /// `P_n h` as computed, with `P_n h = value` beyond `n_used`.
    pub fn iterate(&self, n: usize) -> &FinVec {
        self.iterates.get(n).unwrap_or(&self.value)
    }
}

/// `Ph` as the limit of `P_n h`. Stops after [`STOP_RUN`] consecutive deltas
/// at most `p.tol·‖h‖` once `n` exceeds the depth of `supp h` (see
/// [`Lattice::depth`](crate::Lattice::depth)), or as soon as an iterate is
/// exactly zero.
pub fn shift_limit_project(t: &BandOp, h: &FinVec, p: &GramSolveParams, n_max: usize) -> Result<StrongLimit> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    t.apply(h)?;
    let scale = h.norm();
    let mut iterates = alloc::vec![h.clone()];
    let mut history = Vec::new();
    if scale == 0.0 {
        return Ok(StrongLimit { value: h.clone(), history, n_used: 0, exact_zero: true, iterates });
    }
    let depth = h.iter().map(|(k, _)| t.lattice().depth(k)).max().unwrap_or(0) as usize;
    let mut run = 0;
    for n in 1..=n_max {
        let next = nested_project(t, n, h, p)?;
        let delta = (&iterates[n - 1] - &next).norm();
        history.push(delta);
        let zero = next.is_zero();
        iterates.push(next);
        if zero {
            return Ok(StrongLimit { value: FinVec::zeros(h.rank()), history, n_used: n, exact_zero: true, iterates });
        }
        run = if delta <= p.tol * scale { run + 1 } else { 0 };
        if run >= STOP_RUN && n > depth {
            let value = iterates[n].clone();
            return Ok(StrongLimit { value, history, n_used: n, exact_zero: false, iterates });
        }
    }
    Err(Error::NoStrongConvergence { n_max, last_delta: history.last().copied().unwrap_or(0.0) })
}

/// Result of [`analytic_criterion`].
#[derive(Clone, Debug, PartialEq)]
pub struct Criterion {
    /// `‖G_n^{−1/2}(T*)ⁿh‖`.
    pub value: f64,
    /// True when the eigenvalue floor replaced some eigenvalue.
    pub floored: bool,
    pub window: usize,
}

/// `‖G_n^{−1/2}(T*)ⁿh‖` with `G_n = (Tⁿ)*Tⁿ`, through a Hermitian
/// eigendecomposition of the guarded finite section of `G_n`. The window
/// grows until `G_n⁻¹(T*)ⁿh` from the same decomposition meets `p.tol`
/// against the exact band Gram.
pub fn analytic_criterion(t: &BandOp, h: &FinVec, n: usize, p: &GramSolveParams) -> Result<Criterion> {
    if n == 0 {
        return Err(Error::InvalidArgument("analytic criterion needs n ≥ 1".into()));
    }
    let tn = power(t, n);
    let b = tn.adjoint().apply(h)?;
    if b.is_zero() {
        return Ok(Criterion { value: 0.0, floored: false, window: 0 });
    }
    let g = gram(&tn);
    let bnorm = b.norm();
    let support = b.support();
    let mut guard = p.guard as i64;
    let mut last = (bnorm, 0usize);
    loop {
        let window = g.lattice().padded_box(&support, guard);
        let section = Section::build(&g, &window);
        let size = section.points.len();
        if size > p.max_window || (last.1 > 0 && size == last.1) {
            return Err(Error::NoConvergence { residual: last.0, window: size.max(last.1) });
        }
        let rhs = section.gather(&b);
        let mut x = alloc::vec![C64::new(0.0, 0.0); size];
        let mut sq = 0.0;
        let mut floored = false;
        for block in section.matrix.blocks() {
            if block.iter().all(|&i| rhs[i] == C64::new(0.0, 0.0)) {
                continue;
            }
            let e = hermitian_eigen(&section.matrix.dense_block(&block));
            let top = e.values.last().copied().unwrap_or(0.0);
            if !(top > 0.0) {
                return Err(Error::NoConvergence { residual: bnorm, window: size });
            }
            for (k, &lam) in e.values.iter().enumerate() {
                let lam = if lam < EIGEN_FLOOR * top {
                    floored = true;
                    EIGEN_FLOOR * top
                } else {
                    lam
                };
                let v = e.vector(k);
                let c: C64 = block.iter().zip(&v).map(|(&i, vi)| rhs[i] * vi.conj()).sum();
                sq += c.norm_sqr() / lam;
                for (&i, vi) in block.iter().zip(&v) {
                    x[i] += vi * (c / lam);
                }
            }
        }
        let xs = section.scatter(g.rank(), &x);
        let residual = (&g.apply(&xs)? - &b).norm();
        if residual <= p.tol * bnorm {
            return Ok(Criterion { value: libm::sqrt(sq), floored, window: size });
        }
        last = (residual, size);
        guard = (guard * 2).max(1);
    }
}

/// Orthonormal basis of `ker T*` among vectors supported on the standard
/// window of extent `window`. Candidates come from the compressed `TT*`;
/// each is re-checked with the exact adjoint.
pub fn wandering_basis(t: &BandOp, window: usize, tol: f64) -> Vec<FinVec> {
    let ts = t.adjoint();
    let tt = BandOp::compose(t, &ts).expect("same lattice");
    let w = t.lattice().standard_window(window.max(1));
    let section = Section::build(&tt, &w);
    let mut candidates = Vec::new();
    for block in section.matrix.blocks() {
        let e = hermitian_eigen(&section.matrix.dense_block(&block));
        let top = e.values.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= tol * top {
                let mut full = alloc::vec![C64::new(0.0, 0.0); section.points.len()];
                for (&i, vi) in block.iter().zip(e.vector(k)) {
                    full[i] = vi;
                }
                candidates.push(section.scatter(t.rank(), &full));
            }
        }
    }
    orthonormalize(&candidates, tol.max(1e-14))
        .into_iter()
        .filter(|v| ts.apply(v).map(|y| y.norm() <= tol * v.norm()).unwrap_or(false))
        .collect()
}

/// `Tʲ P₀ (T⁻)ʲ h`.
pub fn series_component(t: &BandOp, j: usize, h: &FinVec, p: &GramSolveParams) -> Result<FinVec> {
    let li = LeftInverse::new(t, *p);
    let y = li.apply_power(j, h)?;
    t.apply_power(j, &defect_with(&li, &y)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WoldResult {
    /// `≈ Ph`.
    pub limit_part: FinVec,
    /// Component `j` is `TʲP₀(T⁻)ʲh`.
    pub components: Vec<FinVec>,
    /// `‖h − limit_part − Σ components‖`.
    pub reconstruction_residual: f64,
    /// `‖P_n h − P_{n+1} h‖` per `n`.
    pub convergence_history: Vec<f64>,
    pub n_used: usize,
    pub j_used: usize,
    /// `max_{i≠j} |⟨c_i, c_j⟩|`.
    pub max_cross_inner: f64,
    /// `max_j ‖c_j − (P_j − P_{j+1})h‖ / ‖h‖`; nonzero only outside class 𝒟.
    pub classd_gap: f64,
    pub flags: Vec<String>,
}

impl WoldResult {
    /// `h − limit_part`.
    pub fn shift_part(&self) -> FinVec {
        self.components.iter().fold(FinVec::zeros(self.limit_part.rank()), |acc, c| &acc + c)
    }
}

/// Splits `h` into `Ph` and the series components.
///
/// The series stops once [`STOP_RUN`] consecutive components are at most
/// `p.tol·‖h‖` while the running remainder `h − Ph − Σ c_j` is also at that
/// level, or as soon as `(T⁻)ʲh` is exactly zero.
pub fn decompose(t: &BandOp, h: &FinVec, p: &GramSolveParams, n_max: usize, j_max: usize) -> Result<WoldResult> {
    let limit = shift_limit_project(t, h, p, n_max)?;
    let rank = h.rank();
    let scale = h.norm();
    if scale == 0.0 {
        return Ok(WoldResult {
            limit_part: FinVec::zeros(rank),
            components: Vec::new(),
            reconstruction_residual: 0.0,
            convergence_history: limit.history,
            n_used: 0,
            j_used: 0,
            max_cross_inner: 0.0,
            classd_gap: 0.0,
            flags: Vec::new(),
        });
    }
    let li = LeftInverse::new(t, *p);
    let mut remainder = h - &limit.value;
    let mut components: Vec<FinVec> = Vec::new();
    let mut y = h.clone();
    let mut run = 0;
    let mut finished = false;
    for j in 0..j_max {
        if j > 0 {
            y = li.apply(&y)?;
        }
        if y.is_zero() {
            finished = true;
            break;
        }
        let c = t.apply_power(j, &defect_with(&li, &y)?)?;
        remainder = &remainder - &c;
        let small = c.norm() <= p.tol * scale;
        components.push(c);
        run = if small && remainder.norm() <= p.tol * scale { run + 1 } else { 0 };
        if run == STOP_RUN {
            finished = true;
            break;
        }
    }
    if !finished {
        return Err(Error::SeriesNotConverged { j_max, tail_norm: remainder.norm() });
    }

    let mut flags = Vec::new();
    let mut cross: f64 = 0.0;
    for a in 0..components.len() {
        for b in a + 1..components.len() {
            cross = cross.max(inner(&components[a], &components[b])?.norm());
        }
    }
    if cross > 1e-10 * scale * scale {
        flags.push(format!("components not orthogonal: max |<c_i, c_j>| = {cross:e}"));
    }
    let mut gap: f64 = 0.0;
    for (j, c) in components.iter().enumerate() {
        let band = limit.iterate(j) - limit.iterate(j + 1);
        gap = gap.max((c - &band).norm() / scale);
    }
    if gap > 1e-9 {
        flags.push(format!("(T^n)^- and (T^-)^n disagree on h: gap {gap:e}"));
    }
    let reconstruction_residual = remainder.norm();
    if limit.exact_zero {
        flags.push(String::from("limit part is exactly zero"));
    }
    Ok(WoldResult {
        limit_part: limit.value,
        j_used: components.len(),
        components,
        reconstruction_residual,
        convergence_history: limit.history,
        n_used: limit.n_used,
        max_cross_inner: cross,
        classd_gap: gap,
        flags,
    })
}

/// `‖P_{n+1}(Th) − T(P_n h)‖ / ‖h‖`.
pub fn reducing_residual(t: &BandOp, h: &FinVec, n: usize, p: &GramSolveParams) -> Result<f64> {
    let scale = h.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let a = nested_project(t, n + 1, &t.apply(h)?, p)?;
    let b = t.apply(&nested_project(t, n, h, p)?)?;
    Ok((&a - &b).norm() / scale)
}

/// Idempotence, self-adjointness and nestedness residuals of `P_n` on a pair
/// of vectors, all divided by the relevant norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionResiduals {
    /// `‖P_n(P_n u) − P_n u‖ / ‖u‖`.
    pub idempotence: f64,
    /// `|⟨P_n u, v⟩ − ⟨u, P_n v⟩| / (‖u‖‖v‖)`.
    pub symmetry: f64,
    /// `‖P_{n+1}(P_n u) − P_{n+1}u‖ / ‖u‖`.
    pub nestedness: f64,
    /// `(‖P_{n+1}u‖ − ‖P_n u‖)₊ / ‖u‖`.
    pub monotonicity: f64,
}

pub fn projection_residuals(t: &BandOp, n: usize, u: &FinVec, v: &FinVec, p: &GramSolveParams) -> Result<ProjectionResiduals> {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Ok(ProjectionResiduals { idempotence: 0.0, symmetry: 0.0, nestedness: 0.0, monotonicity: 0.0 });
    }
    let pu = nested_project(t, n, u, p)?;
    let pv = nested_project(t, n, v, p)?;
    let ppu = nested_project(t, n, &pu, p)?;
    let next_u = nested_project(t, n + 1, u, p)?;
    let next_pu = nested_project(t, n + 1, &pu, p)?;
    Ok(ProjectionResiduals {
        idempotence: (&ppu - &pu).norm() / nu,
        symmetry: (inner(&pu, v)? - inner(u, &pv)?).norm() / (nu * nv),
        nestedness: (&next_pu - &next_u).norm() / nu,
        monotonicity: (next_u.norm() - pu.norm()).max(0.0) / nu,
    })
}

/// A preimage under `T` inside `H∞` with its two certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub preimage: FinVec,
    /// `‖T h′ − h‖ / ‖h‖`.
    pub image_residual: f64,
    /// `‖h′ − P h′‖ / ‖h′‖`.
    pub limit_residual: f64,
}

/// For `h` certified in `H∞`, returns `h′ = T⁻h` with `Th′ = h`, `h′ ∈ H∞`.
pub fn surjectivity_witness(t: &BandOp, h: &FinVec, p: &GramSolveParams, n_max: usize) -> Result<Witness> {
    let scale = h.norm();
    if scale == 0.0 {
        return Ok(Witness { preimage: h.clone(), image_residual: 0.0, limit_residual: 0.0 });
    }
    let ph = shift_limit_project(t, h, p, n_max)?;
    let r = (h - &ph.value).norm() / scale;
    if r > p.tol {
        return Err(Error::InputNotInHInfinity { residual: r });
    }
    let pre = LeftInverse::new(t, *p).apply(h)?;
    let image_residual = (&t.apply(&pre)? - h).norm() / scale;
    let pre_norm = pre.norm();
    let limit_residual = if pre_norm == 0.0 {
        0.0
    } else {
        (&pre - &shift_limit_project(t, &pre, p, n_max)?.value).norm() / pre_norm
    };
    Ok(Witness { preimage: pre, image_residual, limit_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::index::{Axis, Index};
    use crate::weight::WeightFn;
    use crate::zoo;
    use alloc::vec;

    fn e(k: i64) -> FinVec {
        FinVec::basis(Index::d1(k))
    }

    fn p() -> GramSolveParams {
        GramSolveParams::default()
    }

    #[test]
    fn defect_projection_examples() {
        let s = zoo::unilateral_shift();
        assert_eq!(defect_project(&s, &(&e(0) + &e(1)), &p()).unwrap(), e(0));
        assert!(defect_project(&zoo::bergman_shift(), &e(1), &p()).unwrap().norm() < 1e-15);
        let h = &e(-2) + &e(3).scale(c64(0.0, 1.0));
        assert!(defect_project(&zoo::bilateral_shift(), &h, &p()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn nested_projection_examples() {
        let s = zoo::unilateral_shift();
        assert!(nested_project(&s, 1, &e(0), &p()).unwrap().is_zero());
        assert_eq!(nested_project(&s, 1, &e(2), &p()).unwrap(), e(2));
        assert!(nested_project(&zoo::bergman_shift(), 2, &e(1), &p()).unwrap().norm() < 1e-15);
        assert_eq!(nested_project(&s, 0, &e(4), &p()).unwrap(), e(4));
    }

    #[test]
    fn strong_limit_on_unilateral_is_exact_zero() {
        let h = &(&e(0) + &e(3)) + &e(7);
        let r = shift_limit_project(&zoo::bergman_shift(), &h, &p(), 64).unwrap();
        assert!(r.value.is_zero());
        assert!(r.exact_zero);
        assert_eq!(r.n_used, 8);
    }

    #[test]
    fn strong_limit_on_bilateral_is_identity() {
        let h = &e(-3) + &e(2);
        let r = shift_limit_project(&zoo::bilateral_shift(), &h, &p(), 64).unwrap();
        assert!((&r.value - &h).norm() < 1e-14);
        assert_eq!(r.n_used, STOP_RUN);
    }

    #[test]
    fn strong_limit_reports_failure() {
        let h = e(30);
        let err = shift_limit_project(&zoo::unilateral_shift(), &h, &p(), 5).unwrap_err();
        assert_eq!(err, Error::NoStrongConvergence { n_max: 5, last_delta: 0.0 });
    }

    #[test]
    fn criterion_examples() {
        let s = zoo::unilateral_shift();
        assert_eq!(analytic_criterion(&s, &e(0), 1, &p()).unwrap().value, 0.0);
        let b = zoo::bilateral_shift();
        for n in 1..5 {
            assert!((analytic_criterion(&b, &e(0), n, &p()).unwrap().value - 1.0).abs() < 1e-14);
        }
        let berg = zoo::bergman_shift();
        let h = &e(1) + &e(4).scale(c64(0.5, -0.25));
        for n in 1..6 {
            let a = analytic_criterion(&berg, &h, n, &p()).unwrap();
            let q = nested_project(&berg, n, &h, &p()).unwrap().norm();
            assert!((a.value - q).abs() < 1e-12, "n={n}: {} vs {q}", a.value);
            assert!(!a.floored);
        }
    }

    #[test]
    fn wandering_bases() {
        assert_eq!(wandering_basis(&zoo::unilateral_shift(), 8, 1e-12), vec![e(0)]);
        let s3 = zoo::weighted_shift(WeightFn::constant(1.0), 3, Axis::Natural).unwrap();
        let w = wandering_basis(&s3, 8, 1e-12);
        assert_eq!(w.len(), 3);
        for v in &w {
            assert!(v.support().iter().all(|k| k.get(0) < 3));
        }
        assert!(wandering_basis(&zoo::bilateral_shift(), 8, 1e-12).is_empty());
    }

    #[test]
    fn series_examples() {
        let s = zoo::unilateral_shift();
        let h = &e(0) + &e(1);
        assert_eq!(series_component(&s, 0, &h, &p()).unwrap(), e(0));
        assert_eq!(series_component(&s, 1, &h, &p()).unwrap(), e(1));
        assert!(series_component(&s, 2, &h, &p()).unwrap().is_zero());
        let c = series_component(&zoo::bergman_shift(), 1, &e(1), &p()).unwrap();
        assert!((&c - &e(1)).norm() < 1e-15);
        assert!(series_component(&zoo::bilateral_shift(), 2, &e(4), &p()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn decompose_unweighted_shift() {
        let h = &e(0) + &e(1);
        let r = decompose(&zoo::unilateral_shift(), &h, &p(), 64, 256).unwrap();
        assert!(r.limit_part.is_zero());
        assert_eq!(r.components, vec![e(0), e(1)]);
        assert_eq!(r.reconstruction_residual, 0.0);
        assert_eq!(r.max_cross_inner, 0.0);
    }

    #[test]
    fn decompose_skips_leading_zero_components() {
        let r = decompose(&zoo::dirichlet_shift(), &e(5), &p(), 64, 256).unwrap();
        assert_eq!(r.j_used, 6);
        assert!((&r.components[5] - &e(5)).norm() < 1e-14);
        assert!(r.reconstruction_residual < 1e-14);
    }

    #[test]
    fn decompose_direct_sum() {
        let t = zoo::direct_sum(&zoo::bilateral_shift(), &zoo::unilateral_shift()).unwrap();
        let u = FinVec::basis(Index::d2(-1, 0)).scale(c64(2.0, 0.0));
        let v = &FinVec::basis(Index::d2(0, 1)) + &FinVec::basis(Index::d2(2, 1));
        let h = &u + &v;
        let r = decompose(&t, &h, &p(), 64, 256).unwrap();
        assert!((&r.limit_part - &u).norm() < 1e-12);
        assert!((&r.shift_part() - &v).norm() < 1e-12);
        assert!(r.reconstruction_residual < 1e-12);
    }

    #[test]
    fn decompose_zero() {
        let r = decompose(&zoo::bergman_shift(), &FinVec::zeros(1), &p(), 4, 4).unwrap();
        assert!(r.components.is_empty());
        assert_eq!(r.reconstruction_residual, 0.0);
    }

    #[test]
    fn series_cap_is_reported() {
        let err = decompose(&zoo::unilateral_shift(), &e(10), &p(), 64, 4).unwrap_err();
        assert!(matches!(err, Error::SeriesNotConverged { j_max: 4, .. }));
    }

    #[test]
    fn reducing_residual_examples() {
        let h = &e(0) + &e(2).scale(c64(0.0, 1.0));
        for n in 0..5 {
            assert!(reducing_residual(&zoo::unilateral_shift(), &h, n, &p()).unwrap() <= 1e-13);
            assert!(reducing_residual(&zoo::bergman_shift(), &h, n, &p()).unwrap() <= 1e-11);
        }
        assert!(reducing_residual(&zoo::bilateral_shift(), &e(0), 3, &p()).unwrap() < 1e-15);
    }

    #[test]
    fn projection_laws_on_bergman() {
        let b = zoo::bergman_shift();
        let u = &e(1) + &e(3).scale(c64(0.3, 0.7));
        let v = &e(2) + &e(3);
        for n in 0..4 {
            let r = projection_residuals(&b, n, &u, &v, &p()).unwrap();
            assert!(r.idempotence <= 1e-11 && r.symmetry <= 1e-11 && r.nestedness <= 1e-11 && r.monotonicity <= 1e-11);
        }
    }

    #[test]
    fn surjectivity_examples() {
        let w = surjectivity_witness(&zoo::bilateral_shift(), &e(5), &p(), 64).unwrap();
        assert!((&w.preimage - &e(4)).norm() < 1e-15);
        assert!(w.image_residual < 1e-15 && w.limit_residual < 1e-15);
        let t = zoo::direct_sum(&zoo::bilateral_shift(), &zoo::unilateral_shift()).unwrap();
        let w = surjectivity_witness(&t, &FinVec::basis(Index::d2(0, 0)), &p(), 64).unwrap();
        assert!((&w.preimage - &FinVec::basis(Index::d2(-1, 0))).norm() < 1e-15);
        let err = surjectivity_witness(&zoo::unilateral_shift(), &e(0), &p(), 64).unwrap_err();
        assert_eq!(err, Error::InputNotInHInfinity { residual: 1.0 });
    }
}
