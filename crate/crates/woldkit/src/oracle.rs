//! Dense finite-section reference computations.
//!
//! Every quantity is recomputed from a dense matrix with generic dense
//! linear algebra (SVD pseudoinverse, SVD null space, Hermitian eigen). No
//! band structure is used past materialization, so agreement with the band
//! engine is evidence about both.
//!
//! Row and column ordinals follow [`Lattice::points_in`], i.e. lexicographic
//! order on coordinates.

use nalgebra::{DMatrix, DVector};
use woldkit_core::wold::WoldResult;
use woldkit_core::bandop::power;
use woldkit_core::{BandOp, FinVec, Index, Lattice, Window, C64};

/// Default cap on the number of ordinals of a dense section.
pub const MAX_ORDINALS: usize = 4096;
/// Relative singular value cut used by every pseudoinverse here.
pub const RANK_CUT: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("dense section needs {sites} ordinals, cap is {cap}")]
    WindowTooLarge { sites: usize, cap: usize },
    #[error("section is rank deficient on the window interior (σ_min/σ_max = {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("guard band violated at {point}: distance {distance} to the window edge, {required} required")]
    GuardViolation { point: Index, distance: i64, required: i64 },
    #[error("vector has support outside the section at {0}")]
    OutsideSection(Index),
    #[error("oracle iteration did not settle within {0} steps")]
    NoSettle(usize),
    #[error(transparent)]
    Engine(#[from] woldkit_core::Error),
}

pub type OracleResult<T> = Result<T, OracleError>;

/// Matrix of `⟨e_row, T e_col⟩` for `row ∈ rows`, `col ∈ cols`.
#[derive(Clone, Debug)]
pub struct DenseSection {
    pub matrix: DMatrix<C64>,
    pub rows: Vec<Index>,
    pub cols: Vec<Index>,
    pub window: Window,
    pub lattice: Lattice,
}

fn materialize(t: &BandOp, rows: Vec<Index>, cols: Vec<Index>, window: Window) -> OracleResult<DenseSection> {
    let n = rows.len().max(cols.len());
    if n > MAX_ORDINALS {
        return Err(OracleError::WindowTooLarge { sites: n, cap: MAX_ORDINALS });
    }
    let pos: std::collections::HashMap<Index, usize> = rows.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut matrix = DMatrix::zeros(rows.len(), cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (r, x) in t.apply(&FinVec::basis(*c))?.iter() {
            if let Some(&i) = pos.get(r) {
                matrix[(i, j)] = *x;
            }
        }
    }
    Ok(DenseSection { matrix, rows, cols, window, lattice: t.lattice().clone() })
}

/// Square section on the lattice points of `window`.
pub fn dense_section(t: &BandOp, window: &Window) -> OracleResult<DenseSection> {
    let pts = t.lattice().points_in(window);
    if pts.len() > MAX_ORDINALS {
        return Err(OracleError::WindowTooLarge { sites: pts.len(), cap: MAX_ORDINALS });
    }
    materialize(t, pts.clone(), pts, *window)
}

/// Columns on `window`, rows on `window` padded by the largest band offset,
/// so that every column holds the full image `T e_col`.
pub fn dense_section_with_image(t: &BandOp, window: &Window) -> OracleResult<DenseSection> {
    let cols = t.lattice().points_in(window);
    let corners = [window.lo, window.hi];
    let rows_window = t.lattice().padded_box(&corners, t.max_offset());
    let rows = t.lattice().points_in(&rows_window);
    materialize(t, rows, cols, *window)
}

impl DenseSection {
    pub fn gather_cols(&self, v: &FinVec) -> OracleResult<DVector<C64>> {
        gather(&self.cols, v)
    }

    pub fn gather_rows(&self, v: &FinVec) -> OracleResult<DVector<C64>> {
        gather(&self.rows, v)
    }

    pub fn scatter_cols(&self, x: &DVector<C64>) -> FinVec {
        scatter(&self.cols, x)
    }

    pub fn scatter_rows(&self, x: &DVector<C64>) -> FinVec {
        scatter(&self.rows, x)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

fn gather(points: &[Index], v: &FinVec) -> OracleResult<DVector<C64>> {
    let pos: std::collections::HashMap<&Index, usize> = points.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut out = DVector::zeros(points.len());
    for (k, x) in v.iter() {
        let i = *pos.get(k).ok_or(OracleError::OutsideSection(*k))?;
        out[i] = *x;
    }
    Ok(out)
}

fn scatter(points: &[Index], x: &DVector<C64>) -> FinVec {
    let mut out = FinVec::zeros(points.first().map_or(1, |p| p.rank()));
    for (k, v) in points.iter().zip(x.iter()) {
        if *v != C64::new(0.0, 0.0) {
            out.add_at(*k, *v);
        }
    }
    out
}

/// Moore–Penrose pseudoinverse with singular values below
/// `RANK_CUT · σ_max` dropped.
pub fn pinv(m: &DMatrix<C64>) -> DMatrix<C64> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    svd.pseudo_inverse(RANK_CUT * smax).expect("both factors computed")
}

fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Smallest singular value of the section (meaningful for full-image
/// sections, where it is the lower bound of `T` on the window).
pub fn oracle_min_singular(d: &DenseSection) -> f64 {
    singular_values(&d.matrix).first().copied().unwrap_or(0.0)
}

/// Columns whose full image stays inside the rows with `margin` to spare.
fn interior_columns(d: &DenseSection, margin: i64) -> Vec<usize> {
    d.cols
        .iter()
        .enumerate()
        .filter(|(_, k)| d.window.edge_distance(&d.lattice, k) > margin)
        .map(|(j, _)| j)
        .collect()
}

/// `M⁺` for a full-image section, built once the interior columns of `M`
/// are known to be linearly independent.
pub struct DenseLeftInverse {
    section: DenseSection,
    pinv: DMatrix<C64>,
}

impl DenseLeftInverse {
    pub fn new(d: DenseSection, max_offset: i64) -> OracleResult<Self> {
        let interior = interior_columns(&d, max_offset);
        if !interior.is_empty() {
            let sub = d.matrix.select_columns(interior.iter());
            let s = singular_values(&sub);
            let ratio = s.first().copied().unwrap_or(0.0) / s.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
            if !(ratio > 1e-10) {
                return Err(OracleError::RankDeficient { ratio });
            }
        }
        let pinv = pinv(&d.matrix);
        Ok(DenseLeftInverse { section: d, pinv })
    }

    /// `(M*M)⁻¹M*v`.
    pub fn apply(&self, v: &FinVec) -> OracleResult<FinVec> {
        Ok(self.section.scatter_cols(&(&self.pinv * self.section.gather_rows(v)?)))
    }
}

/// One-shot [`DenseLeftInverse`].
pub fn oracle_left_inverse(d: &DenseSection, v: &FinVec, max_offset: i64) -> OracleResult<FinVec> {
    DenseLeftInverse::new(d.clone(), max_offset)?.apply(v)
}

/// Rejects support points closer than `depth · max_offset + 1` to a
/// truncation face of the window.
pub fn check_guard(window: &Window, lattice: &Lattice, support: &[Index], depth: usize, max_offset: i64) -> OracleResult<()> {
    let required = depth as i64 * max_offset.max(1) + 1;
    for k in support {
        let distance = window.edge_distance(lattice, k);
        if distance < required {
            return Err(OracleError::GuardViolation { point: *k, distance, required });
        }
    }
    Ok(())
}

/// Window around `support` wide enough for `depth` band steps, clamped to
/// the lattice.
pub fn guarded_window(t: &BandOp, support: &[Index], depth: usize) -> Window {
    t.lattice().padded_box(support, (depth as i64 + 1) * t.max_offset().max(1) + 1)
}

/// Dense replica of the engine on a square section `M`.
pub struct DenseEngine {
    pub section: DenseSection,
    pinv: DMatrix<C64>,
    tol: f64,
}

impl DenseEngine {
    pub fn new(t: &BandOp, window: &Window, tol: f64) -> OracleResult<Self> {
        let section = dense_section(t, window)?;
        let pinv = pinv(&section.matrix);
        Ok(DenseEngine { section, pinv, tol })
    }

    fn m(&self) -> &DMatrix<C64> {
        &self.section.matrix
    }

    fn mpow(&self, n: usize) -> DMatrix<C64> {
        let k = self.m().nrows();
        (0..n).fold(DMatrix::identity(k, k), |acc, _| self.m() * acc)
    }

    /// `Mⁿ(Mⁿ)⁺v`.
    pub fn nested_project(&self, n: usize, v: &FinVec) -> OracleResult<FinVec> {
        let x = self.section.gather_cols(v)?;
        let mn = self.mpow(n);
        Ok(self.section.scatter_cols(&(&mn * pinv(&mn) * x)))
    }

    /// `M⁺v`.
    pub fn left_inverse(&self, v: &FinVec) -> OracleResult<FinVec> {
        let x = self.section.gather_cols(v)?;
        Ok(self.section.scatter_cols(&(&self.pinv * x)))
    }

    /// Limit of `Mⁿ(Mⁿ)⁺v` under the engine's stopping rule, with near-zero
    /// iterates in place of exact zeros. Returns the value and `n_used`.
    pub fn limit(&self, v: &FinVec, n_max: usize) -> OracleResult<(FinVec, usize)> {
        let scale = v.norm();
        let rank = v.rank();
        if scale == 0.0 {
            return Ok((FinVec::zeros(rank), 0));
        }
        let depth = v.iter().map(|(k, _)| self.section.lattice.depth(k)).max().unwrap_or(0) as usize;
        let x = self.section.gather_cols(v)?;
        let mut prev = x.clone();
        let mut mn = DMatrix::identity(x.len(), x.len());
        let mut run = 0;
        for n in 1..=n_max {
            mn = self.m() * mn;
            let next = &mn * pinv(&mn) * &x;
            if next.norm() <= self.tol * scale {
                return Ok((FinVec::zeros(rank), n));
            }
            run = if (&next - &prev).norm() <= self.tol * scale { run + 1 } else { 0 };
            if run >= 3 && n > depth {
                return Ok((self.section.scatter_cols(&next), n));
            }
            prev = next;
        }
        Err(OracleError::NoSettle(n_max))
    }

    /// Dense `decompose`: limit part plus `Mʲ(I − MM⁺)(M⁺)ʲv`.
    pub fn decompose(&self, v: &FinVec, n_max: usize, j_max: usize) -> OracleResult<WoldResult> {
        let (limit, n_used) = self.limit(v, n_max)?;
        let scale = v.norm();
        let k = self.m().nrows();
        let defect = DMatrix::identity(k, k) - self.m() * &self.pinv;
        let mut remainder = self.section.gather_cols(v)? - self.section.gather_cols(&limit)?;
        let mut y = self.section.gather_cols(v)?;
        let mut mj = DMatrix::identity(k, k);
        let mut comps = Vec::new();
        let mut run = 0;
        let mut done = scale == 0.0;
        for j in 0..j_max {
            if done {
                break;
            }
            if j > 0 {
                y = &self.pinv * y;
                mj = self.m() * mj;
            }
            if y.norm() <= self.tol * scale {
                break;
            }
            let c = &mj * (&defect * &y);
            remainder -= &c;
            let small = c.norm() <= self.tol * scale;
            comps.push(self.section.scatter_cols(&c));
            run = if small && remainder.norm() <= self.tol * scale { run + 1 } else { 0 };
            done = run == 3;
        }
        let mut cross: f64 = 0.0;
        for a in 0..comps.len() {
            for b in a + 1..comps.len() {
                cross = cross.max(woldkit_core::seqspace::inner(&comps[a], &comps[b])?.norm());
            }
        }
        Ok(WoldResult {
            limit_part: limit,
            j_used: comps.len(),
            components: comps,
            reconstruction_residual: remainder.norm(),
            convergence_history: Vec::new(),
            n_used,
            max_cross_inner: cross,
            classd_gap: 0.0,
            flags: vec![String::from("dense oracle")],
        })
    }
}

/// Orthonormal basis of the null space of a full-image section (the dense
/// counterpart of the wandering basis when built from `T*`).
pub fn oracle_null_space(d: &DenseSection, tol: f64) -> Vec<FinVec> {
    let m = &d.matrix;
    let g = m.adjoint() * m;
    let eig = g.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(1.0f64, |a, b| a.max(b.abs()));
    let mut out = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= tol * top {
            let col: DVector<C64> = eig.eigenvectors.column(i).into_owned();
            out.push(d.scatter_cols(&col));
        }
    }
    out
}

/// `‖(M*M)^{−1/2} b‖` for a full-image section of `Tⁿ`.
pub fn oracle_inverse_sqrt_norm(d: &DenseSection, b: &FinVec) -> OracleResult<f64> {
    let g = d.matrix.adjoint() * &d.matrix;
    let eig = g.symmetric_eigen();
    let x = d.gather_cols(b)?;
    let c = eig.eigenvectors.adjoint() * x;
    Ok(c.iter().zip(eig.eigenvalues.iter()).map(|(ci, &l)| ci.norm_sqr() / l).sum::<f64>().sqrt())
}

/// Dense `‖G_n^{−1/2}(T*)ⁿh‖` on a window around `h`.
pub fn oracle_criterion(t: &BandOp, h: &FinVec, n: usize, window: &Window) -> OracleResult<f64> {
    let tn = power(t, n);
    let b = tn.adjoint().apply(h)?;
    let d = dense_section_with_image(&tn, window)?;
    oracle_inverse_sqrt_norm(&d, &b)
}

/// Dense fourfold split from two square sections on the same window.
pub fn oracle_fourfold(e1: &DenseEngine, e2: &DenseEngine, h: &FinVec, n_max: usize) -> OracleResult<[FinVec; 4]> {
    let (q2, _) = e2.limit(h, n_max)?;
    let (q1q2, _) = e1.limit(&q2, n_max)?;
    let (q1, _) = e1.limit(h, n_max)?;
    let inf_s = &q1 - &q1q2;
    let s_inf = &q2 - &q1q2;
    let s_s = &(&(h - &q1) - &q2) + &q1q2;
    Ok([q1q2, inf_s, s_inf, s_s])
}

/// Largest relative difference between two decompositions, components
/// aligned by index (missing ones count as zero).
pub fn wold_delta(a: &WoldResult, b: &WoldResult, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let zero = FinVec::zeros(a.limit_part.rank());
    let mut d = (&a.limit_part - &b.limit_part).norm();
    for j in 0..a.components.len().max(b.components.len()) {
        let x = a.components.get(j).unwrap_or(&zero);
        let y = b.components.get(j).unwrap_or(&zero);
        d = d.max((x - y).norm());
    }
    d / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use woldkit_core::{c64, zoo, WeightFn};

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(Index::d1(lo), Index::d1(hi))
    }

    #[test]
    fn unweighted_shift_section_is_subdiagonal() {
        let d = dense_section(&zoo::unilateral_shift(), &w(0, 3)).unwrap();
        let mut expect = DMatrix::<C64>::zeros(4, 4);
        for i in 1..4 {
            expect[(i, i - 1)] = c64(1.0, 0.0);
        }
        assert_eq!(d.matrix, expect);
    }

    #[test]
    fn bergman_section_carries_weights() {
        let d = dense_section(&zoo::bergman_shift(), &w(0, 2)).unwrap();
        assert!((d.matrix[(1, 0)].re - (0.5f64).sqrt()).abs() < 1e-15);
        assert!((d.matrix[(2, 1)].re - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(d.matrix[(0, 0)], c64(0.0, 0.0));
    }

    #[test]
    fn diagonal_weight_gives_diagonal_matrix() {
        let t = BandOp::identity(Lattice::natural()).scale(c64(3.0, 0.0));
        let d = dense_section(&t, &w(0, 3)).unwrap();
        assert_eq!(d.matrix, DMatrix::from_diagonal_element(4, 4, c64(3.0, 0.0)));
        let tab = woldkit_core::bandop::BandOp::from_bands(
            Lattice::natural(),
            vec![woldkit_core::bandop::Band {
                offset: Index::d1(0),
                weight: woldkit_core::weight::BandWeight::Seq {
                    axis: 0,
                    w: WeightFn::Table { values: vec![c64(1.0, 0.0), c64(2.0, 0.0), c64(5.0, 0.0)], default: c64(0.0, 0.0) },
                },
            }],
        )
        .unwrap();
        let d = dense_section(&tab, &w(0, 2)).unwrap();
        assert_eq!(d.matrix, DMatrix::from_diagonal(&DVector::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0), c64(5.0, 0.0)])));
    }

    #[test]
    fn left_inverse_examples() {
        let id = BandOp::identity(Lattice::natural());
        let d = dense_section(&id, &w(0, 5)).unwrap();
        let v = FinVec::basis(Index::d1(2)).scale(c64(0.0, 2.0));
        assert_eq!(oracle_left_inverse(&d, &v, 0).unwrap(), v);
        let d = dense_section(&zoo::unilateral_shift(), &w(0, 8)).unwrap();
        let x = oracle_left_inverse(&d, &FinVec::basis(Index::d1(3)), 1).unwrap();
        assert!((&x - &FinVec::basis(Index::d1(2))).norm() < 1e-14);
    }

    #[test]
    fn zero_section_is_rank_deficient() {
        let d = dense_section(&BandOp::zero(Lattice::natural()), &w(0, 4)).unwrap();
        assert!(matches!(oracle_left_inverse(&d, &FinVec::basis(Index::d1(0)), 1), Err(OracleError::RankDeficient { .. })));
    }

    #[test]
    fn window_cap() {
        let t = zoo::unilateral_shift();
        assert!(matches!(dense_section(&t, &w(0, 5000)), Err(OracleError::WindowTooLarge { .. })));
    }

    #[test]
    fn guard_rule_is_enforced() {
        let l = Lattice::natural();
        let win = w(0, 10);
        assert!(check_guard(&win, &l, &[Index::d1(2)], 3, 1).is_ok());
        assert!(matches!(check_guard(&win, &l, &[Index::d1(8)], 3, 1), Err(OracleError::GuardViolation { distance: 2, .. })));
    }

    #[test]
    fn null_space_of_adjoint() {
        let s = zoo::unilateral_shift();
        let d = dense_section_with_image(&s.adjoint(), &w(0, 6)).unwrap();
        let ns = oracle_null_space(&d, 1e-12);
        assert_eq!(ns.len(), 1);
        assert!((ns[0].get(&Index::d1(0)).norm() - 1.0).abs() < 1e-14);
    }
}
