//! Fourfold split `h = Q₁Q₂h + Q₁(I−Q₂)h + (I−Q₁)Q₂h + (I−Q₁)(I−Q₂)h`
//! for a double-commuting pair, where `Q_i` projects onto `∩ T_iⁿℋ`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bandop::{BandOp, GramSolveParams};
use crate::classd::{double_commuting_residual, ALGEBRAIC_TOL};
use crate::error::Result;
use crate::probes::basis_probes;
use crate::seqspace::{inner, FinVec};
use crate::wold::shift_limit_project;

/// `Q h`, the projection onto `∩ Tⁿℋ`.
pub fn q_project(t: &BandOp, h: &FinVec, p: &GramSolveParams, n_max: usize) -> Result<FinVec> {
    Ok(shift_limit_project(t, h, p, n_max)?.value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourfoldResult {
    /// `Q₁Q₂h`
    pub inf_inf: FinVec,
    /// `Q₁(I−Q₂)h`
    pub inf_s: FinVec,
    /// `(I−Q₁)Q₂h`
    pub s_inf: FinVec,
    /// `(I−Q₁)(I−Q₂)h`
    pub s_s: FinVec,
    /// `‖h − Σ parts‖`
    pub residual: f64,
    /// `max_{i≠j} |⟨part_i, part_j⟩|`
    pub cross_terms: f64,
    /// `‖Q₁Q₂h − Q₂Q₁h‖`
    pub order_delta: f64,
    /// Largest commutator residual of the pair on basis probes.
    pub double_commuting: f64,
    pub flags: Vec<String>,
}

impl FourfoldResult {
    /// Parts in the order `∞∞, ∞s, s∞, ss` with their tags.
    pub fn parts(&self) -> [(&'static str, &FinVec); 4] {
        [("inf_inf", &self.inf_inf), ("inf_s", &self.inf_s), ("s_inf", &self.s_inf), ("s_s", &self.s_s)]
    }
}

/// Parts of `h` for the pair `(T₁, T₂)`. Inner limits run at a tolerance
/// ten times tighter than the outer one. Pairs that fail the
/// double-commuting check are still split, with a flag.
pub fn fourfold(t1: &BandOp, t2: &BandOp, h: &FinVec, p: &GramSolveParams, n_max: usize) -> Result<FourfoldResult> {
    let probes = basis_probes(t1.lattice(), 16);
    let dc = double_commuting_residual(t1, t2, &probes)?;
    let inner_p = p.with_tol(p.tol / 10.0);

    let q2 = q_project(t2, h, &inner_p, n_max)?;
    let q1q2 = q_project(t1, &q2, p, n_max)?;
    let q1 = q_project(t1, h, &inner_p, n_max)?;
    let q2q1 = q_project(t2, &q1, p, n_max)?;

    let inf_inf = q1q2.clone();
    let inf_s = &q1 - &q1q2;
    let s_inf = &q2 - &q1q2;
    let s_s = &(&(h - &q1) - &q2) + &q1q2;

    let total = &(&(&inf_inf + &inf_s) + &s_inf) + &s_s;
    let residual = (h - &total).norm();
    let parts = [&inf_inf, &inf_s, &s_inf, &s_s];
    let mut cross: f64 = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            cross = cross.max(inner(parts[a], parts[b])?.norm());
        }
    }
    let order_delta = (&q1q2 - &q2q1).norm();

    let mut flags = Vec::new();
    if !dc.passed {
        flags.push(format!(
            "WARNING: pair is not double-commuting (residual {:e} > {:e}); the four parts need not be orthogonal",
            dc.residual, ALGEBRAIC_TOL
        ));
    }
    let scale = h.norm();
    if cross > 1e-10 * scale * scale {
        flags.push(format!("parts not orthogonal: cross terms {cross:e}"));
    }
    if order_delta > 1e-10 * scale {
        flags.push(format!("Q1Q2 and Q2Q1 differ by {order_delta:e}"));
    }
    Ok(FourfoldResult { inf_inf, inf_s, s_inf, s_s, residual, cross_terms: cross, order_delta, double_commuting: dc.residual, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{Axis, Index};
    use crate::weight::WeightFn;
    use crate::zoo;

    fn e2(a: i64, b: i64) -> FinVec {
        FinVec::basis(Index::d2(a, b))
    }

    #[test]
    fn q_project_examples() {
        let p = GramSolveParams::default();
        let h = &FinVec::basis(Index::d1(2)) + &FinVec::basis(Index::d1(5));
        assert!(q_project(&zoo::unilateral_shift(), &h, &p, 64).unwrap().is_zero());
        assert!((&q_project(&zoo::bilateral_shift(), &h, &p, 64).unwrap() - &h).norm() < 1e-14);
        let (t1, _) = zoo::tensor_pair(WeightFn::constant(1.0), WeightFn::constant(1.0)).unwrap();
        assert!(q_project(&t1, &e2(0, 0), &p, 64).unwrap().is_zero());
    }

    #[test]
    fn unilateral_pair_is_all_shift() {
        let (t1, t2) = zoo::tensor_pair(WeightFn::constant(1.0), WeightFn::constant(1.0)).unwrap();
        let h = e2(0, 0);
        let r = fourfold(&t1, &t2, &h, &GramSolveParams::default(), 64).unwrap();
        assert_eq!(r.s_s, h);
        assert!(r.inf_inf.is_zero() && r.inf_s.is_zero() && r.s_inf.is_zero());
        assert_eq!(r.residual, 0.0);
        assert!(r.flags.is_empty(), "{:?}", r.flags);
    }

    #[test]
    fn bilateral_pair_is_all_limit() {
        let (t1, t2) = zoo::tensor_pair_on(WeightFn::constant(1.0), Axis::Integer, WeightFn::constant(1.0), Axis::Integer).unwrap();
        let h = &e2(0, 0) + &e2(-2, 3);
        let r = fourfold(&t1, &t2, &h, &GramSolveParams::default(), 64).unwrap();
        assert!((&r.inf_inf - &h).norm() < 1e-13);
        assert!(r.residual < 1e-13 && r.cross_terms < 1e-13);
    }

    #[test]
    fn mixed_pair_is_inf_s() {
        let (t1, t2) = zoo::tensor_pair_on(WeightFn::constant(1.0), Axis::Integer, WeightFn::constant(1.0), Axis::Natural).unwrap();
        let h = e2(0, 0);
        let r = fourfold(&t1, &t2, &h, &GramSolveParams::default(), 64).unwrap();
        assert!((&r.inf_s - &h).norm() < 1e-13);
        assert!(r.inf_inf.norm() < 1e-13 && r.s_inf.norm() < 1e-13 && r.s_s.norm() < 1e-13);
    }

    #[test]
    fn non_commuting_pair_is_flagged() {
        let b = zoo::bergman_shift().tensor_identity(0, Axis::Natural).unwrap();
        let r = fourfold(&b, &b, &e2(1, 1), &GramSolveParams::default(), 64).unwrap();
        assert!(r.flags.iter().any(|f| f.starts_with("WARNING")));
    }
}
