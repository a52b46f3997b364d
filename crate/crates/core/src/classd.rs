//! Residual diagnostics for the hypotheses behind the decompositions.
//!
//! Every check is a maximum of normalized residuals over a stated probe set.
//! A report never claims more than "the residual on these probes is below
//! this tolerance".

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bandop::{gram, power, BandOp, GramSolveParams, LeftInverse};
use crate::error::Result;
use crate::probes;
use crate::seqspace::FinVec;

/// Tolerance for class-𝒟 residuals (one Gram solve per power).
pub const CLASSD_TOL: f64 = 1e-10;
/// Tolerance for algebraic identities that involve no solves.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    /// Maximum over `components`.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub probes: usize,
    /// Window extent for windowed checks, 0 otherwise.
    pub window: usize,
    /// Named sub-residuals.
    pub components: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(name: &str, components: Vec<(String, f64)>, tolerance: f64, probes: usize, window: usize) -> Self {
        let residual = components.iter().map(|c| c.1).fold(0.0, f64::max);
        CheckReport {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            probes,
            window,
            components,
            notes: Vec::new(),
        }
    }

    /// Same residuals, verdict re-taken at `tol`.
    pub fn at_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self.passed = self.residual <= tol;
        self
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|c| c.0 == name).map(|c| c.1)
    }

    fn note(mut self, s: &str) -> Self {
        self.notes.push(s.to_string());
        self
    }
}

fn rel(diff: &FinVec, v: &FinVec) -> f64 {
    let n = v.norm();
    if n == 0.0 {
        0.0
    } else {
        diff.norm() / n
    }
}

/// `max_k ‖T*T e_k − e_k‖` over the first `window + 1` lattice points, plus
/// `max_k ‖T⁻e_k − T*e_k‖` as component `left_inverse_vs_adjoint`.
pub fn isometry_residual(t: &BandOp, window: usize, p: &GramSolveParams) -> Result<CheckReport> {
    let probes = probes::basis_probes(t.lattice(), window + 1);
    let li = LeftInverse::new(t, *p);
    let mut gram_res: f64 = 0.0;
    let mut inv_res: f64 = 0.0;
    for e in &probes {
        gram_res = gram_res.max((&li.gram().apply(e)? - e).norm());
        inv_res = inv_res.max((&li.apply(e)? - &li.adjoint().apply(e)?).norm());
    }
    let comps = alloc::vec![("gram_minus_identity".to_string(), gram_res), ("left_inverse_vs_adjoint".to_string(), inv_res)];
    let mut r = CheckReport::new("isometry", comps, ALGEBRAIC_TOL, probes.len(), window);
    // verdict follows the Gram residual; the second component is reported alongside
    r.residual = gram_res;
    r.passed = gram_res <= r.tolerance;
    Ok(r)
}

/// `max ‖((T*T)T − T(T*T)) v‖ / ‖v‖`.
pub fn quasinormal_residual(t: &BandOp, probes: &[FinVec]) -> Result<CheckReport> {
    let g = gram(t);
    let mut res: f64 = 0.0;
    for v in probes {
        let a = g.apply(&t.apply(v)?)?;
        let b = t.apply(&g.apply(v)?)?;
        res = res.max(rel(&(&a - &b), v));
    }
    Ok(CheckReport::new("quasinormal", alloc::vec![("commutator".to_string(), res)], ALGEBRAIC_TOL, probes.len(), 0))
}

/// `max_{2≤n≤n_max} max_v ‖(Tⁿ)⁻v − (T⁻)ⁿv‖ / ‖v‖`, with `(Tⁿ)⁻` taken
/// through the Gram of `Tⁿ`. Component `n=<k>` holds the residual per power.
pub fn classd_residual(t: &BandOp, n_max: usize, probes: &[FinVec], p: &GramSolveParams) -> Result<CheckReport> {
    assert!(n_max >= 2, "class-D residual needs n_max ≥ 2");
    let li = LeftInverse::new(t, *p);
    let mut per_n = alloc::vec![0.0f64; n_max + 1];
    for v in probes {
        let mut y = v.clone();
        y = li.apply(&y)?;
        for n in 2..=n_max {
            y = li.apply(&y)?;
            let x = LeftInverse::new(&power(t, n), *p).apply(v)?;
            per_n[n] = per_n[n].max(rel(&(&x - &y), v));
        }
    }
    let comps = (2..=n_max).map(|n| (alloc::format!("n={n}"), per_n[n])).collect();
    Ok(CheckReport::new("class_d", comps, CLASSD_TOL, probes.len(), 0))
}

/// Commutators `T₁T₂ − T₂T₁` and `T₁T₂* − T₂*T₁` on probes.
pub fn double_commuting_residual(t1: &BandOp, t2: &BandOp, probes: &[FinVec]) -> Result<CheckReport> {
    let t2s = t2.adjoint();
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    for v in probes {
        let a = t1.apply(&t2.apply(v)?)?;
        let b = t2.apply(&t1.apply(v)?)?;
        c1 = c1.max(rel(&(&a - &b), v));
        let a = t1.apply(&t2s.apply(v)?)?;
        let b = t2s.apply(&t1.apply(v)?)?;
        c2 = c2.max(rel(&(&a - &b), v));
    }
    let comps = alloc::vec![("commute".to_string(), c1), ("commute_with_adjoint".to_string(), c2)];
    Ok(CheckReport::new("double_commuting", comps, ALGEBRAIC_TOL, probes.len(), 0))
}

/// Class-𝒟 residual of `T₁T₂` together with `max ‖(T₁T₂)⁻v − T₁⁻(T₂⁻v)‖/‖v‖`.
pub fn product_closure_check(
    t1: &BandOp,
    t2: &BandOp,
    n_max: usize,
    probes: &[FinVec],
    p: &GramSolveParams,
) -> Result<CheckReport> {
    let prod = BandOp::compose(t1, t2)?;
    let cd = classd_residual(&prod, n_max, probes, p)?;
    let lp = LeftInverse::new(&prod, *p);
    let l1 = LeftInverse::new(t1, *p);
    let l2 = LeftInverse::new(t2, *p);
    let mut ident: f64 = 0.0;
    for v in probes {
        let x = lp.apply(v)?;
        let y = l1.apply(&l2.apply(v)?)?;
        ident = ident.max(rel(&(&x - &y), v));
    }
    let comps = alloc::vec![("class_d_of_product".to_string(), cd.residual), ("product_left_inverse".to_string(), ident)];
    Ok(CheckReport::new("product_closure", comps, 1e-9, probes.len(), 0)
        .note("hypotheses (class 𝒟 of factors, double commutation) are recorded separately, not enforced"))
}
