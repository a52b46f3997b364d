//! Operator families: weighted shifts, weighted translations on a grid, the
//! quasinormal block shift, tensor pairs and direct sums.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bandop::{Band, BandOp};
use crate::dense::{cholesky_solve, CMat};
use crate::error::{Error, Result};
use crate::index::{Axis, Index, Lattice};
use crate::weight::{BandWeight, PhiFamily, WeightFn};
use crate::C64;

fn lattice_for(axis: Axis) -> Result<Lattice> {
    match axis {
        Axis::Natural | Axis::Integer => Ok(Lattice::Grid(vec![axis])),
        Axis::Finite(_) => Err(Error::InvalidArgument("weighted shifts live on ℕ or ℤ".into())),
    }
}

fn seq_weight(w: WeightFn) -> BandWeight {
    match w {
        WeightFn::Constant(c) => BandWeight::Const(c),
        w => BandWeight::Seq { axis: 0, w },
    }
}

/// `T e_k = w_k e_{k+step}` on `ℕ` or `ℤ`.
pub fn weighted_shift(w: WeightFn, step: usize, axis: Axis) -> Result<BandOp> {
    if step == 0 {
        return Err(Error::InvalidArgument("shift step must be positive".into()));
    }
    if axis == Axis::Integer {
        if let Some(family) = w.natural_only() {
            return Err(Error::WeightDomain { family });
        }
    }
    BandOp::from_bands(lattice_for(axis)?, vec![Band { offset: Index::d1(step as i64), weight: seq_weight(w) }])
}

/// Unweighted unilateral shift on `ℓ²(ℕ)`.
pub fn unilateral_shift() -> BandOp {
    weighted_shift(WeightFn::constant(1.0), 1, Axis::Natural).expect("valid")
}

/// Unweighted bilateral shift on `ℓ²(ℤ)`.
pub fn bilateral_shift() -> BandOp {
    weighted_shift(WeightFn::constant(1.0), 1, Axis::Integer).expect("valid")
}

pub fn bergman_shift() -> BandOp {
    weighted_shift(WeightFn::Bergman, 1, Axis::Natural).expect("valid")
}

pub fn dirichlet_shift() -> BandOp {
    weighted_shift(WeightFn::Dirichlet, 1, Axis::Natural).expect("valid")
}

/// Grid form of `Tf(x) = φ(x)/φ(x−t) f(x−t)` with sites `x_j = j·h`: a shift
/// of step `s = t/h` with weights `φ((j+s)h)/φ(jh)`.
pub fn weighted_translation(phi: PhiFamily, t: f64, h: f64) -> Result<BandOp> {
    if !(t > 0.0 && h > 0.0) || !t.is_finite() || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("translation needs t > 0 and h > 0 (got t = {t}, h = {h})")));
    }
    let ratio = t / h;
    let s = libm::round(ratio);
    if s < 1.0 || (ratio - s).abs() > 1e-9 * ratio {
        return Err(Error::IncommensurateStep { t, h });
    }
    validate_phi(&phi)?;
    let step = s as usize;
    weighted_shift(WeightFn::PhiRatio { phi, step, h }, step, Axis::Natural)
}

fn validate_phi(phi: &PhiFamily) -> Result<()> {
    match phi {
        PhiFamily::Exp { alpha } if alpha.is_finite() => Ok(()),
        PhiFamily::Power { beta } if beta.is_finite() => Ok(()),
        PhiFamily::Table { samples, step } => {
            if samples.is_empty() || !(*step > 0.0) {
                return Err(Error::InvalidArgument("φ table needs samples and a positive step".into()));
            }
            if samples.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidArgument("φ table samples must be positive".into()));
            }
            Ok(())
        }
        _ => Err(Error::InvalidArgument("φ parameters must be finite".into())),
    }
}

/// `T(k₀, k₁, …) = (0, Lk₀, Lk₁, …)` on `ℓ²(𝒦)`, `dim 𝒦 = d`, as a rank-2
/// operator on `ℕ × {0..d}`. Entry `L[r][c]` becomes the band with offset
/// `(1, r − c)` selected on source coordinate `c`.
pub fn quasinormal_block(l: &[Vec<C64>]) -> Result<BandOp> {
    let d = l.len();
    if d == 0 || l.iter().any(|row| row.len() != d) {
        return Err(Error::NotHermitianPositiveDefinite("L must be a nonempty square matrix".into()));
    }
    let scale = l.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    let mut m = CMat::zeros(d);
    for r in 0..d {
        for c in 0..d {
            if (l[r][c] - l[c][r].conj()).norm() > 1e-12 * scale.max(1.0) {
                return Err(Error::NotHermitianPositiveDefinite(format!("L[{r}][{c}] ≠ conj(L[{c}][{r}])")));
            }
            *m.at_mut(r, c) = l[r][c];
        }
    }
    let rhs = vec![C64::new(1.0, 0.0); d];
    if cholesky_solve(&m, &rhs).is_none() {
        return Err(Error::NotHermitianPositiveDefinite("L is not positive definite".into()));
    }
    let lattice = Lattice::grid(&[Axis::Natural, Axis::Finite(d as u32)]);
    let mut bands = Vec::new();
    for r in 0..d {
        for c in 0..d {
            if l[r][c] == C64::new(0.0, 0.0) {
                continue;
            }
            bands.push(Band {
                offset: Index::d2(1, r as i64 - c as i64),
                weight: BandWeight::Select { axis: 1, value: c as i64, inner: Arc::new(BandWeight::Const(l[r][c])) },
            });
        }
    }
    BandOp::from_bands(lattice, bands)
}

/// `T₁ = S_{w1} ⊗ I`, `T₂ = I ⊗ S_{w2}` on `ℓ²(ℕ²)`.
pub fn tensor_pair(w1: WeightFn, w2: WeightFn) -> Result<(BandOp, BandOp)> {
    tensor_pair_on(w1, Axis::Natural, w2, Axis::Natural)
}

/// Tensor pair with the lattice of each factor chosen independently.
pub fn tensor_pair_on(w1: WeightFn, a1: Axis, w2: WeightFn, a2: Axis) -> Result<(BandOp, BandOp)> {
    let s1 = weighted_shift(w1, 1, a1)?;
    let s2 = weighted_shift(w2, 1, a2)?;
    Ok((s1.tensor_identity(0, a2)?, s2.tensor_identity(1, a1)?))
}

pub fn direct_sum(a: &BandOp, b: &BandOp) -> Result<BandOp> {
    BandOp::direct_sum(a, b)
}
