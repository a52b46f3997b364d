//! Weight sequences and the band-weight expressions built from them.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::index::{Index, Lattice};
use crate::C64;

/// Scalar weight sequence `k ↦ w_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightFn {
    Constant(C64),
    /// `√((k+1)/(k+2))`
    Bergman,
    /// `√((k+2)/(k+1))`
    Dirichlet,
    /// `values[k]` for `0 ≤ k < len`, `default` everywhere else.
    Table { values: Vec<C64>, default: C64 },
    /// `φ((k+step)·h) / φ(k·h)`, the grid form of a weighted translation.
    PhiRatio { phi: PhiFamily, step: usize, h: f64 },
}

impl WeightFn {
    pub fn constant(c: f64) -> Self {
        WeightFn::Constant(C64::new(c, 0.0))
    }

    /// Bergman, Dirichlet and φ-ratio weights are sequences on `k ≥ 0`; the
    /// zoo refuses them on integer axes.
    pub fn natural_only(&self) -> Option<&'static str> {
        match self {
            WeightFn::Bergman => Some("bergman"),
            WeightFn::Dirichlet => Some("dirichlet"),
            WeightFn::PhiRatio { .. } => Some("phi_ratio"),
            _ => None,
        }
    }

    pub fn eval(&self, k: i64) -> C64 {
        match self {
            WeightFn::Constant(c) => *c,
            WeightFn::Bergman => {
                let k = k.max(0) as f64;
                C64::new(libm::sqrt((k + 1.0) / (k + 2.0)), 0.0)
            }
            WeightFn::Dirichlet => {
                let k = k.max(0) as f64;
                C64::new(libm::sqrt((k + 2.0) / (k + 1.0)), 0.0)
            }
            WeightFn::Table { values, default } => {
                if k >= 0 && (k as usize) < values.len() {
                    values[k as usize]
                } else {
                    *default
                }
            }
            WeightFn::PhiRatio { phi, step, h } => C64::new(phi.ratio(k.max(0) as usize, *step, *h), 0.0),
        }
    }

    /// Smallest `|w_k|` over `0 ≤ k < n`.
    pub fn min_modulus(&self, n: usize) -> f64 {
        (0..n as i64).map(|k| self.eval(k).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Positive profile `φ` on `[0, ∞)` for weighted translations.
#[derive(Clone, Debug, PartialEq)]
pub enum PhiFamily {
    /// `e^{αx}`
    Exp { alpha: f64 },
    /// `(1+x)^β`
    Power { beta: f64 },
    /// Samples `φ(j·step)` for `j = 0..len`; held at the last sample beyond.
    Table { samples: Vec<f64>, step: f64 },
}

impl PhiFamily {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PhiFamily::Exp { alpha } => libm::exp(alpha * x),
            PhiFamily::Power { beta } => libm::pow(1.0 + x, *beta),
            PhiFamily::Table { samples, step } => {
                let j = libm::round(x / step).max(0.0) as usize;
                samples[j.min(samples.len() - 1)]
            }
        }
    }

    /// `φ((j+s)h)/φ(jh)`. The exponential family uses the closed form `e^{αsh}`.
    pub fn ratio(&self, j: usize, s: usize, h: f64) -> f64 {
        match self {
            PhiFamily::Exp { alpha } => libm::exp(alpha * s as f64 * h),
            PhiFamily::Power { beta } => {
                let x = j as f64 * h;
                libm::pow((1.0 + x + s as f64 * h) / (1.0 + x), *beta)
            }
            PhiFamily::Table { .. } => {
                let x = j as f64 * h;
                self.eval(x + s as f64 * h) / self.eval(x)
            }
        }
    }
}

/// Weight of one band, evaluated at the source index of the band action.
///
/// Evaluation always receives the lattice the band lives on; composite nodes
/// use it to zero out paths that leave the lattice in the middle.
#[derive(Clone, Debug, PartialEq)]
pub enum BandWeight {
    Const(C64),
    /// `w(k[axis])`
    Seq { axis: usize, w: WeightFn },
    Scaled(C64, Arc<BandWeight>),
    /// `inner(k)` where `k[axis] == value`, else 0.
    Select { axis: usize, value: i64, inner: Arc<BandWeight> },
    /// On a tagged lattice: `inner` evaluated on the summand `tag`, else 0.
    Tagged { tag: i64, inner: Arc<BandWeight> },
    /// Rank-1 weight evaluated at coordinate `axis` on its own 1-D lattice.
    Lift { axis: usize, lattice: Arc<Lattice>, inner: Arc<BandWeight> },
    /// Adjoint of a band with offset `offset`: `conj(inner(k - offset))`.
    Adjoint { inner: Arc<BandWeight>, offset: Index },
    /// `left(k + right_offset) · right(k)` when `k + right_offset` is on the lattice.
    Product { left: Arc<BandWeight>, right: Arc<BandWeight>, right_offset: Index },
    Sum(Vec<BandWeight>),
}

impl BandWeight {
    pub fn eval(&self, k: &Index, lattice: &Lattice) -> C64 {
        match self {
            BandWeight::Const(c) => *c,
            BandWeight::Seq { axis, w } => w.eval(k.get(*axis)),
            BandWeight::Scaled(a, inner) => a * inner.eval(k, lattice),
            BandWeight::Select { axis, value, inner } => {
                if k.get(*axis) == *value {
                    inner.eval(k, lattice)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            BandWeight::Tagged { tag, inner } => {
                let (sub, t) = k.split_last();
                match lattice.summand(t) {
                    Some(summand) if t == *tag => inner.eval(&sub, summand),
                    _ => C64::new(0.0, 0.0),
                }
            }
            BandWeight::Lift { axis, lattice: line, inner } => inner.eval(&Index::d1(k.get(*axis)), line),
            BandWeight::Adjoint { inner, offset } => {
                let src = *k - *offset;
                if lattice.contains(&src) {
                    inner.eval(&src, lattice).conj()
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            BandWeight::Product { left, right, right_offset } => {
                let mid = *k + *right_offset;
                if lattice.contains(&mid) {
                    left.eval(&mid, lattice) * right.eval(k, lattice)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            BandWeight::Sum(terms) => terms.iter().map(|t| t.eval(k, lattice)).sum(),
        }
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, BandWeight::Const(c) if *c == C64::new(0.0, 0.0))
    }
}
