//! Band-operator arithmetic on finitely supported sequences and Wold-type
//! decompositions for left-invertible operators.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is exact
//! band arithmetic on [`FinVec`] plus small dense kernels (banded Cholesky,
//! Hermitian Jacobi) used for guarded finite-section solves.
//!
//! Layout:
//! - [`index`]: lattice indices, lattice descriptors and windows.
//! - [`seqspace`]: finitely supported vectors, inner products, Gram–Schmidt.
//! - [`weight`]: weight sequences and band-weight expressions.
//! - [`bandop`]: band operators, adjoint, composition, Gram solves, `T⁻`.
//! - [`zoo`]: the operator families (weighted shifts, translations, blocks, pairs).
//! - [`classd`]: residual diagnostics (isometry, quasinormality, class 𝒟, pairs).
//! - [`wold`]: defect and nested projections, strong limit, series, witnesses.
//! - [`wold2d`]: fourfold split for double-commuting pairs.
#![no_std]

extern crate alloc;

pub mod bandop;
pub mod classd;
pub mod dense;
mod error;
pub mod index;
pub mod probes;
pub mod seqspace;
pub mod weight;
pub mod wold;
pub mod wold2d;
pub mod zoo;

pub use bandop::{BandOp, GramSolveParams, GramSolution, LeftInverse};
pub use error::{Error, Result};
pub use index::{Axis, Index, Lattice, Window};
pub use num_complex::Complex64 as C64;
pub use seqspace::FinVec;
pub use weight::{PhiFamily, WeightFn};

/// Shorthand for building a complex scalar.
#[inline]
pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
