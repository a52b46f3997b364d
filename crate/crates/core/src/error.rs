use alloc::string::String;

use crate::index::Index;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("index {0} lies outside the operator lattice")]
    OutsideLattice(Index),

    #[error("operators live on different lattices")]
    LatticeMismatch,

    #[error("gram solve did not reach tolerance: residual {residual:e} on a window of {window} sites")]
    NoConvergence { residual: f64, window: usize },

    #[error("nested projections did not settle within {n_max} steps (last delta {last_delta:e})")]
    NoStrongConvergence { n_max: usize, last_delta: f64 },

    #[error("series did not terminate within {j_max} terms (tail norm {tail_norm:e})")]
    SeriesNotConverged { j_max: usize, tail_norm: f64 },

    #[error("input is not in the intersection of the ranges (residual {residual:e})")]
    InputNotInHInfinity { residual: f64 },

    #[error("translation step t = {t} is not an integer multiple of the grid step h = {h}")]
    IncommensurateStep { t: f64, h: f64 },

    #[error("block weight is not Hermitian positive definite: {0}")]
    NotHermitianPositiveDefinite(String),

    #[error("weight family {family} is only defined on the natural half-line")]
    WeightDomain { family: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
