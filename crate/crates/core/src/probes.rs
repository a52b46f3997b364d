//! Deterministic probe vectors for the residual diagnostics.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::index::Lattice;
use crate::seqspace::FinVec;
use crate::C64;

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const BASIS_PROBES: usize = 21;
pub const RANDOM_PROBES: usize = 8;
pub const RANDOM_SUPPORT: usize = 16;

/// `e_p` for the first `count` lattice points (see [`Lattice::first_points`]).
pub fn basis_probes(lattice: &Lattice, count: usize) -> Vec<FinVec> {
    lattice.first_points(count).into_iter().map(FinVec::basis).collect()
}

/// `count` complex vectors with support drawn from the first `pool` lattice
/// points; support sizes are uniform in `1..=max_support`, entries uniform
/// in the unit square.
pub fn random_probes(lattice: &Lattice, count: usize, max_support: usize, pool: usize, seed: u64) -> Vec<FinVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = lattice.first_points(pool);
    (0..count)
        .map(|_| {
            let size = rng.gen_range(1..=max_support.min(points.len()).max(1));
            let mut chosen: Vec<_> = points.choose_multiple(&mut rng, size).copied().collect();
            chosen.sort();
            let entries = chosen.into_iter().map(|k| (k, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            FinVec::from_entries(lattice.rank(), entries).expect("lattice rank")
        })
        .collect()
}

/// Basis vectors for the first 21 lattice points plus 8 seeded random vectors
/// with support at most 16.
pub fn default_probes(lattice: &Lattice, seed: u64) -> Vec<FinVec> {
    let mut out = basis_probes(lattice, BASIS_PROBES);
    out.extend(random_probes(lattice, RANDOM_PROBES, RANDOM_SUPPORT, 2 * BASIS_PROBES, seed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_are_reproducible() {
        let l = Lattice::natural();
        let a = default_probes(&l, DEFAULT_SEED);
        let b = default_probes(&l, DEFAULT_SEED);
        assert_eq!(a, b);
        assert_eq!(a.len(), BASIS_PROBES + RANDOM_PROBES);
        assert!(a[BASIS_PROBES..].iter().all(|v| v.len() <= RANDOM_SUPPORT && !v.is_zero()));
        assert_ne!(a, default_probes(&l, 1));
    }
}
