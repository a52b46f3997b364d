//! Small dense kernels behind the guarded finite-section solves: connected
//! block splitting, banded Cholesky and a cyclic Jacobi eigensolver for
//! Hermitian matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Sparse square matrix given by its nonzero entries.
#[derive(Clone, Debug, Default)]
pub struct SparseSquare {
    pub n: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseSquare {
    /// Index sets of the connected components of the nonzero pattern.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(i, j, _) in &self.entries {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut root_slot = vec![usize::MAX; self.n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.n {
            let r = find(&mut parent, i);
            if root_slot[r] == usize::MAX {
                root_slot[r] = out.len();
                out.push(Vec::new());
            }
            out[root_slot[r]].push(i);
        }
        out
    }

    /// Dense principal submatrix on `idx` (which must be sorted).
    pub fn dense_block(&self, idx: &[usize]) -> CMat {
        let mut pos = vec![usize::MAX; self.n];
        for (p, &i) in idx.iter().enumerate() {
            pos[i] = p;
        }
        let mut m = CMat::zeros(idx.len());
        for &(i, j, x) in &self.entries {
            if pos[i] != usize::MAX && pos[j] != usize::MAX {
                *m.at_mut(pos[i], pos[j]) += x;
            }
        }
        m
    }
}

/// Dense square complex matrix, row major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![ZERO; n * n] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }

    /// Largest `|i − j|` over nonzero entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                if self.at(i, j) != ZERO {
                    b = b.max(i.abs_diff(j));
                }
            }
        }
        b
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.at(i, j) * x[j]).sum()).collect()
    }
}

/// Solves `A x = b` for Hermitian positive-definite `A` with a banded
/// Cholesky factorization `A = L Lᴴ`. Returns `None` on a nonpositive pivot.
pub fn cholesky_solve(a: &CMat, b: &[C64]) -> Option<Vec<C64>> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    if n == 0 {
        return Some(Vec::new());
    }
    let bw = a.bandwidth();
    // l[i][d] = L[i][i-d], 0 ≤ d ≤ bw
    let w = bw + 1;
    let mut l = vec![ZERO; n * w];
    let lget = |l: &[C64], i: usize, j: usize| -> C64 {
        if j > i || i - j > bw {
            ZERO
        } else {
            l[i * w + (i - j)]
        }
    };
    for j in 0..n {
        let k0 = j.saturating_sub(bw);
        let mut d = a.at(j, j).re;
        for k in k0..j {
            d -= lget(&l, j, k).norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let ljj = libm::sqrt(d);
        l[j * w] = C64::new(ljj, 0.0);
        for i in j + 1..(j + bw + 1).min(n) {
            let mut s = a.at(i, j);
            for k in i.saturating_sub(bw).max(k0)..j {
                s -= lget(&l, i, k) * lget(&l, j, k).conj();
            }
            l[i * w + (i - j)] = s / ljj;
        }
    }
    // L y = b
    let mut y = vec![ZERO; n];
    for i in 0..n {
        let mut s = b[i];
        for k in i.saturating_sub(bw)..i {
            s -= lget(&l, i, k) * y[k];
        }
        y[i] = s / l[i * w].re;
    }
    // Lᴴ x = y
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..(i + bw + 1).min(n) {
            s -= lget(&l, k, i).conj() * x[k];
        }
        x[i] = s / l[i * w].re;
    }
    Some(x)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` of `vectors` pairs with `values[k]`.
    pub vectors: CMat,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.dim()).map(|i| self.vectors.at(i, k)).collect()
    }
}

/// Cyclic Jacobi sweeps on a Hermitian matrix (only the upper triangle is
/// trusted; the lower one is overwritten by its conjugate).
pub fn hermitian_eigen(a: &CMat) -> HermitianEigen {
    let n = a.dim();
    let mut m = a.clone();
    for i in 0..n {
        *m.at_mut(i, i) = C64::new(m.at(i, i).re, 0.0);
        for j in i + 1..n {
            let x = m.at(i, j);
            *m.at_mut(j, i) = x.conj();
        }
    }
    let mut v = CMat::zeros(n);
    for i in 0..n {
        *v.at_mut(i, i) = C64::new(1.0, 0.0);
    }
    let fro: f64 = libm::sqrt(m.data.iter().map(|x| x.norm_sqr()).sum::<f64>());
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m.at(i, j).norm_sqr())
            .sum();
        if libm::sqrt(off) <= 1e-17 * fro || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.at(p, q);
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = m.at(p, p).re;
                let aqq = m.at(q, q).re;
                let phase = apq / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // V = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let vpp = C64::new(c, 0.0);
                let vpq = C64::new(s, 0.0);
                let vqp = phase.conj() * (-s);
                let vqq = phase.conj() * c;
                // columns: M ← M V
                for i in 0..n {
                    let mip = m.at(i, p);
                    let miq = m.at(i, q);
                    *m.at_mut(i, p) = mip * vpp + miq * vqp;
                    *m.at_mut(i, q) = mip * vpq + miq * vqq;
                    let xip = v.at(i, p);
                    let xiq = v.at(i, q);
                    *v.at_mut(i, p) = xip * vpp + xiq * vqp;
                    *v.at_mut(i, q) = xip * vpq + xiq * vqq;
                }
                // rows: M ← Vᴴ M
                for j in 0..n {
                    let mpj = m.at(p, j);
                    let mqj = m.at(q, j);
                    *m.at_mut(p, j) = vpp.conj() * mpj + vqp.conj() * mqj;
                    *m.at_mut(q, j) = vpq.conj() * mpj + vqq.conj() * mqj;
                }
                *m.at_mut(p, q) = ZERO;
                *m.at_mut(q, p) = ZERO;
                let dp = m.at(p, p).re;
                let dq = m.at(q, q).re;
                *m.at_mut(p, p) = C64::new(dp, 0.0);
                *m.at_mut(q, q) = C64::new(dq, 0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.at(i, i).re.partial_cmp(&m.at(j, j).re).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m.at(i, i).re).collect();
    let mut vectors = CMat::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            *vectors.at_mut(i, col) = v.at(i, k);
        }
    }
    HermitianEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn herm_example() -> CMat {
        let mut a = CMat::zeros(3);
        let vals = [
            [c64(4.0, 0.0), c64(1.0, 1.0), c64(0.0, 0.0)],
            [c64(1.0, -1.0), c64(3.0, 0.0), c64(0.5, -0.25)],
            [c64(0.0, 0.0), c64(0.5, 0.25), c64(2.0, 0.0)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                *a.at_mut(i, j) = vals[i][j];
            }
        }
        a
    }

    #[test]
    fn cholesky_solves_hermitian_system() {
        let a = herm_example();
        let b = [c64(1.0, 0.0), c64(0.0, 2.0), c64(-1.0, 1.0)];
        let x = cholesky_solve(&a, &b).unwrap();
        let ax = a.matvec(&x);
        for i in 0..3 {
            assert!((ax[i] - b[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = CMat::zeros(2);
        *a.at_mut(0, 0) = c64(1.0, 0.0);
        *a.at_mut(0, 1) = c64(2.0, 0.0);
        *a.at_mut(1, 0) = c64(2.0, 0.0);
        *a.at_mut(1, 1) = c64(1.0, 0.0);
        assert!(cholesky_solve(&a, &[c64(1.0, 0.0), c64(1.0, 0.0)]).is_none());
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let a = herm_example();
        let e = hermitian_eigen(&a);
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // A v_k = λ_k v_k and Vᴴ V = I
        for k in 0..3 {
            let vk = e.vector(k);
            let av = a.matvec(&vk);
            for i in 0..3 {
                assert!((av[i] - vk[i] * e.values[k]).norm() < 1e-13);
            }
            for l in 0..3 {
                let vl = e.vector(l);
                let g: C64 = vk.iter().zip(&vl).map(|(x, y)| x.conj() * y).sum();
                let target = if k == l { 1.0 } else { 0.0 };
                assert!((g - c64(target, 0.0)).norm() < 1e-13);
            }
        }
        let trace: f64 = e.values.iter().sum();
        assert!((trace - 9.0).abs() < 1e-13);
    }

    #[test]
    fn blocks_split_disconnected_pattern() {
        let s = SparseSquare {
            n: 5,
            entries: vec![(0, 0, c64(1.0, 0.0)), (1, 3, c64(1.0, 0.0)), (3, 1, c64(1.0, 0.0)), (2, 2, c64(1.0, 0.0))],
        };
        let b = s.blocks();
        assert_eq!(b, vec![vec![0], vec![1, 3], vec![2], vec![4]]);
    }
}
