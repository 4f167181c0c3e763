//! Complex banded LU factorisation with partial pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::DiscreteOperator;

type C = Complex64;

/// LU factors of a banded matrix with kl sub- and ku super-diagonals.
/// Row i of the working array stores columns [i - kl, i + kl + ku].
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    a: Vec<C>,
    mult: Vec<C>,
    piv: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Factor the matrix whose entries come from `entries(i)`, an iterator of
    /// (column, value) for row i.
    pub fn factor<F, I>(n: usize, kl: usize, ku: usize, entries: F) -> Result<Self>
    where
        F: Fn(usize) -> I,
        I: Iterator<Item = (usize, C)>,
    {
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            width,
            a: vec![C::default(); n * width],
            mult: vec![C::default(); n * kl.max(1)],
            piv: vec![0; n],
        };
        for i in 0..n {
            for (j, v) in entries(i) {
                if j + kl < i || j > i + ku {
                    return Err(Error::SolverFail(format!("entry ({i}, {j}) outside band")));
                }
                let k = lu.idx(i, j);
                lu.a[k] += v;
            }
        }
        let span = kl + ku;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.a[lu.idx(k, k)].norm();
            for r in k + 1..=last {
                let v = lu.a[lu.idx(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SolverFail(format!("singular pivot at row {k}")));
            }
            lu.piv[k] = p;
            let jend = (k + span).min(n - 1);
            if p != k {
                for j in k..=jend {
                    let (x, y) = (lu.idx(k, j), lu.idx(p, j));
                    lu.a.swap(x, y);
                }
            }
            let pivot = lu.a[lu.idx(k, k)];
            for r in k + 1..=last {
                let f = lu.a[lu.idx(r, k)] / pivot;
                lu.mult[k * kl.max(1) + (r - k - 1)] = f;
                if f == C::default() {
                    continue;
                }
                let ir = lu.idx(r, k);
                lu.a[ir] = C::default();
                for j in k + 1..=jend {
                    let kj = lu.a[lu.idx(k, j)];
                    let rj = lu.idx(r, j);
                    lu.a[rj] -= f * kj;
                }
            }
        }
        Ok(lu)
    }

    /// Factor `a * I + b * op` restricted to the operator's band.
    pub fn factor_shifted(op: &DiscreteOperator, a: C, b: C) -> Result<Self> {
        let (kl, ku) = op.bandwidth();
        let n = op.dim();
        Self::factor(n, kl, ku, |i| {
            let diag = std::iter::once((i, a));
            diag.chain(op.row(i).map(move |(j, v)| (j, b * v)))
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, x: &mut [C]) {
        let n = self.n;
        let kl = self.kl;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk == C::default() {
                continue;
            }
            let last = (k + kl).min(n - 1);
            for r in k + 1..=last {
                x[r] -= self.mult[k * kl.max(1) + (r - k - 1)] * xk;
            }
        }
        let span = self.kl + self.ku;
        for k in (0..n).rev() {
            let mut s = x[k];
            let jend = (k + span).min(n - 1);
            for j in k + 1..=jend {
                s -= self.a[self.idx(k, j)] * x[j];
            }
            x[k] = s / self.a[self.idx(k, k)];
        }
    }
}
