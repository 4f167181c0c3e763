//! Sparse complex operators over (radial grid) x (angular modes) in CSR form.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, WaveField};

type C = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteOperator {
    pub grid: Grid1D,
    pub modes: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C>,
    pub hermitian: bool,
}

/// Accumulates (row, col, value) entries; duplicates are summed in insertion
/// order so assembly is deterministic.
#[derive(Clone, Debug)]
pub struct TripletBuilder {
    dim: usize,
    rows: Vec<BTreeMap<usize, C>>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        TripletBuilder { dim, rows: vec![BTreeMap::new(); dim] }
    }

    pub fn add(&mut self, i: usize, j: usize, v: C) {
        assert!(i < self.dim && j < self.dim, "entry ({i}, {j}) outside dimension {}", self.dim);
        *self.rows[i].entry(j).or_default() += v;
    }

    pub fn build(self, grid: Grid1D, modes: usize, hermitian: bool) -> DiscreteOperator {
        let mut indptr = Vec::with_capacity(self.dim + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in self.rows {
            for (j, v) in row {
                if v != C::default() {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        DiscreteOperator { grid, modes, indptr, indices, data, hermitian }
    }
}

impl DiscreteOperator {
    pub fn zero(grid: Grid1D, modes: usize) -> Self {
        DiscreteOperator {
            grid,
            modes,
            indptr: vec![0; grid.n * modes + 1],
            indices: Vec::new(),
            data: Vec::new(),
            hermitian: true,
        }
    }

    pub fn identity(grid: Grid1D, modes: usize) -> Self {
        let dim = grid.n * modes;
        DiscreteOperator {
            grid,
            modes,
            indptr: (0..=dim).collect(),
            indices: (0..dim).collect(),
            data: vec![C::new(1.0, 0.0); dim],
            hermitian: true,
        }
    }

    /// Diagonal operator with entries d(i, j) at grid row i, mode j.
    pub fn diagonal(grid: Grid1D, modes: usize, d: impl Fn(usize, usize) -> C) -> Self {
        let mut b = TripletBuilder::new(grid.n * modes);
        for i in 0..grid.n {
            for j in 0..modes {
                b.add(i * modes + j, i * modes + j, d(i, j));
            }
        }
        let mut op = b.build(grid, modes, false);
        op.hermitian = op.data.iter().all(|v| v.im == 0.0);
        op
    }

    pub fn dim(&self) -> usize {
        self.grid.n * self.modes
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |k| (self.indices[k], self.data[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        let s = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match s.binary_search(&j) {
            Ok(k) => self.data[self.indptr[i] + k],
            Err(_) => C::default(),
        }
    }

    fn same_space(&self, other: &DiscreteOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn matvec_slice(&self, x: &[C], y: &mut [C]) {
        y.par_iter_mut().with_min_len(1024).enumerate().for_each(|(i, yi)| {
            let mut s = C::default();
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            *yi = s;
        });
    }

    pub fn apply(&self, u: &WaveField) -> Result<WaveField> {
        if u.values.len() != self.dim() {
            return Err(Error::DimensionMismatch(u.values.len(), self.dim()));
        }
        let mut out = WaveField::zeros(u.grid, u.modes);
        self.matvec_slice(&u.values, &mut out.values);
        Ok(out)
    }

    /// <u, Op u> with the grid weight h.
    pub fn quadratic_form(&self, u: &WaveField) -> Result<C> {
        Ok(u.inner(&self.apply(u)?))
    }

    pub fn adjoint(&self) -> DiscreteOperator {
        let mut b = TripletBuilder::new(self.dim());
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                b.add(j, i, v.conj());
            }
        }
        b.build(self.grid, self.modes, self.hermitian)
    }

    pub fn scale(&self, c: C) -> DiscreteOperator {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= c;
        }
        out.hermitian = self.hermitian && c.im == 0.0;
        out
    }

    pub fn add(&self, other: &DiscreteOperator) -> Result<DiscreteOperator> {
        self.lincomb(C::new(1.0, 0.0), other, C::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &DiscreteOperator) -> Result<DiscreteOperator> {
        self.lincomb(C::new(1.0, 0.0), other, C::new(-1.0, 0.0))
    }

    /// a * self + b * other
    pub fn lincomb(&self, a: C, other: &DiscreteOperator, b: C) -> Result<DiscreteOperator> {
        self.same_space(other)?;
        let mut t = TripletBuilder::new(self.dim());
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                t.add(i, j, a * v);
            }
            for (j, v) in other.row(i) {
                t.add(i, j, b * v);
            }
        }
        let herm = self.hermitian && other.hermitian && a.im == 0.0 && b.im == 0.0;
        Ok(t.build(self.grid, self.modes, herm))
    }

    /// Sparse product self * other.
    pub fn mul(&self, other: &DiscreteOperator) -> Result<DiscreteOperator> {
        self.same_space(other)?;
        let rows: Vec<Vec<(usize, C)>> = (0..self.dim())
            .into_par_iter()
            .map(|i| {
                let mut acc: BTreeMap<usize, C> = BTreeMap::new();
                for (k, a) in self.row(i) {
                    for (j, b) in other.row(k) {
                        *acc.entry(j).or_default() += a * b;
                    }
                }
                acc.into_iter().filter(|(_, v)| *v != C::default()).collect()
            })
            .collect();
        let mut indptr = Vec::with_capacity(self.dim() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for r in rows {
            for (j, v) in r {
                indices.push(j);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(DiscreteOperator { grid: self.grid, modes: self.modes, indptr, indices, data, hermitian: false })
    }

    /// Replace by (Op + Op^dagger)/2, which is Hermitian to the last bit.
    pub fn hermitize(&self) -> DiscreteOperator {
        let adj = self.adjoint();
        let mut t = TripletBuilder::new(self.dim());
        for i in 0..self.dim() {
            for (j, _) in self.row(i).chain(adj.row(i)) {
                if !t.rows[i].contains_key(&j) {
                    let v = 0.5 * self.get(i, j) + 0.5 * self.get(j, i).conj();
                    t.rows[i].insert(j, v);
                }
            }
        }
        t.build(self.grid, self.modes, true)
    }

    /// max |Op - Op^dagger| entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i).conj()).norm());
            }
        }
        m
    }

    /// i (self * other - other * self)
    pub fn commutator_i(&self, other: &DiscreteOperator) -> Result<DiscreteOperator> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        let c = ab.lincomb(C::new(0.0, 1.0), &ba, C::new(0.0, -1.0))?;
        if self.hermitian && other.hermitian {
            Ok(c.hermitize())
        } else {
            Ok(c)
        }
    }

    /// (lower, upper) bandwidth in the flattened index.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut lo = 0;
        let mut hi = 0;
        for i in 0..self.dim() {
            for (j, _) in self.row(i) {
                if j < i {
                    lo = lo.max(i - j);
                } else {
                    hi = hi.max(j - i);
                }
            }
        }
        (lo, hi)
    }

    /// True when no entry couples different modes.
    pub fn is_mode_diagonal(&self) -> bool {
        (0..self.dim()).all(|i| self.row(i).all(|(j, _)| i % self.modes == j % self.modes))
    }

    /// The radial block of mode column `j`, as an operator with one mode.
    pub fn mode_block(&self, j: usize) -> DiscreteOperator {
        let mut t = TripletBuilder::new(self.grid.n);
        for i in 0..self.grid.n {
            for (c, v) in self.row(i * self.modes + j) {
                if c % self.modes == j {
                    t.add(i, c / self.modes, v);
                }
            }
        }
        t.build(self.grid, 1, self.hermitian)
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Dense real matrix, when every entry is real.
    pub fn to_dense_real(&self) -> Option<DMatrix<f64>> {
        if self.data.iter().any(|v| v.im != 0.0) {
            return None;
        }
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                m[(i, j)] = v.re;
            }
        }
        Some(m)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.im == 0.0)
    }

    /// Gershgorin bound on the spectral radius.
    pub fn gershgorin_radius(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Zero all rows and columns attached to pinned grid points.
    pub fn pin_dirichlet(&self) -> DiscreteOperator {
        let pinned = |idx: usize| self.grid.pinned(idx / self.modes);
        let mut t = TripletBuilder::new(self.dim());
        for i in 0..self.dim() {
            if pinned(i) {
                continue;
            }
            for (j, v) in self.row(i) {
                if !pinned(j) {
                    t.add(i, j, v);
                }
            }
        }
        t.build(self.grid, self.modes, self.hermitian)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_op(n: usize, modes: usize, seed: u64) -> DiscreteOperator {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = Grid1D::full_line(n, 0.1);
        let dim = n * modes;
        let mut t = TripletBuilder::new(dim);
        for _ in 0..4 * dim {
            let i = rng.random_range(0..dim);
            let j = rng.random_range(0..dim);
            t.add(i, j, C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        }
        t.build(g, modes, false)
    }

    #[test]
    fn product_matches_dense() {
        let a = random_op(8, 2, 1);
        let b = random_op(8, 2, 2);
        let p = a.mul(&b).unwrap().to_dense();
        let d = a.to_dense() * b.to_dense();
        assert!((p - d).norm() < 1e-12);
    }

    #[test]
    fn hermitize_is_exact() {
        let a = random_op(16, 3, 3).hermitize();
        assert_eq!(a.hermiticity_defect(), 0.0);
        let d = a.to_dense();
        assert_eq!(d.adjoint(), d);
    }

    #[test]
    fn self_commutator_vanishes() {
        let a = random_op(10, 1, 4).hermitize();
        let c = a.commutator_i(&a).unwrap();
        assert!(c.max_abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let a = random_op(8, 1, 5);
        let b = random_op(8, 2, 6);
        assert_eq!(a.add(&b).unwrap_err().code(), "grid_ops.DimensionMismatch");
    }

    #[test]
    fn matvec_matches_dense() {
        let a = random_op(12, 2, 7);
        let g = a.grid;
        let vals: Vec<C> = (0..24).map(|i| C::new(i as f64, 1.0 / (1.0 + i as f64))).collect();
        let u = WaveField::from_values(g, 2, vals.clone()).unwrap();
        let y = a.apply(&u).unwrap();
        let x = nalgebra::DVector::from_vec(vals);
        let yd = a.to_dense() * x;
        for i in 0..24 {
            assert!((y.values[i] - yd[i]).norm() < 1e-12);
        }
    }
}
