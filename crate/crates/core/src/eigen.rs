//! Dense Hermitian eigendecomposition of assembled operators, block by block
//! when the operator does not couple modes. Pinned Dirichlet rows are dropped.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sparse::DiscreteOperator;

type C = Complex64;

/// Largest block handled by the dense solver.
pub const MAX_DENSE_DIM: usize = 6000;

#[derive(Clone, Debug)]
pub struct EigenBlock {
    /// Mode column of the block, or None for a coupled decomposition.
    pub mode: Option<usize>,
    /// Global row indices spanned by the block, in order.
    pub indices: Vec<usize>,
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in block-local coordinates.
    pub vectors: DMatrix<C>,
}

impl EigenBlock {
    /// Eigenvector `c` embedded into the full index space.
    pub fn global_vector(&self, c: usize, dim: usize) -> Vec<C> {
        let mut v = vec![C::default(); dim];
        for (k, &g) in self.indices.iter().enumerate() {
            v[g] = self.vectors[(k, c)];
        }
        v
    }
}

/// Index sets of the independent blocks of `op` (pinned rows removed).
pub fn block_indices(op: &DiscreteOperator) -> Vec<(Option<usize>, Vec<usize>)> {
    let grid = op.grid;
    let modes = op.modes;
    let free = |i: usize| !grid.pinned(i);
    if op.is_mode_diagonal() {
        (0..modes)
            .map(|j| (Some(j), (0..grid.n).filter(|&i| free(i)).map(|i| i * modes + j).collect()))
            .collect()
    } else {
        let idx = (0..grid.n).filter(|&i| free(i)).flat_map(|i| (0..modes).map(move |j| i * modes + j)).collect();
        vec![(None, idx)]
    }
}

/// Dense submatrix of `op` on the given global indices.
pub fn submatrix(op: &DiscreteOperator, idx: &[usize]) -> DMatrix<C> {
    let mut local = vec![usize::MAX; op.dim()];
    for (k, &g) in idx.iter().enumerate() {
        local[g] = k;
    }
    let mut m = DMatrix::zeros(idx.len(), idx.len());
    for (k, &g) in idx.iter().enumerate() {
        for (c, v) in op.row(g) {
            let l = local[c];
            if l != usize::MAX {
                m[(k, l)] = v;
            }
        }
    }
    m
}

fn decompose(m: DMatrix<C>) -> (Vec<f64>, DMatrix<C>) {
    let n = m.nrows();
    let real = m.iter().all(|v| v.im == 0.0);
    let (vals, vecs) = if real {
        let e = m.map(|v| v.re).symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors.map(|v| C::new(v, 0.0)))
    } else {
        let e = m.symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let values = order.iter().map(|&k| vals[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| vecs[(i, order[c])]);
    (values, vectors)
}

/// Full eigendecomposition of a Hermitian operator.
pub fn hermitian_eigen(op: &DiscreteOperator) -> Result<Vec<EigenBlock>> {
    let blocks = block_indices(op);
    if let Some((_, idx)) = blocks.iter().find(|(_, idx)| idx.len() > MAX_DENSE_DIM) {
        return Err(Error::TooLarge(idx.len()));
    }
    Ok(blocks
        .into_par_iter()
        .map(|(mode, indices)| {
            let (values, vectors) = decompose(submatrix(op, &indices));
            EigenBlock { mode, indices, values, vectors }
        })
        .collect())
}

/// Eigenvalues of a dense Hermitian matrix, ascending.
pub fn dense_eigenvalues(m: DMatrix<C>) -> Vec<f64> {
    let real = m.iter().all(|v| v.im == 0.0);
    let mut v: Vec<f64> = if real {
        m.map(|v| v.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.symmetric_eigenvalues().iter().copied().collect()
    };
    v.sort_by(f64::total_cmp);
    v
}

/// Sparse operator times dense block of columns in global coordinates.
pub fn apply_to_columns(op: &DiscreteOperator, idx: &[usize], v: &DMatrix<C>) -> DMatrix<C> {
    let mut local = vec![usize::MAX; op.dim()];
    for (k, &g) in idx.iter().enumerate() {
        local[g] = k;
    }
    let mut out = DMatrix::zeros(idx.len(), v.ncols());
    for (k, &g) in idx.iter().enumerate() {
        for (c, a) in op.row(g) {
            let l = local[c];
            if l == usize::MAX {
                continue;
            }
            for col in 0..v.ncols() {
                out[(k, col)] += a * v[(l, col)];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::assemble_l0;
    use crate::grid::Grid1D;
    use crate::model::{CrossSection, ScalingFunction};

    #[test]
    fn blocks_match_coupled() {
        let g = Grid1D::half_line(10.0, 41);
        let l = assemble_l0(&g, &ScalingFunction::power(1.0), &CrossSection::new(1)).unwrap();
        let blocks = hermitian_eigen(&l).unwrap();
        assert_eq!(blocks.len(), 3);
        let mut all: Vec<f64> = blocks.iter().flat_map(|b| b.values.clone()).collect();
        all.sort_by(f64::total_cmp);
        let idx: Vec<usize> = (0..l.dim()).filter(|&i| !g.pinned(i / 3)).collect();
        let dense = dense_eigenvalues(submatrix(&l, &idx));
        for (a, b) in all.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvectors_satisfy_equation() {
        let g = Grid1D::half_line(10.0, 41);
        let l = assemble_l0(&g, &ScalingFunction::power(1.0), &CrossSection::new(1)).unwrap();
        for b in hermitian_eigen(&l).unwrap() {
            let lv = apply_to_columns(&l, &b.indices, &b.vectors);
            for c in 0..b.values.len() {
                let r = lv.column(c) - b.vectors.column(c) * C::new(b.values[c], 0.0);
                assert!(r.norm() < 1e-9);
            }
        }
    }
}
