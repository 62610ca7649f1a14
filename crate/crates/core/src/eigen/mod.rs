//! Symmetric eigensolvers: dense, block Davidson and the overlap-regularized
//! generalized problem used by QSE.

mod davidson;
mod generalized;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub use davidson::{davidson, DavidsonOptions};
pub use generalized::generalized_eig;

use crate::error::{Error, Result};

/// Symmetric linear operator exposed through its action on vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn diagonal(&self) -> Vec<f64>;

    /// Dense block on the rows and columns `idx`, if the operator can produce
    /// it without full matvecs.
    fn submatrix(&self, _idx: &[usize]) -> Option<DMatrix<f64>> {
        None
    }

    /// Explicit dense form. The default applies the operator to unit vectors.
    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        m
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let xv = DVector::from_column_slice(x);
        let r = self * xv;
        y.copy_from_slice(r.as_slice());
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self[(i, i)]).collect()
    }

    fn submatrix(&self, idx: &[usize]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_fn(idx.len(), idx.len(), |a, b| self[(idx[a], idx[b])]))
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

/// Lowest eigenpairs of a symmetric operator.
#[derive(Debug, Clone)]
pub struct EigResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// One column per eigenvalue.
    pub eigenvectors: DMatrix<f64>,
    pub residual_norms: Vec<f64>,
    pub converged: Vec<bool>,
    pub iterations: usize,
}

impl EigResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn n_roots(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Flips each column so that its largest-magnitude entry (first on ties) is
/// positive.
pub(crate) fn fix_signs(vecs: &mut DMatrix<f64>) {
    for mut col in vecs.column_iter_mut() {
        let mut best = 0usize;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() + 1e-12 {
                best = i;
            }
        }
        if col.len() > 0 && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Full eigendecomposition of a symmetric matrix, ascending.
pub fn dense_eigh(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    fix_signs(&mut vecs);
    (vals, vecs)
}

/// Lowest `n_roots` eigenpairs by dense diagonalization of the operator.
pub fn dense_solve<A: LinearOperator + ?Sized>(op: &A, n_roots: usize) -> Result<EigResult> {
    let n = op.dim();
    if n_roots > n {
        return Err(Error::InvalidInput(format!(
            "requested {n_roots} roots of a {n}-dimensional operator"
        )));
    }
    let dense = op.to_dense();
    let (vals, vecs) = dense_eigh(&dense);
    let vecs = vecs.columns(0, n_roots).into_owned();
    let residual_norms = (0..n_roots)
        .map(|k| (&dense * vecs.column(k) - vecs.column(k) * vals[k]).norm())
        .collect();
    Ok(EigResult {
        eigenvalues: vals[..n_roots].to_vec(),
        eigenvectors: vecs,
        residual_norms,
        converged: vec![true; n_roots],
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_swap_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let r = dense_solve(&m, 2).unwrap();
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(dense_solve(&m, 3).is_err());
    }

    #[test]
    fn default_to_dense_matches_matrix() {
        struct Wrap(DMatrix<f64>);
        impl LinearOperator for Wrap {
            fn dim(&self) -> usize {
                self.0.nrows()
            }
            fn apply(&self, x: &[f64], y: &mut [f64]) {
                self.0.apply(x, y)
            }
            fn diagonal(&self) -> Vec<f64> {
                self.0.diagonal().as_slice().to_vec()
            }
        }
        let m = DMatrix::from_fn(5, 5, |i, j| (i + j) as f64 + 0.5 * (i * j) as f64);
        assert_eq!(Wrap(m.clone()).to_dense(), m);
    }
}
