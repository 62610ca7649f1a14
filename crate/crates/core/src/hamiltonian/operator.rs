use nalgebra::DMatrix;
use rayon::prelude::*;

use super::slater::{diagonal_element, for_each_connected, matrix_element};
use super::Hamiltonian;
use crate::config::SubspaceBasis;
use crate::eigen::LinearOperator;
use crate::error::{Error, Result};

/// Bases smaller than this are materialized as an explicit sparse matrix.
pub const DEFAULT_EXPLICIT_THRESHOLD: usize = 20_000;

const DEFAULT_ROW_CHUNK: usize = 64;

#[derive(Debug, Clone)]
struct Csr {
    indptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// `P_B H P_B` restricted to a configuration basis.
///
/// Rows are generated from the Slater-Condon connections of each basis
/// member filtered by membership, either on the fly for every matvec or once
/// into a CSR matrix. Each output row is accumulated in a fixed order, so the
/// result does not depend on the number of worker threads.
pub struct SubspaceOperator<'a> {
    ham: &'a Hamiltonian,
    basis: &'a SubspaceBasis,
    diag: Vec<f64>,
    explicit: Option<Csr>,
    chunk: usize,
}

/// Builds the projected Hamiltonian on `basis`, materializing it when
/// `|basis| < explicit_threshold`.
pub fn build_subspace_operator<'a>(
    ham: &'a Hamiltonian,
    basis: &'a SubspaceBasis,
    explicit_threshold: usize,
) -> Result<SubspaceOperator<'a>> {
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    if basis.common_weights().is_none() {
        return Err(Error::SectorMismatch("basis spans several sectors".into()));
    }
    if basis[0].alpha.capacity() < ham.n_orb() {
        return Err(Error::InvalidInput("basis masks are narrower than the orbital count".into()));
    }
    let diag = basis
        .configs()
        .par_iter()
        .map(|c| diagonal_element(ham, c))
        .collect();
    let mut op = SubspaceOperator {
        ham,
        basis,
        diag,
        explicit: None,
        chunk: DEFAULT_ROW_CHUNK,
    };
    if basis.len() < explicit_threshold {
        op.materialize();
    }
    Ok(op)
}

impl<'a> SubspaceOperator<'a> {
    /// Rows per parallel work item.
    pub fn with_chunk(mut self, chunk: usize) -> Self {
        self.chunk = chunk.max(1);
        self
    }

    pub fn basis(&self) -> &SubspaceBasis {
        self.basis
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit.is_some()
    }

    /// Nonzero `(column, value)` pairs of row `k`, in generation order.
    pub fn row(&self, k: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for_each_connected(self.ham, &self.basis[k], |z, v| {
            if let Some(j) = self.basis.index_of(&z) {
                out.push((j, v));
            }
        });
        out
    }

    /// Builds the CSR form if it is not present yet.
    pub fn materialize(&mut self) {
        if self.explicit.is_some() {
            return;
        }
        let rows: Vec<Vec<(usize, f64)>> = (0..self.basis.len())
            .into_par_iter()
            .with_min_len(self.chunk)
            .map(|k| {
                let mut r = self.row(k);
                r.sort_by_key(|&(j, _)| j);
                r
            })
            .collect();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut csr = Csr {
            indptr: Vec::with_capacity(rows.len() + 1),
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        };
        csr.indptr.push(0);
        for r in rows {
            for (j, v) in r {
                csr.cols.push(j);
                csr.vals.push(v);
            }
            csr.indptr.push(csr.cols.len());
        }
        self.explicit = Some(csr);
    }

    /// Matrix-free product, ignoring any materialized form.
    pub fn apply_matrix_free(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(self.chunk)
            .enumerate()
            .for_each(|(c, out)| {
                let start = c * self.chunk;
                for (off, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for_each_connected(self.ham, &self.basis[start + off], |z, v| {
                        if let Some(j) = self.basis.index_of(&z) {
                            acc += v * x[j];
                        }
                    });
                    *o = acc;
                }
            });
    }

    pub fn nnz(&self) -> Option<usize> {
        self.explicit.as_ref().map(|c| c.vals.len())
    }
}

impl LinearOperator for SubspaceOperator<'_> {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn submatrix(&self, idx: &[usize]) -> Option<DMatrix<f64>> {
        let n = idx.len();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            m[(a, a)] = self.diag[idx[a]];
            for b in 0..a {
                let v = matrix_element(self.ham, &self.basis[idx[a]], &self.basis[idx[b]])
                    .expect("basis members share a sector");
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        Some(m)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match &self.explicit {
            Some(csr) => {
                y.par_chunks_mut(self.chunk)
                    .enumerate()
                    .for_each(|(c, out)| {
                        let start = c * self.chunk;
                        for (off, o) in out.iter_mut().enumerate() {
                            let k = start + off;
                            let mut acc = 0.0;
                            for p in csr.indptr[k]..csr.indptr[k + 1] {
                                acc += csr.vals[p] * x[csr.cols[p]];
                            }
                            *o = acc;
                        }
                    });
            }
            None => self.apply_matrix_free(x, y),
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        let mut m = DMatrix::zeros(n, n);
        match &self.explicit {
            Some(csr) => {
                for k in 0..n {
                    for p in csr.indptr[k]..csr.indptr[k + 1] {
                        m[(k, csr.cols[p])] = csr.vals[p];
                    }
                }
            }
            None => {
                for k in 0..n {
                    for (j, v) in self.row(k) {
                        m[(k, j)] = v;
                    }
                }
            }
        }
        m
    }
}
