use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{CIState, GeneratorSet, Method};
use crate::config::{apply_excitation, Configuration, SubspaceBasis};
use crate::eigen::{generalized_eig, LinearOperator};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_subspace_operator, Hamiltonian, SparseState, DEFAULT_EXPLICIT_THRESHOLD};

/// Default relative overlap cutoff for canonical orthogonalization.
pub const DEFAULT_TAU: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct QseResult {
    /// QSE roots expanded on the union of the supports of `E_I |phi0>`.
    pub state: CIState,
    /// Generator-basis coefficients, one column per root.
    pub generator_coefficients: DMatrix<f64>,
    pub n_generators: usize,
    pub kept_dimension: usize,
    pub hamiltonian: DMatrix<f64>,
    pub overlap: DMatrix<f64>,
}

/// Subspace expansion around `phi0` with `M_IJ = <phi0|E_I† H E_J|phi0>`
/// and `S_IJ = <phi0|E_I† E_J|phi0>`, solved by the regularized
/// generalized eigensolver.
///
/// The vectors `E_J|phi0>` are built exactly and stored as the columns of
/// a dense block `V` over the union `U` of their supports; since every
/// column lives in `U`, `M = V^T H_U V` and `S = V^T V` are exact.
pub fn run_qse(h: &Hamiltonian, phi0: &SparseState, generators: &GeneratorSet, tau: f64, n_roots: usize) -> Result<QseResult> {
    phi0.check_normalized(1e-8)?;
    if generators.is_empty() {
        return Err(Error::InvalidInput("no generators".into()));
    }
    if n_roots == 0 {
        return Err(Error::InvalidInput("at least one root is required".into()));
    }
    let sector = phi0.sector();
    let m = sector.n_orb;
    let columns: Vec<BTreeMap<Configuration, f64>> = generators
        .operators()
        .par_iter()
        .map(|e| {
            let mut out = BTreeMap::new();
            for (y, a) in phi0.iter() {
                if let (g, Some(z)) = apply_excitation(e, y, m)? {
                    *out.entry(z).or_insert(0.0) += f64::from(g) * a;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let support = SubspaceBasis::new(columns.iter().flat_map(|c| c.keys().cloned()));
    let n_gen = generators.len();
    let mut v = DMatrix::zeros(support.len(), n_gen);
    for (j, col) in columns.iter().enumerate() {
        for (z, a) in col {
            v[(support.index_of(z).expect("support covers every column"), j)] = *a;
        }
    }
    let op = build_subspace_operator(h, &support, DEFAULT_EXPLICIT_THRESHOLD)?;
    let mut hv = DMatrix::zeros(support.len(), n_gen);
    for j in 0..n_gen {
        let mut y = vec![0.0; support.len()];
        op.apply(v.column(j).as_slice(), &mut y);
        hv.set_column(j, &nalgebra::DVector::from_vec(y));
    }
    let mm = v.transpose() * &hv;
    let mm = (&mm + mm.transpose()) * 0.5;
    let s = v.transpose() * &v;
    let (res, kept) = generalized_eig(&mm, &s, tau)?;
    let n = n_roots.min(kept);
    let x = res.eigenvectors.columns(0, n).into_owned();
    let mut coeffs = &v * &x;
    for mut col in coeffs.column_iter_mut() {
        let nrm = col.norm();
        col /= nrm;
    }
    let state = CIState::new(sector, support, coeffs, res.eigenvalues[..n].to_vec(), Method::Qse)?;
    Ok(QseResult {
        state,
        generator_coefficients: x,
        n_generators: n_gen,
        kept_dimension: kept,
        hamiltonian: mm,
        overlap: s,
    })
}
