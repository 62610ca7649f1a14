use nalgebra::DMatrix;

use super::{dense_eigh, fix_signs, EigResult};
use crate::error::{Error, Result};

/// Solves `M c = e S c` for symmetric `M` and positive-semidefinite `S` by
/// canonical orthogonalization.
///
/// Both matrices are first scaled by `diag(S)^(-1/2)` so the discard
/// threshold does not depend on the normalization of the basis functions.
/// Rows with a zero overlap diagonal are dropped outright. Overlap modes with
/// eigenvalue below `tau * max` are discarded; the returned eigenvectors are
/// expressed in the original basis and are `S`-orthonormal. The second value
/// is the number of kept modes.
pub fn generalized_eig(m: &DMatrix<f64>, s: &DMatrix<f64>, tau: f64) -> Result<(EigResult, usize)> {
    let n = m.nrows();
    if m.ncols() != n || s.nrows() != n || s.ncols() != n {
        return Err(Error::InvalidInput("M and S must be square and of equal size".into()));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidInput(format!("tau = {tau} must lie in (0, 1)")));
    }
    let max_diag = (0..n).map(|i| s[(i, i)]).fold(0.0f64, f64::max);
    if let Some(i) = (0..n).find(|&i| s[(i, i)] < -tau * max_diag) {
        return Err(Error::InvalidOverlap {
            value: s[(i, i)],
            bound: -tau * max_diag,
        });
    }
    let live: Vec<usize> = (0..n).filter(|&i| s[(i, i)] > 0.0).collect();
    let nl = live.len();
    let scale: Vec<f64> = live.iter().map(|&i| 1.0 / s[(i, i)].sqrt()).collect();
    let sn = DMatrix::from_fn(nl, nl, |a, b| s[(live[a], live[b])] * scale[a] * scale[b]);
    let mn = DMatrix::from_fn(nl, nl, |a, b| m[(live[a], live[b])] * scale[a] * scale[b]);

    let (svals, svecs) = dense_eigh(&sn);
    let smax = svals.iter().cloned().fold(0.0f64, f64::max);
    if let Some(&low) = svals.first() {
        if low < -tau * smax {
            return Err(Error::InvalidOverlap {
                value: low,
                bound: -tau * smax,
            });
        }
    }
    let kept: Vec<usize> = (0..nl).filter(|&j| svals[j] >= tau * smax).collect();
    let r = kept.len();
    // X = U_kept * Lambda_kept^(-1/2)
    let x = DMatrix::from_fn(nl, r, |a, j| svecs[(a, kept[j])] / svals[kept[j]].sqrt());
    let reduced = x.transpose() * &mn * &x;
    let (vals, z) = dense_eigh(&reduced);
    let cn = &x * &z;
    let mut vecs = DMatrix::zeros(n, r);
    for (a, &i) in live.iter().enumerate() {
        for j in 0..r {
            vecs[(i, j)] = cn[(a, j)] * scale[a];
        }
    }
    fix_signs(&mut vecs);
    let residual_norms = (0..r)
        .map(|j| (m * vecs.column(j) - s * vecs.column(j) * vals[j]).norm())
        .collect();
    Ok((
        EigResult {
            eigenvalues: vals,
            eigenvectors: vecs,
            residual_norms,
            converged: vec![true; r],
            iterations: 0,
        },
        r,
    ))
}
