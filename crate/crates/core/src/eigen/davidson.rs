use nalgebra::{DMatrix, DVector};

use super::{dense_eigh, dense_solve, fix_signs, EigResult, LinearOperator};
use crate::error::{Error, Result};

/// Settings for [`davidson`].
#[derive(Debug, Clone)]
pub struct DavidsonOptions {
    pub n_roots: usize,
    /// Residual 2-norm below which a root counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Subspace size that triggers a restart; `None` means `8 * n_roots`.
    pub max_subspace: Option<usize>,
    /// Operators up to this dimension are diagonalized densely.
    pub dense_threshold: usize,
    /// Optional starting vectors (columns).
    pub guess: Option<DMatrix<f64>>,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        DavidsonOptions {
            n_roots: 1,
            tol: 1e-8,
            max_iter: 200,
            max_subspace: None,
            dense_threshold: 500,
            guess: None,
        }
    }
}

impl DavidsonOptions {
    pub fn roots(n_roots: usize) -> Self {
        DavidsonOptions {
            n_roots,
            ..Default::default()
        }
    }
}

/// Size of the low-diagonal block diagonalized for starting vectors.
const PSPACE_SIZE: usize = 400;

fn apply_vec<A: LinearOperator + ?Sized>(op: &A, x: &DVector<f64>) -> DVector<f64> {
    let mut y = DVector::zeros(x.len());
    op.apply(x.as_slice(), y.as_mut_slice());
    y
}

/// Gram-Schmidt (two passes) of `t` against `basis`; returns the norm left.
fn orthogonalize(t: &mut DVector<f64>, basis: &[DVector<f64>]) -> f64 {
    for _ in 0..2 {
        for v in basis {
            let c = v.dot(t);
            t.axpy(-c, v, 1.0);
        }
    }
    t.norm()
}

/// Lowest `opts.n_roots` eigenpairs of a symmetric operator by block
/// Davidson with diagonal preconditioning.
///
/// Converged roots stop contributing correction vectors; the subspace is
/// collapsed onto the current Ritz vectors once it would exceed
/// `max_subspace`. Non-convergence is reported through
/// [`EigResult::converged`], not as an error.
pub fn davidson<A: LinearOperator + ?Sized>(op: &A, opts: &DavidsonOptions) -> Result<EigResult> {
    let n = op.dim();
    let k = opts.n_roots;
    if k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} roots of a {n}-dimensional operator"
        )));
    }
    if opts.tol <= 0.0 {
        return Err(Error::InvalidInput("Davidson tolerance must be positive".into()));
    }
    if k == 0 {
        return Ok(EigResult {
            eigenvalues: vec![],
            eigenvectors: DMatrix::zeros(n, 0),
            residual_norms: vec![],
            converged: vec![],
            iterations: 0,
        });
    }
    if n <= opts.dense_threshold {
        return dense_solve(op, k);
    }

    let diag = op.diagonal();
    let max_sub = opts.max_subspace.unwrap_or(8 * k).max(3 * k).min(n);
    let keep = (2 * k).min(max_sub - k).max(k);

    let mut v: Vec<DVector<f64>> = Vec::with_capacity(max_sub);
    let mut guesses: Vec<DVector<f64>> = Vec::new();
    if let Some(g) = &opts.guess {
        if g.nrows() != n {
            return Err(Error::InvalidInput("guess vectors have the wrong length".into()));
        }
        guesses.extend(g.column_iter().map(|c| c.into_owned()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    // Unit vectors stay inside the symmetry blocks of their determinants, so
    // roots in other blocks would never be reached. Eigenvectors of the
    // low-diagonal block cover every block that has low-lying determinants.
    let pspace = &order[..PSPACE_SIZE.min(n)];
    if guesses.len() < k && pspace.len() >= k {
        if let Some(block) = op.submatrix(pspace) {
            let (_, pv) = dense_eigh(&block);
            for j in 0..k - guesses.len() {
                let mut g = DVector::zeros(n);
                for (a, &i) in pspace.iter().enumerate() {
                    g[i] = pv[(a, j)];
                }
                guesses.push(g);
            }
        }
    }
    for &i in order.iter() {
        if guesses.len() >= k {
            break;
        }
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        guesses.push(e);
    }
    for mut g in guesses {
        let norm = orthogonalize(&mut g, &v);
        if norm > 1e-10 {
            v.push(g / norm);
        }
    }
    let mut av: Vec<DVector<f64>> = v.iter().map(|x| apply_vec(op, x)).collect();

    let mut theta = vec![0.0; k];
    let mut ritz: Vec<DVector<f64>> = Vec::new();
    let mut res_norms = vec![f64::INFINITY; k];
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let m = v.len();
        let t = DMatrix::from_fn(m, m, |i, j| v[i].dot(&av[j]));
        let (vals, y) = dense_eigh(&t);
        let nk = k.min(m);
        ritz.clear();
        let mut aritz = Vec::with_capacity(nk);
        for j in 0..nk {
            let mut x = DVector::zeros(n);
            let mut ax = DVector::zeros(n);
            for i in 0..m {
                x.axpy(y[(i, j)], &v[i], 1.0);
                ax.axpy(y[(i, j)], &av[i], 1.0);
            }
            theta[j] = vals[j];
            ritz.push(x);
            aritz.push(ax);
        }
        let mut corrections = Vec::new();
        for j in 0..nk {
            let r = &aritz[j] - &ritz[j] * theta[j];
            res_norms[j] = r.norm();
            if res_norms[j] > opts.tol {
                let mut t = r.clone();
                for i in 0..n {
                    let mut d = theta[j] - diag[i];
                    if d.abs() < 1e-12 {
                        d = 1e-12f64.copysign(d);
                    }
                    t[i] /= d;
                }
                corrections.push((t, r));
            }
        }
        if nk == k && corrections.is_empty() {
            break;
        }
        if m + corrections.len() > max_sub {
            let keep_now = keep.min(m);
            let mut nv = Vec::with_capacity(max_sub);
            let mut nav = Vec::with_capacity(max_sub);
            for j in 0..keep_now {
                let mut x = DVector::zeros(n);
                let mut ax = DVector::zeros(n);
                for i in 0..m {
                    x.axpy(y[(i, j)], &v[i], 1.0);
                    ax.axpy(y[(i, j)], &av[i], 1.0);
                }
                nv.push(x);
                nav.push(ax);
            }
            v = nv;
            av = nav;
        }
        let mut added = 0;
        for (mut t, r) in corrections {
            let mut norm = orthogonalize(&mut t, &v);
            if norm < 1e-10 {
                // preconditioner collapsed onto the subspace; fall back to the residual
                t = r;
                norm = orthogonalize(&mut t, &v);
            }
            if norm > 1e-12 && v.len() < max_sub {
                let t = t / norm;
                av.push(apply_vec(op, &t));
                v.push(t);
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
    }

    // Final Rayleigh-Ritz so vectors and values are consistent with the last subspace.
    let m = v.len();
    let t = DMatrix::from_fn(m, m, |i, j| v[i].dot(&av[j]));
    let (vals, y) = dense_eigh(&t);
    let mut vecs = DMatrix::zeros(n, k);
    let mut residual_norms = Vec::with_capacity(k);
    for j in 0..k {
        let mut x = DVector::zeros(n);
        let mut ax = DVector::zeros(n);
        for i in 0..m {
            x.axpy(y[(i, j)], &v[i], 1.0);
            ax.axpy(y[(i, j)], &av[i], 1.0);
        }
        residual_norms.push((&ax - &x * vals[j]).norm());
        vecs.set_column(j, &x);
    }
    fix_signs(&mut vecs);
    let converged = residual_norms.iter().map(|&r| r <= opts.tol).collect();
    Ok(EigResult {
        eigenvalues: vals[..k].to_vec(),
        eigenvectors: vecs,
        residual_norms,
        converged,
        iterations,
    })
}
