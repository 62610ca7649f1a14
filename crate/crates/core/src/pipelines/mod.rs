//! End-to-end methods: SQD with self-consistent recovery, extended SQD
//! (cut, extend, re-diagonalize) and quantum subspace expansion, plus
//! excitation-generator enumeration.

mod extend;
mod generators;
mod qse;
mod sqd;

pub use extend::{cut_state, extend_subspace, run_ext_sqd, ExtSqdOptions, ExtSqdReport, Extension, ExtensionTallies, DEFAULT_CHUNK, DEFAULT_CUT_THRESHOLD};
pub use generators::{make_generators, GeneratorCounts, GeneratorSet};
pub use qse::{run_qse, QseResult, DEFAULT_TAU};
pub use sqd::{run_sqd, IterationTrace, SqdDiagnostics, SqdOptions};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{Sector, SubspaceBasis};
use crate::eigen::{davidson, DavidsonOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_subspace_operator, Hamiltonian, SparseState};

/// Which method produced a [`CIState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Fci,
    Sqd,
    ExtSqd,
    Qse,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Fci => "fci",
            Method::Sqd => "sqd",
            Method::ExtSqd => "ext-sqd",
            Method::Qse => "qse",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Method> {
        [Method::Fci, Method::Sqd, Method::ExtSqd, Method::Qse]
            .into_iter()
            .find(|m| m.tag() == tag)
    }
}

/// Multi-root CI expansion on a configuration basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CIState {
    pub sector: Sector,
    pub basis: SubspaceBasis,
    /// `|basis| x n_roots`, unit-norm columns.
    pub coefficients: DMatrix<f64>,
    /// Ascending, Hartree.
    pub energies: Vec<f64>,
    pub method: Method,
}

impl CIState {
    pub fn new(
        sector: Sector,
        basis: SubspaceBasis,
        coefficients: DMatrix<f64>,
        energies: Vec<f64>,
        method: Method,
    ) -> Result<Self> {
        if coefficients.nrows() != basis.len() || coefficients.ncols() != energies.len() {
            return Err(Error::InvalidInput("coefficient matrix shape does not match".into()));
        }
        if basis.iter().any(|c| !c.in_sector(&sector)) {
            return Err(Error::SectorMismatch(format!("basis leaves sector {sector}")));
        }
        if energies.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("energies are not ascending".into()));
        }
        for (k, col) in coefficients.column_iter().enumerate() {
            let n2 = col.norm_squared();
            if (n2 - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!("root {k} has squared norm {n2}")));
            }
        }
        Ok(CIState {
            sector,
            basis,
            coefficients,
            energies,
            method,
        })
    }

    pub fn n_roots(&self) -> usize {
        self.energies.len()
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Root `mu` as a sparse state.
    pub fn root(&self, mu: usize) -> SparseState {
        SparseState::from_basis(self.sector, &self.basis, self.coefficients.column(mu).as_slice())
            .expect("basis is in sector")
    }

    pub fn ground(&self) -> SparseState {
        self.root(0)
    }
}

/// Settings shared by every subspace diagonalization.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub davidson: DavidsonOptions,
    /// Bases below this size are stored as explicit sparse matrices.
    pub explicit_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            davidson: DavidsonOptions::default(),
            explicit_threshold: crate::hamiltonian::DEFAULT_EXPLICIT_THRESHOLD,
        }
    }
}

/// Lowest `min(n_roots, |basis|)` eigenpairs of `H` projected on `basis`.
/// The flag is false when some root did not converge.
pub fn diagonalize(
    h: &Hamiltonian,
    basis: SubspaceBasis,
    sector: Sector,
    n_roots: usize,
    method: Method,
    opts: &SolverOptions,
) -> Result<(CIState, bool)> {
    if n_roots == 0 {
        return Err(Error::InvalidInput("at least one root is required".into()));
    }
    let op = build_subspace_operator(h, &basis, opts.explicit_threshold)?;
    let mut dopts = opts.davidson.clone();
    dopts.n_roots = n_roots.min(basis.len());
    let res = davidson(&op, &dopts)?;
    let converged = res.all_converged();
    let mut coeffs = res.eigenvectors;
    for mut col in coeffs.column_iter_mut() {
        let n = col.norm();
        col /= n;
    }
    drop(op);
    let state = CIState::new(sector, basis, coeffs, res.eigenvalues, method)?;
    Ok((state, converged))
}

/// Exact diagonalization over the whole sector.
pub fn run_fci(
    h: &Hamiltonian,
    sector: Sector,
    n_roots: usize,
    cap: u128,
    opts: &SolverOptions,
) -> Result<(CIState, bool)> {
    let basis = crate::config::enumerate_sector(&sector, cap)?;
    diagonalize(h, basis, sector, n_roots, Method::Fci, opts)
}
