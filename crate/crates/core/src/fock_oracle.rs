//! Brute-force reference on the full `2^(2M)` Fock space (`M <= 4`).
//!
//! Ladder operators are dense matrices built straight from the Jordan-Wigner
//! definition on integer occupation indices: bit `g` of a basis index is
//! spin-orbital `g`, with `(p, alpha) -> p` and `(p, beta) -> M + p`. Nothing
//! here goes through the determinant machinery of [`crate::config`] or the
//! Slater-Condon rules, so agreement is an independent check.

use nalgebra::{DMatrix, DVector};

use crate::config::{Configuration, FermionTerm, Sector, Spin, SpinOrbital};
use crate::eigen::dense_eigh;
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, SparseState};

pub const MAX_ORBITALS: usize = 4;

/// Jordan-Wigner action of `a_g` (or `a†_g`) on basis index `n`.
fn ladder_on_index(g: usize, dagger: bool, n: usize) -> Option<(f64, usize)> {
    let bit = 1usize << g;
    let occupied = n & bit != 0;
    if occupied == dagger {
        return None;
    }
    let sign = if (n & (bit - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((sign, n ^ bit))
}

/// Dense Fock space with cached annihilation matrices.
pub struct DenseFock {
    n_orb: usize,
    annihilators: Vec<DMatrix<f64>>,
}

impl DenseFock {
    pub fn new(n_orb: usize) -> Result<Self> {
        if n_orb > MAX_ORBITALS {
            return Err(Error::InvalidInput(format!(
                "dense Fock oracle supports at most {MAX_ORBITALS} orbitals, got {n_orb}"
            )));
        }
        let dim = 1usize << (2 * n_orb);
        let annihilators = (0..2 * n_orb)
            .map(|g| {
                let mut m = DMatrix::zeros(dim, dim);
                for n in 0..dim {
                    if let Some((s, k)) = ladder_on_index(g, false, n) {
                        m[(k, n)] = s;
                    }
                }
                m
            })
            .collect();
        Ok(DenseFock { n_orb, annihilators })
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn dim(&self) -> usize {
        1 << (2 * self.n_orb)
    }

    fn global(&self, so: SpinOrbital) -> Result<usize> {
        if so.orbital >= self.n_orb {
            return Err(Error::MalformedOperator(format!(
                "orbital {} out of range",
                so.orbital
            )));
        }
        Ok(match so.spin {
            Spin::Alpha => so.orbital,
            Spin::Beta => self.n_orb + so.orbital,
        })
    }

    pub fn annihilator(&self, so: SpinOrbital) -> Result<&DMatrix<f64>> {
        Ok(&self.annihilators[self.global(so)?])
    }

    pub fn creator(&self, so: SpinOrbital) -> Result<DMatrix<f64>> {
        Ok(self.annihilator(so)?.transpose())
    }

    /// Basis index of a determinant.
    pub fn index_of(&self, c: &Configuration) -> usize {
        let mut n = 0;
        for p in 0..self.n_orb {
            if c.alpha.get(p) {
                n |= 1 << p;
            }
            if c.beta.get(p) {
                n |= 1 << (self.n_orb + p);
            }
        }
        n
    }

    pub fn config_of(&self, n: usize) -> Configuration {
        let m = self.n_orb;
        Configuration::from_occupations(
            m,
            (0..m).filter(|&p| n >> p & 1 == 1),
            (0..m).filter(|&p| n >> (m + p) & 1 == 1),
        )
    }

    pub fn basis_vector(&self, c: &Configuration) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[self.index_of(c)] = 1.0;
        v
    }

    /// `a†_{c1} .. a†_{ck} a_{a1} .. a_{ak} v` by dense matrix-vector products.
    pub fn apply_string(
        &self,
        creates: &[SpinOrbital],
        annihilates: &[SpinOrbital],
        v: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let mut w = v.clone();
        for &so in annihilates.iter().rev() {
            w = self.annihilator(so)? * w;
        }
        for &so in creates.iter().rev() {
            w = self.annihilator(so)?.tr_mul(&w);
        }
        Ok(w)
    }

    /// Dense matrix of `sum_t coeff_t * term_t`.
    pub fn operator_matrix(&self, terms: &[FermionTerm]) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for t in terms {
            let mut prod = DMatrix::identity(dim, dim);
            for &so in &t.creates {
                prod = prod * self.creator(so)?;
            }
            for &so in &t.annihilates {
                prod *= self.annihilator(so)?;
            }
            m += prod * t.coeff;
        }
        Ok(m)
    }

    /// `<v|O|v>` for `O = sum_t coeff_t * term_t`.
    pub fn dense_expectation(&self, terms: &[FermionTerm], v: &DVector<f64>) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "vector of length {} in a {}-dimensional Fock space",
                v.len(),
                self.dim()
            )));
        }
        let mut acc = 0.0;
        for t in terms {
            acc += t.coeff * v.dot(&self.apply_string(&t.creates, &t.annihilates, v)?);
        }
        Ok(acc)
    }

    /// `E0 + sum h_pr a†a + 1/2 sum (pr|qs) a†a†aa` on the whole Fock space.
    pub fn dense_hamiltonian(&self, h: &Hamiltonian) -> Result<DMatrix<f64>> {
        let m = self.n_orb;
        if h.n_orb() != m {
            return Err(Error::InvalidInput(format!(
                "Hamiltonian has {} orbitals, oracle {m}",
                h.n_orb()
            )));
        }
        let dim = self.dim();
        let mut out = DMatrix::identity(dim, dim) * h.e0();
        let chain = |ops: &[(usize, bool)], n: usize| -> Option<(f64, usize)> {
            let mut sign = 1.0;
            let mut k = n;
            for &(g, dagger) in ops.iter().rev() {
                let (s, nk) = ladder_on_index(g, dagger, k)?;
                sign *= s;
                k = nk;
            }
            Some((sign, k))
        };
        for n in 0..dim {
            for sp in 0..2 {
                for p in 0..m {
                    for r in 0..m {
                        let v = h.one_body(p, r);
                        if v == 0.0 {
                            continue;
                        }
                        let ops = [(sp * m + p, true), (sp * m + r, false)];
                        if let Some((s, k)) = chain(&ops, n) {
                            out[(k, n)] += v * s;
                        }
                    }
                }
            }
            for s1 in 0..2 {
                for s2 in 0..2 {
                    for p in 0..m {
                        for q in 0..m {
                            for r in 0..m {
                                for s in 0..m {
                                    let v = h.eri(p, r, q, s);
                                    if v == 0.0 {
                                        continue;
                                    }
                                    let ops = [
                                        (s1 * m + p, true),
                                        (s2 * m + q, true),
                                        (s2 * m + s, false),
                                        (s1 * m + r, false),
                                    ];
                                    if let Some((sg, k)) = chain(&ops, n) {
                                        out[(k, n)] += 0.5 * v * sg;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Fock-space indices of the sector, ascending.
    pub fn sector_indices(&self, s: &Sector) -> Vec<usize> {
        let m = self.n_orb;
        let amask = (1usize << m) - 1;
        (0..self.dim())
            .filter(|&n| {
                (n & amask).count_ones() as usize == s.n_alpha
                    && (n >> m).count_ones() as usize == s.n_beta
            })
            .collect()
    }

    pub fn sector_block(&self, full: &DMatrix<f64>, s: &Sector) -> DMatrix<f64> {
        let idx = self.sector_indices(s);
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| full[(idx[i], idx[j])])
    }

    /// All eigenvalues of `H` inside one sector, ascending.
    pub fn sector_eigenvalues(&self, h: &Hamiltonian, s: &Sector) -> Result<Vec<f64>> {
        let full = self.dense_hamiltonian(h)?;
        Ok(dense_eigh(&self.sector_block(&full, s)).0)
    }

    /// Sector eigenpairs with eigenvectors embedded in the full Fock space.
    pub fn sector_eigenpairs(&self, h: &Hamiltonian, s: &Sector) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
        let full = self.dense_hamiltonian(h)?;
        let idx = self.sector_indices(s);
        let (vals, vecs) = dense_eigh(&self.sector_block(&full, s));
        let states = (0..vals.len())
            .map(|k| {
                let mut v = DVector::zeros(self.dim());
                for (i, &n) in idx.iter().enumerate() {
                    v[n] = vecs[(i, k)];
                }
                v
            })
            .collect();
        Ok((vals, states))
    }

    pub fn number_operator(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_fn(self.dim(), |n, _| n.count_ones() as f64))
    }

    /// `S+` summed over `orbitals`.
    pub fn spin_plus(&self, orbitals: &[usize]) -> Result<DMatrix<f64>> {
        let terms: Vec<_> = orbitals
            .iter()
            .map(|&p| FermionTerm {
                coeff: 1.0,
                creates: vec![SpinOrbital::alpha(p)],
                annihilates: vec![SpinOrbital::beta(p)],
            })
            .collect();
        self.operator_matrix(&terms)
    }

    pub fn spin_z(&self, orbitals: &[usize]) -> Result<DMatrix<f64>> {
        let terms: Vec<_> = orbitals
            .iter()
            .flat_map(|&p| {
                [
                    FermionTerm::number(0.5, SpinOrbital::alpha(p)),
                    FermionTerm::number(-0.5, SpinOrbital::beta(p)),
                ]
            })
            .collect();
        self.operator_matrix(&terms)
    }

    /// Cartesian spin components `(Sx, Sy/i, Sz)` over `orbitals`; `Sy` is
    /// returned divided by `i` so that it stays real (antisymmetric).
    pub fn spin_components(&self, orbitals: &[usize]) -> Result<[DMatrix<f64>; 3]> {
        let sp = self.spin_plus(orbitals)?;
        let sm = sp.transpose();
        Ok([
            (&sp + &sm) * 0.5,
            (&sp - &sm) * -0.5,
            self.spin_z(orbitals)?,
        ])
    }

    /// Total `S^2` over all orbitals.
    pub fn s_squared(&self) -> Result<DMatrix<f64>> {
        let all: Vec<usize> = (0..self.n_orb).collect();
        let sp = self.spin_plus(&all)?;
        let sz = self.spin_z(&all)?;
        let id = DMatrix::identity(self.dim(), self.dim());
        Ok(sp.transpose() * &sp + &sz * (&sz + id))
    }

    pub fn to_dense_vector(&self, v: &SparseState) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (c, a) in v.iter() {
            out[self.index_of(c)] = a;
        }
        out
    }

    /// Sparse state over `s` from a Fock-space vector (components outside the
    /// sector must vanish).
    pub fn to_sparse(&self, v: &DVector<f64>, s: Sector) -> Result<SparseState> {
        let inside = self.sector_indices(&s);
        let outside: f64 = (0..self.dim())
            .filter(|n| inside.binary_search(n).is_err())
            .map(|n| v[n].abs())
            .sum();
        if outside > 1e-12 {
            return Err(Error::SectorMismatch("vector leaks out of the sector".into()));
        }
        SparseState::from_entries(s, inside.iter().map(|&n| (self.config_of(n), v[n])))
    }
}
