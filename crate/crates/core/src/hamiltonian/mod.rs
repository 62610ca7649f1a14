//! Second-quantized electronic Hamiltonians
//!
//! `H = E0 + sum h_pr a†_{p s} a_{r s} + 1/2 sum (pr|qs) a†_{p s} a†_{q t} a_{s t} a_{r s}`
//! with real orbitals and two-electron integrals in chemist notation.

mod fcidump;
mod models;
mod operator;
mod slater;
mod sparse;

pub use fcidump::{parse_fcidump, write_fcidump, FcidumpReport};
pub use models::{hubbard_chain, random_hamiltonian};
pub use operator::{build_subspace_operator, SubspaceOperator, DEFAULT_EXPLICIT_THRESHOLD};
pub use slater::{connected_configurations, diagonal_element, for_each_connected, matrix_element};
pub use sparse::{apply_operator, hamiltonian_terms, SparseState, PRUNE_THRESHOLD};

use crate::error::{Error, Result};

#[inline]
fn pair_index(i: usize, j: usize) -> usize {
    if i >= j {
        i * (i + 1) / 2 + j
    } else {
        j * (j + 1) / 2 + i
    }
}

#[inline]
fn eri_index(p: usize, r: usize, q: usize, s: usize) -> usize {
    pair_index(pair_index(p, r), pair_index(q, s))
}

/// Real-orbital Hamiltonian with 8-fold packed two-electron integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_orb: usize,
    e0: f64,
    h: Vec<f64>,
    eri: Vec<f64>,
    // (pp|qq) and (pq|qp), used by the diagonal and single-excitation rules.
    coulomb: Vec<f64>,
    exchange: Vec<f64>,
}

impl Hamiltonian {
    /// All-zero Hamiltonian on `n_orb` orbitals.
    pub fn zeros(n_orb: usize) -> Self {
        let npair = n_orb * (n_orb + 1) / 2;
        Hamiltonian {
            n_orb,
            e0: 0.0,
            h: vec![0.0; n_orb * n_orb],
            eri: vec![0.0; npair * (npair + 1) / 2],
            coulomb: vec![0.0; n_orb * n_orb],
            exchange: vec![0.0; n_orb * n_orb],
        }
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn set_e0(&mut self, e0: f64) {
        self.e0 = e0;
    }

    #[inline]
    pub fn one_body(&self, p: usize, r: usize) -> f64 {
        self.h[p * self.n_orb + r]
    }

    /// Sets `h_pr` and `h_rp`.
    pub fn set_one_body(&mut self, p: usize, r: usize, v: f64) {
        self.h[p * self.n_orb + r] = v;
        self.h[r * self.n_orb + p] = v;
    }

    /// `(pr|qs)` in chemist notation.
    #[inline]
    pub fn eri(&self, p: usize, r: usize, q: usize, s: usize) -> f64 {
        self.eri[eri_index(p, r, q, s)]
    }

    /// Sets `(pr|qs)` and its seven symmetry partners.
    pub fn set_eri(&mut self, p: usize, r: usize, q: usize, s: usize, v: f64) {
        self.eri[eri_index(p, r, q, s)] = v;
        self.refresh_caches_for(p, r, q, s);
    }

    fn refresh_caches_for(&mut self, p: usize, r: usize, q: usize, s: usize) {
        let m = self.n_orb;
        let idx = [p, r, q, s];
        for &a in &idx {
            for &b in &idx {
                self.coulomb[a * m + b] = self.eri(a, a, b, b);
                self.exchange[a * m + b] = self.eri(a, b, b, a);
            }
        }
    }

    #[inline]
    pub(crate) fn coulomb(&self, p: usize, q: usize) -> f64 {
        self.coulomb[p * self.n_orb + q]
    }

    #[inline]
    pub(crate) fn exchange(&self, p: usize, q: usize) -> f64 {
        self.exchange[p * self.n_orb + q]
    }

    /// Unique packed two-electron values with one representative index
    /// quadruple each (`p >= r`, `q >= s`, `pr >= qs`).
    pub fn unique_eri(&self) -> impl Iterator<Item = ((usize, usize, usize, usize), f64)> + '_ {
        let m = self.n_orb;
        (0..m).flat_map(move |p| {
            (0..=p).flat_map(move |r| {
                let pr = pair_index(p, r);
                (0..m).flat_map(move |q| {
                    (0..=q).filter_map(move |s| {
                        (pair_index(q, s) <= pr).then(|| ((p, r, q, s), self.eri(p, r, q, s)))
                    })
                })
            })
        })
    }

    /// Checks symmetry (guaranteed by storage) and finiteness.
    pub fn validate(&self) -> Result<()> {
        let finite = self.e0.is_finite()
            && self.h.iter().all(|v| v.is_finite())
            && self.eri.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("Hamiltonian has non-finite entries".into()));
        }
        Ok(())
    }

    /// Same Hamiltonian with `E0` shifted by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut h = self.clone();
        h.e0 += shift;
        h
    }
}
