//! Exact expectation values on sparse CI vectors.
//!
//! Spin operators are applied to the state exactly; products such as
//! `S+_1 S-_2` are evaluated as inner products `<S-_1 v | S-_2 v>` so no
//! reduced density matrices are formed.

use serde::Serialize;

use crate::config::{FermionTerm, SpinOrbital};
use crate::error::{Error, Result};
use crate::hamiltonian::{apply_operator, SparseState};
use crate::pipelines::CIState;

/// Named set of spatial orbitals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitalGroup {
    pub name: String,
    pub orbitals: Vec<usize>,
}

impl OrbitalGroup {
    pub fn new(name: impl Into<String>, orbitals: impl IntoIterator<Item = usize>) -> Self {
        let mut orbitals: Vec<usize> = orbitals.into_iter().collect();
        orbitals.sort_unstable();
        orbitals.dedup();
        OrbitalGroup {
            name: name.into(),
            orbitals,
        }
    }

    pub fn all(n_orb: usize) -> Self {
        Self::new("all", 0..n_orb)
    }

    fn check(&self, n_orb: usize) -> Result<()> {
        match self.orbitals.iter().find(|&&p| p >= n_orb) {
            Some(p) => Err(Error::InvalidInput(format!(
                "group {:?} names orbital {p} but M = {n_orb}",
                self.name
            ))),
            None => Ok(()),
        }
    }
}

/// Pairs of groups sharing at least one orbital.
pub fn overlapping_groups(groups: &[OrbitalGroup]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            if a.orbitals.iter().any(|p| b.orbitals.contains(p)) {
                out.push((a.name.clone(), b.name.clone()));
            }
        }
    }
    out
}

fn spin_flip_terms(orbitals: &[usize], raise: bool) -> Vec<FermionTerm> {
    orbitals
        .iter()
        .map(|&p| {
            let (c, a) = if raise {
                (SpinOrbital::alpha(p), SpinOrbital::beta(p))
            } else {
                (SpinOrbital::beta(p), SpinOrbital::alpha(p))
            };
            FermionTerm {
                coeff: 1.0,
                creates: vec![c],
                annihilates: vec![a],
            }
        })
        .collect()
}

fn raise(v: &SparseState, orbitals: &[usize]) -> SparseState {
    apply_operator(&spin_flip_terms(orbitals, true), v).expect("spin-flip terms are well formed")
}

fn lower(v: &SparseState, orbitals: &[usize]) -> SparseState {
    apply_operator(&spin_flip_terms(orbitals, false), v).expect("spin-flip terms are well formed")
}

/// `<v|S^2|v>` with `S^2 = S- S+ + Sz (Sz + 1)`.
pub fn total_s_squared(v: &SparseState) -> f64 {
    let s = v.sector();
    let all: Vec<usize> = (0..s.n_orb).collect();
    let sz = (s.n_alpha as f64 - s.n_beta as f64) / 2.0;
    raise(v, &all).norm_sqr() + v.norm_sqr() * sz * (sz + 1.0)
}

/// `(sum_{p in g} <n_p,alpha>, sum_{p in g} <n_p,beta>)`.
pub fn group_charges(v: &SparseState, g: &OrbitalGroup) -> Result<(f64, f64)> {
    g.check(v.n_orb())?;
    let mut up = 0.0;
    let mut down = 0.0;
    for (c, a) in v.iter() {
        let w = a * a;
        for &p in &g.orbitals {
            if c.alpha.get(p) {
                up += w;
            }
            if c.beta.get(p) {
                down += w;
            }
        }
    }
    Ok((up, down))
}

/// `<S^(g)>` as `(x, y, z)`.
pub fn local_spin(v: &SparseState, g: &OrbitalGroup) -> Result<[f64; 3]> {
    let (up, down) = group_charges(v, g)?;
    // <S+> = <v|S+ v>; for a real state <S-> equals it, so Sy vanishes
    let plus = v.dot(&raise(v, &g.orbitals));
    Ok([plus, 0.0, 0.5 * (up - down)])
}

fn spin_z_of(c: &crate::config::Configuration, orbitals: &[usize]) -> f64 {
    orbitals
        .iter()
        .map(|&p| 0.5 * (c.alpha.get(p) as i32 - c.beta.get(p) as i32) as f64)
        .sum()
}

/// Raw `<S_1 . S_2>` and the connected part `raw - <S_1> . <S_2>`.
pub fn spin_correlation(v: &SparseState, g1: &OrbitalGroup, g2: &OrbitalGroup) -> Result<(f64, f64)> {
    g1.check(v.n_orb())?;
    g2.check(v.n_orb())?;
    let zz: f64 = v
        .iter()
        .map(|(c, a)| a * a * spin_z_of(c, &g1.orbitals) * spin_z_of(c, &g2.orbitals))
        .sum();
    // <S+_1 S-_2> = <S-_1 v|S-_2 v>, <S-_1 S+_2> = <S+_1 v|S+_2 v>
    let pm = lower(v, &g1.orbitals).dot(&lower(v, &g2.orbitals));
    let mp = raise(v, &g1.orbitals).dot(&raise(v, &g2.orbitals));
    let raw = zz + 0.5 * (pm + mp);
    let s1 = local_spin(v, g1)?;
    let s2 = local_spin(v, g2)?;
    let connected = raw - (s1[0] * s2[0] + s1[1] * s2[1] + s1[2] * s2[2]);
    Ok((raw, connected))
}

/// Per-orbital occupancies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyProfile {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub total: Vec<f64>,
}

pub fn occupancy_profile(v: &SparseState) -> OccupancyProfile {
    let (alpha, beta) = v.occupations();
    let total = alpha.iter().zip(&beta).map(|(a, b)| a + b).collect();
    OccupancyProfile { alpha, beta, total }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinClass {
    Singlet,
    Triplet,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootLabel {
    pub root: usize,
    pub energy: f64,
    pub s_squared: f64,
    pub class: SpinClass,
    /// `S0, S1, ...` for singlets, `T1, T2, ...` for triplets,
    /// `mixed(<S^2>)` otherwise.
    pub label: String,
}

/// Labels roots by `<S^2>` (within 0.5 of 0 or 2), numbering each class in
/// ascending root order; equal energies keep the solver's order.
pub fn classify_roots(state: &CIState) -> Vec<RootLabel> {
    let mut singlets = 0;
    let mut triplets = 0;
    (0..state.n_roots())
        .map(|mu| {
            let s2 = total_s_squared(&state.root(mu));
            let (class, label) = if s2.abs() < 0.5 {
                singlets += 1;
                (SpinClass::Singlet, format!("S{}", singlets - 1))
            } else if (s2 - 2.0).abs() < 0.5 {
                triplets += 1;
                (SpinClass::Triplet, format!("T{triplets}"))
            } else {
                (SpinClass::Mixed, format!("mixed({s2:.4})"))
            };
            RootLabel {
                root: mu,
                energy: state.energies[mu],
                s_squared: s2,
                class,
                label,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSpin {
    pub name: String,
    pub n_up: f64,
    pub n_down: f64,
    pub spin: [f64; 3],
    pub spin_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub first: String,
    pub second: String,
    pub raw: f64,
    pub connected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootObservables {
    pub root: usize,
    pub energy: f64,
    pub s_squared: f64,
    pub label: String,
    pub occupancy: OccupancyProfile,
    pub groups: Vec<GroupSpin>,
    pub correlations: Vec<PairCorrelation>,
}

/// Every observable of every root, with correlations over all group pairs.
pub fn spin_report(state: &CIState, groups: &[OrbitalGroup]) -> Result<Vec<RootObservables>> {
    let labels = classify_roots(state);
    labels
        .into_iter()
        .map(|l| {
            let v = state.root(l.root);
            let group_spins = groups
                .iter()
                .map(|g| {
                    let (n_up, n_down) = group_charges(&v, g)?;
                    let spin = local_spin(&v, g)?;
                    Ok(GroupSpin {
                        name: g.name.clone(),
                        n_up,
                        n_down,
                        spin,
                        spin_norm: spin.iter().map(|x| x * x).sum::<f64>().sqrt(),
                    })
                })
                .collect::<Result<_>>()?;
            let mut correlations = Vec::new();
            for (i, a) in groups.iter().enumerate() {
                for b in &groups[i + 1..] {
                    let (raw, connected) = spin_correlation(&v, a, b)?;
                    correlations.push(PairCorrelation {
                        first: a.name.clone(),
                        second: b.name.clone(),
                        raw,
                        connected,
                    });
                }
            }
            Ok(RootObservables {
                root: l.root,
                energy: l.energy,
                s_squared: l.s_squared,
                label: l.label,
                occupancy: occupancy_profile(&v),
                groups: group_spins,
                correlations,
            })
        })
        .collect()
}
