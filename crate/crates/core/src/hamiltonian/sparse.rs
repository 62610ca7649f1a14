use std::collections::BTreeMap;

use super::slater::for_each_connected;
use super::Hamiltonian;
use crate::config::{apply_ladder, Configuration, FermionTerm, Sector, Spin, SpinOrbital, SubspaceBasis};
use crate::error::{Error, Result};

/// Amplitudes with magnitude at or below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Real CI vector over determinants, keyed in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    sector: Sector,
    entries: BTreeMap<Configuration, f64>,
}

impl SparseState {
    pub fn zero(sector: Sector) -> Self {
        SparseState {
            sector,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries<I>(sector: Sector, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Configuration, f64)>,
    {
        let mut st = Self::zero(sector);
        for (c, a) in entries {
            if !c.in_sector(&sector) {
                return Err(Error::SectorMismatch(format!("{c:?} is not in sector {sector}")));
            }
            *st.entries.entry(c).or_insert(0.0) += a;
        }
        st.prune();
        Ok(st)
    }

    /// State with amplitudes `coeffs[k]` on `basis[k]`.
    pub fn from_basis(sector: Sector, basis: &SubspaceBasis, coeffs: &[f64]) -> Result<Self> {
        if basis.len() != coeffs.len() {
            return Err(Error::InvalidInput("coefficient count differs from basis size".into()));
        }
        Self::from_entries(sector, basis.iter().cloned().zip(coeffs.iter().copied()))
    }

    pub fn single(sector: Sector, c: Configuration) -> Result<Self> {
        Self::from_entries(sector, [(c, 1.0)])
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn n_orb(&self) -> usize {
        self.sector.n_orb
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, f64)> {
        self.entries.iter().map(|(c, &a)| (c, a))
    }

    pub fn amplitude(&self, c: &Configuration) -> f64 {
        self.entries.get(c).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> SubspaceBasis {
        SubspaceBasis::from_sorted(self.entries.keys().cloned().collect())
            .expect("BTreeMap keys are sorted")
    }

    fn prune(&mut self) {
        self.entries.retain(|_, a| a.abs() > PRUNE_THRESHOLD);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|a| a * a).sum()
    }

    pub fn dot(&self, other: &SparseState) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .map(|(c, a)| a * large.amplitude(c))
            .sum()
    }

    pub fn scaled(&self, f: f64) -> SparseState {
        let mut s = self.clone();
        for a in s.entries.values_mut() {
            *a *= f;
        }
        s.prune();
        s
    }

    pub fn normalized(&self) -> Result<SparseState> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::Unnormalized(0.0));
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let n2 = self.norm_sqr();
        if (n2 - 1.0).abs() > tol {
            return Err(Error::Unnormalized(n2));
        }
        Ok(())
    }

    /// Dense amplitude vector over `basis` (entries outside are ignored).
    pub fn to_dense_on(&self, basis: &SubspaceBasis) -> Vec<f64> {
        basis.iter().map(|c| self.amplitude(c)).collect()
    }

    /// Weighted occupancies `sum_x |c_x|^2 x_{p sigma}` per spin channel.
    pub fn occupations(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.sector.n_orb;
        let mut a = vec![0.0; m];
        let mut b = vec![0.0; m];
        for (c, amp) in &self.entries {
            let w = amp * amp;
            for p in c.alpha.iter_ones() {
                a[p] += w;
            }
            for p in c.beta.iter_ones() {
                b[p] += w;
            }
        }
        (a, b)
    }

    /// `H|v>` by Slater-Condon connections of every support member.
    pub fn apply_hamiltonian(&self, h: &Hamiltonian) -> SparseState {
        let mut out = BTreeMap::new();
        for (c, a) in &self.entries {
            for_each_connected(h, c, |z, v| {
                *out.entry(z).or_insert(0.0) += v * a;
            });
        }
        let mut st = SparseState {
            sector: self.sector,
            entries: out,
        };
        st.prune();
        st
    }
}

fn sector_shift(term: &FermionTerm) -> (isize, isize) {
    let count = |list: &[SpinOrbital], spin| list.iter().filter(|s| s.spin == spin).count() as isize;
    (
        count(&term.creates, Spin::Alpha) - count(&term.annihilates, Spin::Alpha),
        count(&term.creates, Spin::Beta) - count(&term.annihilates, Spin::Beta),
    )
}

/// Exact application of `sum_t coeff_t * term_t` to a sparse state.
///
/// Every term must move `(N_alpha, N_beta)` by the same amount (spin-flip
/// terms are allowed). When the target sector is unreachable the result is
/// the zero state in that nominal sector.
pub fn apply_operator(terms: &[FermionTerm], v: &SparseState) -> Result<SparseState> {
    let src = v.sector;
    let shift = terms.first().map(sector_shift).unwrap_or((0, 0));
    if let Some(t) = terms.iter().find(|t| sector_shift(t) != shift) {
        return Err(Error::MalformedOperator(format!(
            "term {t:?} changes the sector differently from the first term"
        )));
    }
    for t in terms {
        if t.creates.len() != t.annihilates.len() {
            return Err(Error::MalformedOperator("term does not conserve particle number".into()));
        }
    }
    let na = src.n_alpha as isize + shift.0;
    let nb = src.n_beta as isize + shift.1;
    let target = Sector {
        n_orb: src.n_orb,
        n_alpha: na.max(0) as usize,
        n_beta: nb.max(0) as usize,
    };
    let mut out: BTreeMap<Configuration, f64> = BTreeMap::new();
    for (c, a) in &v.entries {
        for t in terms {
            if let Some((sign, z)) = apply_ladder(&t.creates, &t.annihilates, c, src.n_orb)? {
                *out.entry(z).or_insert(0.0) += t.coeff * f64::from(sign) * a;
            }
        }
    }
    let mut st = SparseState {
        sector: target,
        entries: out,
    };
    st.prune();
    Ok(st)
}

/// Second-quantized term expansion of `H`: the core energy as an identity
/// term, then one- and two-body strings with nonzero coefficients.
pub fn hamiltonian_terms(h: &Hamiltonian) -> Vec<FermionTerm> {
    let m = h.n_orb();
    let mut terms = vec![FermionTerm {
        coeff: h.e0(),
        creates: vec![],
        annihilates: vec![],
    }];
    for spin in Spin::BOTH {
        for p in 0..m {
            for r in 0..m {
                let v = h.one_body(p, r);
                if v != 0.0 {
                    terms.push(FermionTerm {
                        coeff: v,
                        creates: vec![SpinOrbital::new(p, spin)],
                        annihilates: vec![SpinOrbital::new(r, spin)],
                    });
                }
            }
        }
    }
    for s1 in Spin::BOTH {
        for s2 in Spin::BOTH {
            for p in 0..m {
                for q in 0..m {
                    if s1 == s2 && p == q {
                        continue;
                    }
                    for r in 0..m {
                        for s in 0..m {
                            if s1 == s2 && r == s {
                                continue;
                            }
                            let v = h.eri(p, r, q, s);
                            if v != 0.0 {
                                terms.push(FermionTerm {
                                    coeff: 0.5 * v,
                                    creates: vec![SpinOrbital::new(p, s1), SpinOrbital::new(q, s2)],
                                    annihilates: vec![SpinOrbital::new(s, s2), SpinOrbital::new(r, s1)],
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::random_hamiltonian;

    fn so_a(p: usize) -> SpinOrbital {
        SpinOrbital::alpha(p)
    }

    #[test]
    fn number_operator_on_reference() {
        let s = Sector::new(6, 3, 3).unwrap();
        let v = SparseState::single(s, s.reference()).unwrap();
        let out = apply_operator(&[FermionTerm::number(1.0, so_a(0))], &v).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn raising_closed_shell_vanishes() {
        let s = Sector::new(3, 2, 2).unwrap();
        let v = SparseState::single(s, s.reference()).unwrap();
        let splus: Vec<_> = (0..3)
            .map(|p| FermionTerm::new(1.0, vec![SpinOrbital::alpha(p)], vec![SpinOrbital::beta(p)]).unwrap())
            .collect();
        let out = apply_operator(&splus, &v).unwrap();
        assert!(out.is_empty());
        assert_eq!(out.sector(), Sector::new(3, 3, 1).unwrap());
    }

    #[test]
    fn mixed_sector_terms_are_malformed() {
        let s = Sector::new(2, 1, 1).unwrap();
        let v = SparseState::single(s, s.reference()).unwrap();
        let terms = vec![
            FermionTerm::number(1.0, so_a(0)),
            FermionTerm::new(1.0, vec![so_a(1)], vec![SpinOrbital::beta(0)]).unwrap(),
        ];
        assert!(apply_operator(&terms, &v).is_err());
    }

    #[test]
    fn term_expansion_matches_slater_condon() {
        let h = random_hamiltonian(3, 17);
        let terms = hamiltonian_terms(&h);
        let s = Sector::new(3, 2, 1).unwrap();
        for c in crate::config::enumerate_sector(&s, 100).unwrap().iter() {
            let v = SparseState::single(s, c.clone()).unwrap();
            let a = apply_operator(&terms, &v).unwrap();
            let b = v.apply_hamiltonian(&h);
            assert_eq!(a.support(), b.support());
            for (z, x) in a.iter() {
                assert!((x - b.amplitude(z)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn from_entries_checks_sector() {
        let s = Sector::new(2, 1, 1).unwrap();
        assert!(SparseState::from_entries(s, [(Configuration::vacuum(2), 1.0)]).is_err());
        let v = SparseState::from_entries(
            s,
            [(s.reference(), 1e-16), (Configuration::from_occupations(2, [1], [0]), 2.0)],
        )
        .unwrap();
        assert_eq!(v.len(), 1);
        assert!(v.check_normalized(1e-8).is_err());
        assert!(v.normalized().unwrap().check_normalized(1e-12).is_ok());
    }
}
