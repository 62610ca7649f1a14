use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Configuration, SpinOrbital};
use crate::error::{Error, Result};

/// Spin- and particle-preserving excitation `a†_{c1} .. a†_{ck} a_{a1} .. a_{ak}`
/// of rank 0 (identity) to 3.
///
/// The operator is applied exactly as written: annihilators right-to-left,
/// then creators right-to-left. The index order chosen by the caller fixes
/// the overall sign.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExcitationOperator {
    creates: Vec<SpinOrbital>,
    annihilates: Vec<SpinOrbital>,
}

pub const MAX_RANK: usize = 3;

impl ExcitationOperator {
    pub fn new(creates: Vec<SpinOrbital>, annihilates: Vec<SpinOrbital>) -> Result<Self> {
        if creates.len() != annihilates.len() {
            return Err(Error::MalformedOperator(format!(
                "{} creators vs {} annihilators",
                creates.len(),
                annihilates.len()
            )));
        }
        if creates.len() > MAX_RANK {
            return Err(Error::MalformedOperator(format!(
                "rank {} exceeds {MAX_RANK}",
                creates.len()
            )));
        }
        for list in [&creates, &annihilates] {
            for (i, a) in list.iter().enumerate() {
                if list[..i].contains(a) {
                    return Err(Error::MalformedOperator(format!("repeated spin-orbital {a:?}")));
                }
            }
        }
        let mut cs: Vec<_> = creates.iter().map(|s| s.spin).collect();
        let mut ans: Vec<_> = annihilates.iter().map(|s| s.spin).collect();
        cs.sort();
        ans.sort();
        if cs != ans {
            return Err(Error::MalformedOperator("operator does not preserve spin".into()));
        }
        Ok(ExcitationOperator {
            creates,
            annihilates,
        })
    }

    pub fn identity() -> Self {
        ExcitationOperator {
            creates: Vec::new(),
            annihilates: Vec::new(),
        }
    }

    /// `a†_to a_from`.
    pub fn single(to: SpinOrbital, from: SpinOrbital) -> Result<Self> {
        Self::new(vec![to], vec![from])
    }

    pub fn rank(&self) -> usize {
        self.creates.len()
    }

    pub fn is_identity(&self) -> bool {
        self.creates.is_empty()
    }

    pub fn creates(&self) -> &[SpinOrbital] {
        &self.creates
    }

    pub fn annihilates(&self) -> &[SpinOrbital] {
        &self.annihilates
    }

    pub fn max_orbital(&self) -> Option<usize> {
        self.creates
            .iter()
            .chain(self.annihilates.iter())
            .map(|s| s.orbital)
            .max()
    }
}

impl fmt::Debug for ExcitationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let label = |s: &SpinOrbital| {
            format!(
                "{}{}",
                s.orbital,
                if s.spin == super::Spin::Alpha { "a" } else { "b" }
            )
        };
        for c in &self.creates {
            write!(f, "+{}", label(c))?;
        }
        for a in &self.annihilates {
            write!(f, "-{}", label(a))?;
        }
        Ok(())
    }
}

/// Weighted ladder-operator string. Unlike [`ExcitationOperator`] this may
/// flip spins (e.g. `S+ = sum_p a†_{p,alpha} a_{p,beta}`), but it always
/// conserves the total particle number.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub coeff: f64,
    pub creates: Vec<SpinOrbital>,
    pub annihilates: Vec<SpinOrbital>,
}

impl FermionTerm {
    pub fn new(coeff: f64, creates: Vec<SpinOrbital>, annihilates: Vec<SpinOrbital>) -> Result<Self> {
        if creates.len() != annihilates.len() {
            return Err(Error::MalformedOperator(
                "term does not conserve particle number".into(),
            ));
        }
        Ok(FermionTerm {
            coeff,
            creates,
            annihilates,
        })
    }

    pub fn number(coeff: f64, so: SpinOrbital) -> Self {
        FermionTerm {
            coeff,
            creates: vec![so],
            annihilates: vec![so],
        }
    }
}

impl From<&ExcitationOperator> for FermionTerm {
    fn from(e: &ExcitationOperator) -> Self {
        FermionTerm {
            coeff: 1.0,
            creates: e.creates.clone(),
            annihilates: e.annihilates.clone(),
        }
    }
}

/// Applies `a†_{creates[0]} .. a_{annihilates[last]}` to `y`.
///
/// Returns `Ok(None)` when the string annihilates the determinant, otherwise
/// the sign (+1 or -1) and the resulting configuration.
pub fn apply_ladder(
    creates: &[SpinOrbital],
    annihilates: &[SpinOrbital],
    y: &Configuration,
    n_orb: usize,
) -> Result<Option<(i8, Configuration)>> {
    if let Some(bad) = creates
        .iter()
        .chain(annihilates.iter())
        .find(|s| s.orbital >= n_orb)
    {
        return Err(Error::MalformedOperator(format!(
            "orbital {} out of range for M = {n_orb}",
            bad.orbital
        )));
    }
    let mut z = y.clone();
    let mut parity = 0usize;
    for &so in annihilates.iter().rev() {
        if !z.is_occupied(so) {
            return Ok(None);
        }
        parity += z.parity_below(so);
        z.mask_mut(so.spin).clear(so.orbital);
    }
    for &so in creates.iter().rev() {
        if z.is_occupied(so) {
            return Ok(None);
        }
        parity += z.parity_below(so);
        z.mask_mut(so.spin).set(so.orbital);
    }
    let sign = if parity % 2 == 0 { 1 } else { -1 };
    Ok(Some((sign, z)))
}

/// `E|y> = gamma |z>` with `gamma` in {0, +1, -1}; `z` is absent when
/// `gamma == 0`.
pub fn apply_excitation(
    e: &ExcitationOperator,
    y: &Configuration,
    n_orb: usize,
) -> Result<(i8, Option<Configuration>)> {
    Ok(match apply_ladder(&e.creates, &e.annihilates, y, n_orb)? {
        Some((s, z)) => (s, Some(z)),
        None => (0, None),
    })
}
