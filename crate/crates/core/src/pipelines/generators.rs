use std::ops::Range;

use itertools::Itertools;
use serde::Serialize;

use crate::config::{Configuration, ExcitationOperator, Sector, Spin, SpinOrbital};
use crate::error::{Error, Result};

/// Number of generators of each rank.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GeneratorCounts {
    pub singles: usize,
    pub doubles: usize,
    pub triples: usize,
}

/// Reference-based excitation operators, identity first.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    operators: Vec<ExcitationOperator>,
    pub reference: Configuration,
    pub ranks: Vec<usize>,
    pub window: Option<Range<usize>>,
    pub counts: GeneratorCounts,
}

impl GeneratorSet {
    /// A set holding only the identity.
    pub fn identity(reference: Configuration) -> Self {
        GeneratorSet {
            operators: vec![ExcitationOperator::identity()],
            reference,
            ranks: Vec::new(),
            window: None,
            counts: GeneratorCounts::default(),
        }
    }

    pub fn operators(&self) -> &[ExcitationOperator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

/// Every spin-preserving operator of the requested ranks that moves
/// electrons from occupied to empty spin-orbitals of `reference`, with both
/// ends inside `window` when given. Creators and annihilators are listed in
/// ascending global index.
pub fn make_generators(
    s: &Sector,
    reference: &Configuration,
    ranks: &[usize],
    window: Option<Range<usize>>,
) -> Result<GeneratorSet> {
    if !reference.in_sector(s) {
        return Err(Error::SectorMismatch(format!("reference {reference:?} is not in sector {s}")));
    }
    let mut ranks: Vec<usize> = ranks.to_vec();
    ranks.sort_unstable();
    ranks.dedup();
    if let Some(&r) = ranks.iter().find(|&&r| !(1..=3).contains(&r)) {
        return Err(Error::InvalidInput(format!("rank {r} is not 1, 2 or 3")));
    }
    let win = window.clone().unwrap_or(0..s.n_orb);
    if win.end > s.n_orb || win.start >= win.end {
        return Err(Error::InvalidInput(format!("window {win:?} is invalid for M = {}", s.n_orb)));
    }
    let mut occupied = Vec::new();
    let mut virtuals = Vec::new();
    for spin in Spin::BOTH {
        for p in win.clone() {
            let so = SpinOrbital::new(p, spin);
            if reference.is_occupied(so) {
                occupied.push(so);
            } else {
                virtuals.push(so);
            }
        }
    }
    let by_index = |a: &SpinOrbital, b: &SpinOrbital| a.global_index(s.n_orb).cmp(&b.global_index(s.n_orb));
    occupied.sort_by(by_index);
    virtuals.sort_by(by_index);

    let mut operators = vec![ExcitationOperator::identity()];
    let mut counts = GeneratorCounts::default();
    for &r in &ranks {
        if occupied.is_empty() || virtuals.is_empty() {
            return Err(Error::InvalidInput(format!(
                "rank {r} requested but the window has no {} spin-orbitals",
                if occupied.is_empty() { "occupied" } else { "virtual" }
            )));
        }
        let alphas = |v: &[SpinOrbital]| v.iter().filter(|so| so.spin == Spin::Alpha).count();
        let before = operators.len();
        for ann in occupied.iter().copied().combinations(r) {
            let na = alphas(&ann);
            for cre in virtuals.iter().copied().combinations(r) {
                if alphas(&cre) == na {
                    operators.push(ExcitationOperator::new(cre, ann.clone())?);
                }
            }
        }
        let added = operators.len() - before;
        match r {
            1 => counts.singles = added,
            2 => counts.doubles = added,
            _ => counts.triples = added,
        }
    }
    Ok(GeneratorSet {
        operators,
        reference: reference.clone(),
        ranks,
        window,
        counts,
    })
}
