use std::ops::Index;

use itertools::Itertools;

use super::{BitMask, Configuration, Sector};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Canonically ordered, deduplicated set of configurations.
///
/// Membership lookups are binary searches over the sorted storage; the
/// position of a configuration is its row in every matrix built on the basis.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubspaceBasis {
    configs: Vec<Configuration>,
}

impl SubspaceBasis {
    pub fn new<I: IntoIterator<Item = Configuration>>(configs: I) -> Self {
        let mut configs: Vec<_> = configs.into_iter().collect();
        configs.sort_unstable();
        configs.dedup();
        SubspaceBasis { configs }
    }

    /// Wraps a vector that is already sorted and free of duplicates.
    pub fn from_sorted(configs: Vec<Configuration>) -> Result<Self> {
        if configs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("basis is not strictly sorted".into()));
        }
        Ok(SubspaceBasis { configs })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn index_of(&self, c: &Configuration) -> Option<usize> {
        self.configs.binary_search(c).ok()
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        self.index_of(c).is_some()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Configuration> {
        self.configs.iter()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn into_configs(self) -> Vec<Configuration> {
        self.configs
    }

    /// Union with another basis, keeping canonical order.
    pub fn union(&self, other: &SubspaceBasis) -> SubspaceBasis {
        let merged = self
            .configs
            .iter()
            .merge(other.configs.iter())
            .dedup()
            .cloned()
            .collect();
        SubspaceBasis { configs: merged }
    }

    pub fn is_subset_of(&self, other: &SubspaceBasis) -> bool {
        self.configs.iter().all(|c| other.contains(c))
    }

    /// Common weights `(N_alpha, N_beta)` when every member agrees.
    pub fn common_weights(&self) -> Option<(usize, usize)> {
        let first = self.configs.first()?.hamming_weights();
        self.configs
            .iter()
            .all(|c| c.hamming_weights() == first)
            .then_some(first)
    }

    pub fn is_spin_closed(&self) -> bool {
        self.configs.iter().all(|c| self.contains(&c.spin_flipped()))
    }
}

impl Index<usize> for SubspaceBasis {
    type Output = Configuration;

    fn index(&self, i: usize) -> &Configuration {
        &self.configs[i]
    }
}

impl<'a> IntoIterator for &'a SubspaceBasis {
    type Item = &'a Configuration;
    type IntoIter = std::slice::Iter<'a, Configuration>;

    fn into_iter(self) -> Self::IntoIter {
        self.configs.iter()
    }
}

/// Union of `set` with every alpha/beta-swapped partner.
///
/// All members must share one sector with `N_alpha == N_beta`; otherwise the
/// partners would land in the mirrored sector.
pub fn spin_inversion_closure(set: &[Configuration]) -> Result<SubspaceBasis> {
    if let Some(first) = set.first() {
        let w = first.hamming_weights();
        if let Some(bad) = set.iter().find(|c| c.hamming_weights() != w) {
            return Err(Error::SectorMismatch(format!(
                "closure input mixes sectors {:?} and {:?}",
                w,
                bad.hamming_weights()
            )));
        }
        if w.0 != w.1 {
            return Err(Error::UnbalancedSpin {
                n_alpha: w.0,
                n_beta: w.1,
            });
        }
    }
    Ok(SubspaceBasis::new(
        set.iter().flat_map(|c| [c.clone(), c.spin_flipped()]),
    ))
}

fn masks_with_weight(n_orb: usize, n: usize) -> Vec<BitMask> {
    let mut masks: Vec<BitMask> = (0..n_orb)
        .combinations(n)
        .map(|occ| BitMask::from_orbitals(n_orb, occ))
        .collect();
    masks.sort_unstable();
    masks
}

/// Every configuration of the sector, in canonical order.
pub fn enumerate_sector(s: &Sector, cap: u128) -> Result<SubspaceBasis> {
    let size = s.dimension();
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let alphas = masks_with_weight(s.n_orb, s.n_alpha);
    let betas = masks_with_weight(s.n_orb, s.n_beta);
    let mut configs = Vec::with_capacity(size as usize);
    for a in &alphas {
        for b in &betas {
            configs.push(Configuration::new(a.clone(), b.clone()));
        }
    }
    SubspaceBasis::from_sorted(configs)
}
