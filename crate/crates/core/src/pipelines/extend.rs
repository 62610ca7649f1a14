use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::{diagonalize, CIState, GeneratorSet, Method, SolverOptions};
use crate::config::{apply_excitation, spin_inversion_closure, Configuration, Sector, SubspaceBasis};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

pub const DEFAULT_CUT_THRESHOLD: f64 = 1e-3;
/// Seed configurations processed per parallel chunk.
pub const DEFAULT_CHUNK: usize = 4096;

/// Configurations whose ground amplitude has magnitude at least
/// `threshold`, closed under spin inversion when the sector is balanced.
pub fn cut_state(state: &CIState, threshold: f64) -> Result<SubspaceBasis> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidInput(format!("threshold {threshold} is negative")));
    }
    let kept: Vec<Configuration> = state
        .basis
        .iter()
        .zip(state.coefficients.column(0).iter())
        .filter(|(_, c)| c.abs() >= threshold)
        .map(|(x, _)| x.clone())
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyBasis);
    }
    if state.sector.is_balanced() {
        spin_inversion_closure(&kept)
    } else {
        Ok(SubspaceBasis::new(kept))
    }
}

/// Outcomes of applying every generator to every seed configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ExtensionTallies {
    /// First appearance of a configuration outside the seed.
    pub new_unique: u64,
    /// The generator annihilated the configuration.
    pub annihilated: u64,
    /// A configuration already produced by an earlier application.
    pub duplicate_new: u64,
    /// The result is a seed configuration.
    pub already_present: u64,
}

impl ExtensionTallies {
    pub fn total(&self) -> u64 {
        self.new_unique + self.annihilated + self.duplicate_new + self.already_present
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    pub basis: SubspaceBasis,
    pub tallies: ExtensionTallies,
    /// `|seed| * prod_sigma N_sigma (M - N_sigma) + |seed|`.
    pub bound: u128,
    pub within_bound: bool,
}

/// `seed` together with every nonzero `E_I |y>`, optionally re-closed under
/// spin inversion.
///
/// Seeds are processed in chunks of `chunk`: generator application runs in
/// parallel inside a chunk and results are merged serially in canonical
/// seed order, so the output and tallies do not depend on thread count.
pub fn extend_subspace(
    seed: &SubspaceBasis,
    generators: &GeneratorSet,
    sector: &Sector,
    chunk: usize,
    spin_closure: bool,
) -> Result<Extension> {
    if seed.is_empty() {
        return Err(Error::EmptyBasis);
    }
    if chunk == 0 {
        return Err(Error::InvalidInput("chunk must be at least 1".into()));
    }
    let m = sector.n_orb;
    let mut fresh: BTreeSet<Configuration> = BTreeSet::new();
    let mut tallies = ExtensionTallies::default();
    for block in seed.configs().chunks(chunk) {
        let produced: Vec<Vec<Option<Configuration>>> = block
            .par_iter()
            .map(|y| {
                generators
                    .operators()
                    .iter()
                    .map(|e| apply_excitation(e, y, m).map(|(_, z)| z))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for z in produced.into_iter().flatten() {
            match z {
                None => tallies.annihilated += 1,
                Some(z) if seed.contains(&z) => tallies.already_present += 1,
                Some(z) => {
                    if fresh.insert(z) {
                        tallies.new_unique += 1;
                    } else {
                        tallies.duplicate_new += 1;
                    }
                }
            }
        }
    }
    let merged = seed.union(&SubspaceBasis::from_sorted(fresh.into_iter().collect())?);
    let basis = if spin_closure && sector.is_balanced() {
        spin_inversion_closure(merged.configs())?
    } else {
        merged
    };
    let d = seed.len() as u128;
    let per = (sector.n_alpha * (m - sector.n_alpha)) as u128 * (sector.n_beta * (m - sector.n_beta)) as u128;
    let bound = d * per + d;
    Ok(Extension {
        within_bound: basis.len() as u128 <= bound,
        basis,
        tallies,
        bound,
    })
}

#[derive(Debug, Clone)]
pub struct ExtSqdOptions {
    pub threshold: f64,
    pub n_roots: usize,
    pub chunk: usize,
    pub spin_closure: bool,
    pub solver: SolverOptions,
}

impl Default for ExtSqdOptions {
    fn default() -> Self {
        ExtSqdOptions {
            threshold: DEFAULT_CUT_THRESHOLD,
            n_roots: 1,
            chunk: DEFAULT_CHUNK,
            spin_closure: true,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtSqdReport {
    pub cut_dimension: usize,
    pub extended_dimension: usize,
    pub tallies: ExtensionTallies,
    pub bound: u128,
    pub within_bound: bool,
    pub converged: bool,
}

/// Cut, extend and re-diagonalize.
pub fn run_ext_sqd(
    h: &Hamiltonian,
    sqd_state: &CIState,
    generators: &GeneratorSet,
    opts: &ExtSqdOptions,
) -> Result<(CIState, ExtSqdReport)> {
    let cut = cut_state(sqd_state, opts.threshold)?;
    let ext = extend_subspace(&cut, generators, &sqd_state.sector, opts.chunk, opts.spin_closure)?;
    let report = ExtSqdReport {
        cut_dimension: cut.len(),
        extended_dimension: ext.basis.len(),
        tallies: ext.tallies,
        bound: ext.bound,
        within_bound: ext.within_bound,
        converged: false,
    };
    let (state, converged) = diagonalize(h, ext.basis, sqd_state.sector, opts.n_roots, Method::ExtSqd, &opts.solver)?;
    Ok((state, ExtSqdReport { converged, ..report }))
}
