use rayon::prelude::*;
use serde::Serialize;

use super::{diagonalize, CIState, Method, SolverOptions};
use crate::config::Sector;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::sampling::{
    make_batches, recover_configurations, sample_state, update_model, BatchOptions, RecoveryModel, SampleSet,
};

#[derive(Debug, Clone)]
pub struct SqdOptions {
    /// Batches per iteration (K).
    pub n_batches: usize,
    /// Configurations drawn per batch (B).
    pub batch_size: usize,
    /// Recovery iterations; zero still runs a single pass.
    pub score_iters: usize,
    pub n_roots: usize,
    pub seed: u64,
    pub batch: BatchOptions,
    /// Extra draws from the current ground state added before batching in
    /// iterations after the first; `None` means a tenth of the raw sample
    /// count.
    pub n_aug: Option<u64>,
    pub solver: SolverOptions,
}

impl Default for SqdOptions {
    fn default() -> Self {
        SqdOptions {
            n_batches: 10,
            batch_size: 1000,
            score_iters: 3,
            n_roots: 1,
            seed: 0,
            batch: BatchOptions::default(),
            n_aug: None,
            solver: SolverOptions::default(),
        }
    }
}

/// One recovery iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub recovered_total: u64,
    pub recovered_distinct: usize,
    pub augmented: u64,
    pub batch_dimensions: Vec<usize>,
    pub batch_ground_energies: Vec<f64>,
    pub best_batch: usize,
    pub best_energies: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqdDiagnostics {
    /// In-sector fraction of the raw samples.
    pub raw_in_sector_fraction: f64,
    pub iterations: Vec<IterationTrace>,
    /// Every root of the returned state converged.
    pub converged: bool,
}

fn iteration_seed(seed: u64, iteration: usize) -> u64 {
    seed.wrapping_add((iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Sample-based diagonalization with self-consistent configuration
/// recovery. Each iteration repairs the raw samples with the current
/// occupancy model, draws `K` batches, diagonalizes them in parallel and
/// keeps the batch with the lowest ground energy (first on ties); its
/// ground state then updates the model.
pub fn run_sqd(
    h: &Hamiltonian,
    samples: &SampleSet,
    sector: Sector,
    opts: &SqdOptions,
) -> Result<(CIState, SqdDiagnostics)> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    if samples.n_orb() != sector.n_orb || h.n_orb() != sector.n_orb {
        return Err(Error::InvalidInput("samples, Hamiltonian and sector disagree on M".into()));
    }
    if opts.n_batches == 0 {
        return Err(Error::InvalidInput("at least one batch is required".into()));
    }
    let mut model = RecoveryModel::from_samples(samples, &sector);
    let mut best: Option<(CIState, bool)> = None;
    let mut traces = Vec::new();
    for it in 0..opts.score_iters.max(1) {
        let seed = iteration_seed(opts.seed, it);
        let mut recovered = recover_configurations(samples, &model, &sector, seed)?;
        let mut augmented = 0;
        if let Some((state, _)) = &best {
            let n = opts.n_aug.unwrap_or(samples.total() / 10);
            if n > 0 {
                let ground = state.ground();
                let extra = sample_state(&ground.normalized()?, n, 0.0, seed)?;
                recovered = recovered.merged(&extra);
                augmented = n;
            }
        }
        let batches = make_batches(&recovered, &sector, opts.n_batches, opts.batch_size, seed, &opts.batch)?;
        let results: Vec<(CIState, bool)> = batches
            .into_par_iter()
            .map(|b| diagonalize(h, b, sector, opts.n_roots, Method::Sqd, &opts.solver))
            .collect::<Result<_>>()?;
        let mut pick = 0;
        for (k, (st, _)) in results.iter().enumerate() {
            if st.energies[0] < results[pick].0.energies[0] {
                pick = k;
            }
        }
        traces.push(IterationTrace {
            iteration: it,
            recovered_total: recovered.total(),
            recovered_distinct: recovered.distinct(),
            augmented,
            batch_dimensions: results.iter().map(|(s, _)| s.dimension()).collect(),
            batch_ground_energies: results.iter().map(|(s, _)| s.energies[0]).collect(),
            best_batch: pick,
            best_energies: results[pick].0.energies.clone(),
            converged: results.iter().all(|(_, c)| *c),
        });
        let chosen = results.into_iter().nth(pick).expect("pick is in range");
        model = update_model(&chosen.0.ground());
        best = Some(chosen);
    }
    let (state, converged) = best.expect("at least one iteration ran");
    Ok((
        state,
        SqdDiagnostics {
            raw_in_sector_fraction: samples.in_sector_fraction(&sector),
            iterations: traces,
            converged,
        },
    ))
}
