//! Configuration samples: ingestion, simulated samplers, particle-number
//! statistics, self-consistent configuration recovery and batch formation.
//!
//! Every random operation takes an explicit seed and draws from a ChaCha
//! stream selected by `(seed, stream id)`, so results are independent of
//! thread scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{binomial, spin_inversion_closure, BitMask, Configuration, Sector, Spin, SubspaceBasis};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseState;

/// Smoothing added to every repair weight.
pub const REPAIR_SMOOTHING: f64 = 1e-6;

const STREAM_UNIFORM: u64 = 1;
const STREAM_STATE: u64 = 2;
const STREAM_RECOVERY: u64 = 3;
const STREAM_BATCH_BASE: u64 = 1 << 32;

/// ChaCha8 generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multiset of measured bitstrings over `2M` spin-orbitals. Keys may lie
/// outside the target particle-number sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    n_orb: usize,
    counts: BTreeMap<Configuration, u64>,
    total: u64,
}

impl SampleSet {
    pub fn new(n_orb: usize) -> Self {
        SampleSet {
            n_orb,
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn add(&mut self, c: Configuration, multiplicity: u64) {
        if multiplicity == 0 {
            return;
        }
        *self.counts.entry(c).or_insert(0) += multiplicity;
        self.total += multiplicity;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, c: &Configuration) -> u64 {
        self.counts.get(c).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, u64)> {
        self.counts.iter().map(|(c, &m)| (c, m))
    }

    /// Multiplicity-weighted fraction of samples inside `s`.
    pub fn in_sector_fraction(&self, s: &Sector) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let hits: u64 = self
            .iter()
            .filter(|(c, _)| c.in_sector(s))
            .map(|(_, m)| m)
            .sum();
        hits as f64 / self.total as f64
    }

    pub fn merged(&self, other: &SampleSet) -> SampleSet {
        let mut out = self.clone();
        for (c, m) in other.iter() {
            out.add(c.clone(), m);
        }
        out
    }
}

/// Parses a samples file: one `2M`-character bitstring per line, optionally
/// followed by a positive multiplicity.
pub fn read_samples(text: &str, n_orb: usize) -> Result<SampleSet> {
    let mut set = SampleSet::new(n_orb);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Samples { line: i + 1, msg };
        let mut fields = line.split_whitespace();
        let bits = fields.next().expect("line is not empty");
        let mult = match fields.next() {
            None => 1,
            Some(t) => {
                let m: i64 = t
                    .parse()
                    .map_err(|_| err(format!("multiplicity {t:?} is not an integer")))?;
                if m <= 0 {
                    return Err(err(format!("multiplicity {m} is not positive")));
                }
                m as u64
            }
        };
        if fields.next().is_some() {
            return Err(err("trailing fields".into()));
        }
        let c = Configuration::from_bitstring(bits, n_orb).map_err(|e| err(e.to_string()))?;
        set.add(c, mult);
    }
    Ok(set)
}

/// Writes the aggregated `bitstring multiplicity` form read by
/// [`read_samples`].
pub fn write_samples(set: &SampleSet) -> String {
    let mut out = String::new();
    for (c, m) in set.iter() {
        writeln!(out, "{} {m}", c.to_bitstring(set.n_orb)).unwrap();
    }
    out
}

/// `n` draws uniform over the configurations of `s`.
pub fn sample_uniform_sector(s: &Sector, n: u64, seed: u64) -> SampleSet {
    let mut rng = stream_rng(seed, STREAM_UNIFORM);
    let mut set = SampleSet::new(s.n_orb);
    for _ in 0..n {
        let a = index::sample(&mut rng, s.n_orb, s.n_alpha);
        let b = index::sample(&mut rng, s.n_orb, s.n_beta);
        set.add(
            Configuration::from_occupations(s.n_orb, a.iter(), b.iter()),
            1,
        );
    }
    set
}

fn flip_bits<R: Rng>(c: &mut Configuration, n_orb: usize, rate: f64, rng: &mut R) {
    for spin in Spin::BOTH {
        for p in 0..n_orb {
            if rng.gen_bool(rate) {
                c.mask_mut(spin).flip(p);
            }
        }
    }
}

/// `n` draws from `|amplitude|^2` of `v`, then an independent bit flip with
/// probability `noise_rate` on each of the `2M` bits.
pub fn sample_state(v: &SparseState, n: u64, noise_rate: f64, seed: u64) -> Result<SampleSet> {
    v.check_normalized(1e-8)?;
    if !(0.0..=1.0).contains(&noise_rate) {
        return Err(Error::InvalidInput(format!("noise rate {noise_rate} outside [0, 1]")));
    }
    let entries: Vec<(&Configuration, f64)> = v.iter().collect();
    let dist = WeightedIndex::new(entries.iter().map(|(_, a)| a * a))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = stream_rng(seed, STREAM_STATE);
    let m = v.n_orb();
    let mut set = SampleSet::new(m);
    for _ in 0..n {
        let mut c = entries[dist.sample(&mut rng)].0.clone();
        if noise_rate > 0.0 {
            flip_bits(&mut c, m, noise_rate, &mut rng);
        }
        set.add(c, 1);
    }
    Ok(set)
}

/// Sector-membership statistics of a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParticleStats {
    /// Fraction of samples with the right `(N_alpha, N_beta)`.
    pub p_hw: f64,
    /// Wilson 95% interval for `p_hw`.
    pub ci95: (f64, f64),
    /// Same fraction for uniformly random `2M`-bit strings.
    pub p_unif: f64,
    pub total: u64,
}

/// `C(M, N_alpha) C(M, N_beta) / 2^(2M)`.
pub fn uniform_sector_probability(s: &Sector) -> f64 {
    let count = binomial(s.n_orb, s.n_alpha) as f64 * binomial(s.n_orb, s.n_beta) as f64;
    count * 2f64.powi(-2 * s.n_orb as i32)
}

fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn particle_number_stats(set: &SampleSet, s: &Sector) -> Result<ParticleStats> {
    if set.is_empty() {
        return Err(Error::InvalidInput("empty sample set".into()));
    }
    let hits: u64 = set
        .iter()
        .filter(|(c, _)| c.in_sector(s))
        .map(|(_, m)| m)
        .sum();
    Ok(ParticleStats {
        p_hw: hits as f64 / set.total() as f64,
        ci95: wilson_interval(hits, set.total(), 1.959_963_984_540_054),
        p_unif: uniform_sector_probability(s),
        total: set.total(),
    })
}

/// Mean orbital occupancies guiding the configuration repair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryModel {
    pub occ_alpha: Vec<f64>,
    pub occ_beta: Vec<f64>,
}

impl RecoveryModel {
    pub fn new(occ_alpha: Vec<f64>, occ_beta: Vec<f64>) -> Result<Self> {
        if occ_alpha.len() != occ_beta.len() {
            return Err(Error::InvalidInput("occupancy vectors differ in length".into()));
        }
        if occ_alpha
            .iter()
            .chain(occ_beta.iter())
            .any(|&x| !(-1e-12..=1.0 + 1e-12).contains(&x))
        {
            return Err(Error::InvalidInput("occupancies must lie in [0, 1]".into()));
        }
        Ok(RecoveryModel {
            occ_alpha,
            occ_beta,
        })
    }

    /// `N_sigma / M` on every orbital.
    pub fn uniform(s: &Sector) -> Self {
        let m = s.n_orb.max(1) as f64;
        RecoveryModel {
            occ_alpha: vec![s.n_alpha as f64 / m; s.n_orb],
            occ_beta: vec![s.n_beta as f64 / m; s.n_orb],
        }
    }

    /// Multiplicity-weighted mean occupancy of the in-sector samples, or
    /// [`RecoveryModel::uniform`] when none are in the sector.
    pub fn from_samples(set: &SampleSet, s: &Sector) -> Self {
        let mut occ = [vec![0.0; s.n_orb], vec![0.0; s.n_orb]];
        let mut total = 0u64;
        for (c, m) in set.iter().filter(|(c, _)| c.in_sector(s)) {
            total += m;
            for (k, spin) in Spin::BOTH.into_iter().enumerate() {
                for p in c.mask(spin).iter_ones() {
                    occ[k][p] += m as f64;
                }
            }
        }
        if total == 0 {
            return Self::uniform(s);
        }
        let [a, b] = occ;
        RecoveryModel {
            occ_alpha: a.into_iter().map(|x| x / total as f64).collect(),
            occ_beta: b.into_iter().map(|x| x / total as f64).collect(),
        }
    }

    pub fn occupancies(&self, spin: Spin) -> &[f64] {
        match spin {
            Spin::Alpha => &self.occ_alpha,
            Spin::Beta => &self.occ_beta,
        }
    }
}

/// Occupancies `sum_x |c_x|^2 x_{p sigma}` of a (normalized) ground state.
pub fn update_model(state: &SparseState) -> RecoveryModel {
    let (a, b) = state.occupations();
    RecoveryModel {
        occ_alpha: a.into_iter().map(|x| x.clamp(0.0, 1.0)).collect(),
        occ_beta: b.into_iter().map(|x| x.clamp(0.0, 1.0)).collect(),
    }
}

fn draw_weighted<R: Rng>(candidates: &[usize], weight: impl Fn(usize) -> f64, rng: &mut R) -> usize {
    let total: f64 = candidates.iter().map(|&p| weight(p)).sum();
    let mut r = rng.gen::<f64>() * total;
    for &p in candidates {
        r -= weight(p);
        if r < 0.0 {
            return p;
        }
    }
    *candidates.last().expect("non-empty candidate list")
}

/// Moves one spin channel to weight `target`, clearing occupied orbital `p`
/// with weight `1 - occ[p] + delta` or filling empty orbital `p` with weight
/// `occ[p] + delta`, one bit at a time.
fn repair_mask<R: Rng>(mask: &mut BitMask, n_orb: usize, target: usize, occ: &[f64], rng: &mut R) {
    let mut w = mask.count_ones();
    while w > target {
        let occupied: Vec<usize> = mask.iter_ones().filter(|&p| p < n_orb).collect();
        let p = draw_weighted(&occupied, |p| 1.0 - occ[p] + REPAIR_SMOOTHING, rng);
        mask.clear(p);
        w -= 1;
    }
    while w < target {
        let empty: Vec<usize> = (0..n_orb).filter(|&p| !mask.get(p)).collect();
        let p = draw_weighted(&empty, |p| occ[p] + REPAIR_SMOOTHING, rng);
        mask.set(p);
        w += 1;
    }
}

/// Self-consistent configuration recovery: every out-of-sector sample is
/// repaired per spin channel, guided by `model`; in-sector samples pass
/// through unchanged. Each copy of a repeated sample is repaired
/// independently.
pub fn recover_configurations(
    set: &SampleSet,
    model: &RecoveryModel,
    s: &Sector,
    seed: u64,
) -> Result<SampleSet> {
    if model.occ_alpha.len() != s.n_orb || model.occ_beta.len() != s.n_orb {
        return Err(Error::InvalidInput("recovery model size differs from the sector".into()));
    }
    let mut rng = stream_rng(seed, STREAM_RECOVERY);
    let mut out = SampleSet::new(s.n_orb);
    for (c, m) in set.iter() {
        if c.in_sector(s) {
            out.add(c.clone(), m);
            continue;
        }
        for _ in 0..m {
            let mut z = c.clone();
            for spin in Spin::BOTH {
                repair_mask(
                    z.mask_mut(spin),
                    s.n_orb,
                    s.electrons(spin),
                    model.occupancies(spin),
                    &mut rng,
                );
            }
            debug_assert!(z.in_sector(s));
            out.add(z, 1);
        }
    }
    Ok(out)
}

/// How batch members are drawn from the recovered set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BatchWeighting {
    /// Probability proportional to multiplicity.
    Multiplicity,
    /// Uniform over distinct configurations.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchOptions {
    pub weighting: BatchWeighting,
    pub include_reference: bool,
    /// Applied only for sectors with `N_alpha == N_beta`.
    pub spin_closure: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            weighting: BatchWeighting::Multiplicity,
            include_reference: true,
            spin_closure: true,
        }
    }
}

/// `K` batches of `min(B, distinct)` configurations drawn without
/// replacement from an in-sector set, each with the aufbau reference added
/// and closed under spin inversion. Batch `k` uses stream `k` of `seed`.
pub fn make_batches(
    recovered: &SampleSet,
    s: &Sector,
    n_batches: usize,
    batch_size: usize,
    seed: u64,
    opts: &BatchOptions,
) -> Result<Vec<SubspaceBasis>> {
    if recovered.is_empty() {
        return Err(Error::InvalidInput("cannot form batches from an empty set".into()));
    }
    if batch_size == 0 {
        return Err(Error::InvalidInput("batch size must be at least 1".into()));
    }
    let members: Vec<(&Configuration, u64)> = recovered.iter().collect();
    if let Some((c, _)) = members.iter().find(|(c, _)| !c.in_sector(s)) {
        return Err(Error::SectorMismatch(format!("{c:?} is not in sector {s}")));
    }
    let n = members.len();
    (0..n_batches)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, STREAM_BATCH_BASE + k as u64);
            let picked: Vec<usize> = if batch_size >= n {
                (0..n).collect()
            } else {
                match opts.weighting {
                    BatchWeighting::Multiplicity => {
                        index::sample_weighted(&mut rng, n, |i| members[i].1 as f64, batch_size)
                            .map_err(|e| Error::InvalidInput(e.to_string()))?
                            .into_vec()
                    }
                    BatchWeighting::Uniform => index::sample(&mut rng, n, batch_size).into_vec(),
                }
            };
            let mut configs: Vec<Configuration> =
                picked.into_iter().map(|i| members[i].0.clone()).collect();
            if opts.include_reference {
                configs.push(s.reference());
            }
            if opts.spin_closure && s.is_balanced() {
                spin_inversion_closure(&configs)
            } else {
                Ok(SubspaceBasis::new(configs))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(bits: &str, m: usize) -> Configuration {
        Configuration::from_bitstring(bits, m).unwrap()
    }

    #[test]
    fn read_samples_examples() {
        let s = read_samples("1100\n1100\n0011", 2).unwrap();
        assert_eq!(s.count(&cfg("1100", 2)), 2);
        assert_eq!(s.count(&cfg("0011", 2)), 1);
        assert_eq!(s.total(), 3);
        let s = read_samples("1100 5\n", 2).unwrap();
        assert_eq!(s.count(&cfg("1100", 2)), 5);
        assert!(matches!(read_samples("110\n", 2), Err(Error::Samples { line: 1, .. })));
        assert!(read_samples("1100 0\n", 2).is_err());
        assert!(read_samples("1100 -3\n", 2).is_err());
        assert!(read_samples("11a0\n", 2).is_err());
    }

    #[test]
    fn samples_file_round_trip() {
        let s = sample_uniform_sector(&Sector::new(5, 2, 3).unwrap(), 200, 9);
        assert_eq!(read_samples(&write_samples(&s), 5).unwrap(), s);
    }

    #[test]
    fn uniform_sampler_frequencies() {
        let sec = Sector::new(2, 1, 1).unwrap();
        let s = sample_uniform_sector(&sec, 100_000, 42);
        assert_eq!(s.distinct(), 4);
        for (_, m) in s.iter() {
            let f = m as f64 / 1e5;
            assert!((f - 0.25).abs() < 0.01, "{f}");
        }
        let full = sample_uniform_sector(&Sector::new(4, 4, 4).unwrap(), 50, 1);
        assert_eq!(full.distinct(), 1);
        assert_eq!(sample_uniform_sector(&sec, 100, 7), sample_uniform_sector(&sec, 100, 7));
    }

    #[test]
    fn noiseless_state_sampler_repeats_determinant() {
        let sec = Sector::new(4, 2, 2).unwrap();
        let v = SparseState::single(sec, sec.reference()).unwrap();
        let s = sample_state(&v, 100, 0.0, 3).unwrap();
        assert_eq!(s.count(&sec.reference()), 100);
        let bad = v.scaled(2.0);
        assert!(matches!(sample_state(&bad, 10, 0.0, 3), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn half_noise_gives_uniform_sector_fraction() {
        let sec = Sector::new(3, 1, 1).unwrap();
        let v = SparseState::single(sec, sec.reference()).unwrap();
        let n = 40_000;
        let s = sample_state(&v, n, 0.5, 5).unwrap();
        let p = uniform_sector_probability(&sec);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((s.in_sector_fraction(&sec) - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn small_noise_fraction_bound() {
        let sec = Sector::new(6, 3, 3).unwrap();
        let v = SparseState::single(sec, sec.reference()).unwrap();
        let eps: f64 = 0.01;
        let s = sample_state(&v, 20_000, eps, 8).unwrap();
        let bound = (1.0 - eps).powi(12);
        // no-flip probability is a lower bound on the in-sector fraction (3 sigma slack)
        let sigma = (bound * (1.0 - bound) / 20_000.0).sqrt();
        assert!(s.in_sector_fraction(&sec) >= bound - 3.0 * sigma);
    }

    #[test]
    fn table_a1_uniform_probabilities() {
        let p = |m, n| uniform_sector_probability(&Sector::new(m, n, n).unwrap());
        assert_eq!(format!("{:.4}", p(16, 5)), "0.0044");
        assert_eq!(format!("{:.1e}", p(26, 5)), "9.6e-7");
        assert_eq!(format!("{:.5}", p(20, 15)), "0.00022");
        assert_eq!(p(2, 1), 0.25);
    }

    #[test]
    fn uniform_probability_matches_exhaustive_count() {
        for m in 1..=6usize {
            for na in 0..=m {
                for nb in 0..=m {
                    let s = Sector::new(m, na, nb).unwrap();
                    let amask = (1u32 << m) - 1;
                    let hits = (0u32..1 << (2 * m))
                        .filter(|x| (x & amask).count_ones() as usize == na && (x >> m).count_ones() as usize == nb)
                        .count() as u128;
                    assert_eq!(hits, s.dimension());
                    assert_eq!(uniform_sector_probability(&s), hits as f64 / (1u64 << (2 * m)) as f64);
                }
            }
        }
    }

    #[test]
    fn stats_and_wilson_interval() {
        let sec = Sector::new(2, 1, 1).unwrap();
        let s = read_samples("1010 3\n1100 1\n", 2).unwrap();
        let st = particle_number_stats(&s, &sec).unwrap();
        assert_eq!(st.p_hw, 0.75);
        assert!(st.ci95.0 < 0.75 && st.ci95.1 > 0.75);
        assert!(particle_number_stats(&SampleSet::new(2), &sec).is_err());
    }

    #[test]
    fn recovery_passes_in_sector_samples_through() {
        let sec = Sector::new(4, 2, 2).unwrap();
        let s = sample_uniform_sector(&sec, 300, 2);
        let r = recover_configurations(&s, &RecoveryModel::uniform(&sec), &sec, 1).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn recovery_always_lands_in_sector() {
        let sec = Sector::new(6, 3, 3).unwrap();
        let v = SparseState::single(sec, sec.reference()).unwrap();
        let noisy = sample_state(&v, 2000, 0.2, 4).unwrap();
        let r = recover_configurations(&noisy, &RecoveryModel::uniform(&sec), &sec, 4).unwrap();
        assert_eq!(r.total(), noisy.total());
        assert_eq!(r.in_sector_fraction(&sec), 1.0);
    }

    #[test]
    fn recovery_with_exact_model_restores_reference() {
        let sec = Sector::new(8, 4, 4).unwrap();
        let reference = sec.reference();
        let model = update_model(&SparseState::single(sec, reference.clone()).unwrap());
        let mut broken = reference.clone();
        broken.alpha.clear(2);
        let mut set = SampleSet::new(8);
        set.add(broken, 1000);
        let r = recover_configurations(&set, &model, &sec, 6).unwrap();
        let hits = r.count(&reference) as f64 / 1000.0;
        assert!(hits >= 1.0 - 8.0 * REPAIR_SMOOTHING - 1e-9);
    }

    #[test]
    fn model_from_symmetric_superposition() {
        let sec = Sector::new(2, 1, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = SparseState::from_entries(
            sec,
            [
                (Configuration::from_occupations(2, [0], [1]), h),
                (Configuration::from_occupations(2, [1], [0]), h),
            ],
        )
        .unwrap();
        let m = update_model(&v);
        for x in m.occ_alpha.iter().chain(m.occ_beta.iter()) {
            assert!((x - 0.5).abs() < 1e-12);
        }
        let sa: f64 = m.occ_alpha.iter().sum();
        assert!((sa - 1.0).abs() < 1e-10);
    }

    #[test]
    fn batches_contain_everything_when_large() {
        let sec = Sector::new(4, 2, 2).unwrap();
        let s = sample_uniform_sector(&sec, 30, 3);
        let b = make_batches(&s, &sec, 3, 1000, 1, &BatchOptions::default()).unwrap();
        let mut all: Vec<_> = s.iter().map(|(c, _)| c.clone()).collect();
        all.push(sec.reference());
        let expect = spin_inversion_closure(&all).unwrap();
        for batch in b {
            assert_eq!(batch, expect);
        }
    }

    #[test]
    fn single_reference_batch() {
        let sec = Sector::new(4, 2, 2).unwrap();
        let mut s = SampleSet::new(4);
        s.add(sec.reference(), 10);
        let b = make_batches(&s, &sec, 1, 1, 0, &BatchOptions::default()).unwrap();
        assert_eq!(b[0].configs(), &[sec.reference()]);
    }

    #[test]
    fn batch_size_bound_and_determinism() {
        let sec = Sector::new(6, 3, 3).unwrap();
        let s = sample_uniform_sector(&sec, 500, 3);
        for weighting in [BatchWeighting::Multiplicity, BatchWeighting::Uniform] {
            let opts = BatchOptions {
                weighting,
                ..Default::default()
            };
            let b1 = make_batches(&s, &sec, 5, 20, 11, &opts).unwrap();
            let b2 = make_batches(&s, &sec, 5, 20, 11, &opts).unwrap();
            assert_eq!(b1, b2);
            for b in &b1 {
                assert!(b.len() <= 2 * 20 + 2);
                assert!(b.contains(&sec.reference()));
                assert!(b.is_spin_closed());
            }
            assert_ne!(b1[0], b1[1]);
        }
        assert!(make_batches(&SampleSet::new(6), &sec, 1, 5, 0, &BatchOptions::default()).is_err());
        let mut bad = SampleSet::new(6);
        bad.add(Configuration::vacuum(6), 1);
        assert!(make_batches(&bad, &sec, 1, 5, 0, &BatchOptions::default()).is_err());
    }
}
