use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Hamiltonian;
use crate::error::{Error, Result};

/// One-dimensional Hubbard chain in the site basis: hopping `h_{p,p+1} = -t`
/// and on-site repulsion `(pp|pp) = U`.
pub fn hubbard_chain(sites: usize, t: f64, u: f64, periodic: bool) -> Result<Hamiltonian> {
    if sites == 0 {
        return Err(Error::InvalidInput("Hubbard chain needs at least one site".into()));
    }
    if sites == 1 && periodic {
        return Err(Error::InvalidInput(
            "a single-site chain cannot be periodic".into(),
        ));
    }
    let mut h = Hamiltonian::zeros(sites);
    for p in 0..sites - 1 {
        h.set_one_body(p, p + 1, -t);
    }
    if periodic && sites > 2 {
        h.set_one_body(sites - 1, 0, -t);
    }
    for p in 0..sites {
        h.set_eri(p, p, p, p, u);
    }
    Ok(h)
}

/// Dense random Hamiltonian with entries uniform in `[-1, 1]` (two-electron
/// values scaled by 1/2). Not physical; meant for exact-equivalence checks.
pub fn random_hamiltonian(n_orb: usize, seed: u64) -> Hamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = Hamiltonian::zeros(n_orb);
    h.set_e0(rng.gen_range(-1.0..1.0));
    for p in 0..n_orb {
        for r in 0..=p {
            h.set_one_body(p, r, rng.gen_range(-1.0..1.0));
        }
    }
    let slots: Vec<_> = h.unique_eri().map(|(k, _)| k).collect();
    for (p, r, q, s) in slots {
        h.set_eri(p, r, q, s, 0.5 * rng.gen_range(-1.0..1.0));
    }
    h
}
