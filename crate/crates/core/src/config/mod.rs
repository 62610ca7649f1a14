//! Fermionic configuration algebra.
//!
//! A [`Configuration`] is a Slater determinant stored as a pair of occupation
//! bitmasks. Spin-orbital `(p, alpha)` has global index `p` and `(p, beta)`
//! has global index `M + p`; the Jordan-Wigner sign of a ladder operator is
//! the parity of occupied spin-orbitals with a strictly lower global index.

mod basis;
mod bitmask;
mod excitation;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use basis::{enumerate_sector, spin_inversion_closure, SubspaceBasis, DEFAULT_ENUMERATION_CAP};
pub use bitmask::BitMask;
pub use excitation::{apply_excitation, apply_ladder, ExcitationOperator, FermionTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Alpha,
    Beta,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Alpha, Spin::Beta];

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Alpha => Spin::Beta,
            Spin::Beta => Spin::Alpha,
        }
    }
}

/// A spatial orbital paired with a spin label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinOrbital {
    pub orbital: usize,
    pub spin: Spin,
}

impl SpinOrbital {
    pub fn new(orbital: usize, spin: Spin) -> Self {
        SpinOrbital { orbital, spin }
    }

    pub fn alpha(orbital: usize) -> Self {
        Self::new(orbital, Spin::Alpha)
    }

    pub fn beta(orbital: usize) -> Self {
        Self::new(orbital, Spin::Beta)
    }

    pub fn global_index(self, n_orb: usize) -> usize {
        match self.spin {
            Spin::Alpha => self.orbital,
            Spin::Beta => n_orb + self.orbital,
        }
    }
}

/// Particle-number sector: `M` spatial orbitals with `N_alpha` and `N_beta`
/// electrons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sector {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl Sector {
    pub fn new(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_alpha > n_orb || n_beta > n_orb {
            return Err(Error::InvalidInput(format!(
                "sector ({n_orb}, {n_alpha}, {n_beta}) has more electrons than orbitals"
            )));
        }
        Ok(Sector {
            n_orb,
            n_alpha,
            n_beta,
        })
    }

    pub fn electrons(&self, spin: Spin) -> usize {
        match spin {
            Spin::Alpha => self.n_alpha,
            Spin::Beta => self.n_beta,
        }
    }

    /// Number of determinants in the sector.
    pub fn dimension(&self) -> u128 {
        binomial(self.n_orb, self.n_alpha) * binomial(self.n_orb, self.n_beta)
    }

    /// Aufbau reference: the lowest `N_sigma` orbitals occupied in each spin.
    pub fn reference(&self) -> Configuration {
        Configuration::from_occupations(self.n_orb, 0..self.n_alpha, 0..self.n_beta)
    }

    pub fn is_balanced(&self) -> bool {
        self.n_alpha == self.n_beta
    }

    /// Sector reached after one `S+` application (one beta electron turned alpha).
    pub fn raised(&self) -> Option<Sector> {
        (self.n_beta > 0 && self.n_alpha < self.n_orb).then(|| Sector {
            n_orb: self.n_orb,
            n_alpha: self.n_alpha + 1,
            n_beta: self.n_beta - 1,
        })
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}e,{}o; {}a {}b)",
            self.n_alpha + self.n_beta,
            self.n_orb,
            self.n_alpha,
            self.n_beta
        )
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Slater determinant as a pair of occupation bitmasks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub alpha: BitMask,
    pub beta: BitMask,
}

impl Configuration {
    pub fn new(alpha: BitMask, beta: BitMask) -> Self {
        debug_assert_eq!(alpha.words().len(), beta.words().len());
        Configuration { alpha, beta }
    }

    pub fn vacuum(n_orb: usize) -> Self {
        Self::new(BitMask::zeros(n_orb), BitMask::zeros(n_orb))
    }

    pub fn from_occupations<A, B>(n_orb: usize, alpha: A, beta: B) -> Self
    where
        A: IntoIterator<Item = usize>,
        B: IntoIterator<Item = usize>,
    {
        Self::new(
            BitMask::from_orbitals(n_orb, alpha),
            BitMask::from_orbitals(n_orb, beta),
        )
    }

    /// Parses per-spin occupation strings such as `("110", "000")`, character
    /// `p` describing orbital `p`.
    pub fn from_spin_strings(alpha: &str, beta: &str) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::InvalidInput("alpha/beta strings differ in length".into()));
        }
        let n_orb = alpha.len();
        let parse = |s: &str| -> Result<BitMask> {
            let mut m = BitMask::zeros(n_orb);
            for (p, ch) in s.chars().enumerate() {
                match ch {
                    '1' => m.set(p),
                    '0' => {}
                    _ => return Err(Error::InvalidInput(format!("non-binary character {ch:?}"))),
                }
            }
            Ok(m)
        };
        Ok(Self::new(parse(alpha)?, parse(beta)?))
    }

    /// Parses the `2M`-character text form: index `p < M` is `(p, alpha)`,
    /// index `M + p` is `(p, beta)`.
    pub fn from_bitstring(s: &str, n_orb: usize) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 * n_orb {
            return Err(Error::InvalidInput(format!(
                "bitstring has length {}, expected {}",
                bytes.len(),
                2 * n_orb
            )));
        }
        let mut c = Self::vacuum(n_orb);
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'1' if i < n_orb => c.alpha.set(i),
                b'1' => c.beta.set(i - n_orb),
                b'0' => {}
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "non-binary character {:?} in bitstring",
                        b as char
                    )))
                }
            }
        }
        Ok(c)
    }

    pub fn to_bitstring(&self, n_orb: usize) -> String {
        let mut s = String::with_capacity(2 * n_orb);
        for mask in [&self.alpha, &self.beta] {
            for p in 0..n_orb {
                s.push(if mask.get(p) { '1' } else { '0' });
            }
        }
        s
    }

    pub fn mask(&self, spin: Spin) -> &BitMask {
        match spin {
            Spin::Alpha => &self.alpha,
            Spin::Beta => &self.beta,
        }
    }

    pub fn mask_mut(&mut self, spin: Spin) -> &mut BitMask {
        match spin {
            Spin::Alpha => &mut self.alpha,
            Spin::Beta => &mut self.beta,
        }
    }

    #[inline]
    pub fn is_occupied(&self, so: SpinOrbital) -> bool {
        self.mask(so.spin).get(so.orbital)
    }

    /// Popcounts `(N_alpha, N_beta)` of the two masks.
    pub fn hamming_weights(&self) -> (usize, usize) {
        (self.alpha.count_ones(), self.beta.count_ones())
    }

    pub fn in_sector(&self, s: &Sector) -> bool {
        self.alpha.capacity() >= s.n_orb && self.hamming_weights() == (s.n_alpha, s.n_beta)
    }

    /// Alpha and beta masks swapped.
    pub fn spin_flipped(&self) -> Configuration {
        Configuration::new(self.beta.clone(), self.alpha.clone())
    }

    /// Number of spin-orbitals that differ, halved (0 = same, 1 = single, ...).
    pub fn excitation_degree(&self, other: &Configuration) -> usize {
        (self.alpha.hamming_distance(&other.alpha) + self.beta.hamming_distance(&other.beta)) / 2
    }

    /// Occupied spin-orbitals with global index strictly below `so`.
    #[inline]
    pub fn parity_below(&self, so: SpinOrbital) -> usize {
        match so.spin {
            Spin::Alpha => self.alpha.count_below(so.orbital),
            Spin::Beta => self.alpha.count_ones() + self.beta.count_below(so.orbital),
        }
    }
}

impl Ord for Configuration {
    fn cmp(&self, other: &Self) -> Ordering {
        self.alpha
            .cmp(&other.alpha)
            .then_with(|| self.beta.cmp(&other.beta))
    }
}

impl PartialOrd for Configuration {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Config(a={:?}, b={:?})", self.alpha.to_vec(), self.beta.to_vec())
    }
}
