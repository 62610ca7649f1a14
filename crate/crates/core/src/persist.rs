//! Binary CI-state files.
//!
//! Layout, all integers and floats little-endian:
//!
//! | field | type |
//! |---|---|
//! | magic `EXTSQDST` | 8 bytes |
//! | format version | u32 |
//! | method | u8 |
//! | M, N_alpha, N_beta, n_roots, words per mask | 5 x u32 |
//! | basis size D | u64 |
//! | basis, alpha words then beta words per configuration | D x 2 x words x u64 |
//! | coefficients, column-major | D x n_roots x f64 |
//! | energies | n_roots x f64 |
//! | SHA-256 of everything above | 32 bytes |

use std::path::Path;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::config::{BitMask, Configuration, Sector, SubspaceBasis};
use crate::error::{Error, Result};
use crate::pipelines::{CIState, Method};

pub const MAGIC: &[u8; 8] = b"EXTSQDST";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 1 + 5 * 4 + 8;
const DIGEST_LEN: usize = 32;

fn method_code(m: Method) -> u8 {
    match m {
        Method::Fci => 0,
        Method::Sqd => 1,
        Method::ExtSqd => 2,
        Method::Qse => 3,
    }
}

fn method_from_code(c: u8) -> Result<Method> {
    Ok(match c {
        0 => Method::Fci,
        1 => Method::Sqd,
        2 => Method::ExtSqd,
        3 => Method::Qse,
        _ => return Err(Error::StateFile(format!("unknown method code {c}"))),
    })
}

pub fn encode_state(state: &CIState) -> Vec<u8> {
    let s = state.sector;
    let words = BitMask::words_for(s.n_orb);
    let d = state.dimension();
    let mut out = Vec::with_capacity(HEADER_LEN + d * 16 * words + 8 * d * state.n_roots() + DIGEST_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(method_code(state.method));
    for v in [s.n_orb, s.n_alpha, s.n_beta, state.n_roots(), words] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&(d as u64).to_le_bytes());
    for c in state.basis.iter() {
        for mask in [&c.alpha, &c.beta] {
            for k in 0..words {
                out.extend_from_slice(&mask.words().get(k).copied().unwrap_or(0).to_le_bytes());
            }
        }
    }
    for x in state.coefficients.iter() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for e in &state.energies {
        out.extend_from_slice(&e.to_le_bytes());
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| Error::StateFile("payload shorter than its header claims".into()))?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_state(bytes: &[u8]) -> Result<CIState> {
    if bytes.len() < HEADER_LEN + DIGEST_LEN {
        return Err(Error::StateFile("checksum mismatch: file is truncated".into()));
    }
    let (payload, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(payload).as_slice() != digest {
        return Err(Error::StateFile("checksum mismatch".into()));
    }
    let mut r = Reader { data: payload, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::StateFile("not a state file".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::StateFile(format!("format version {version}, expected {FORMAT_VERSION}")));
    }
    let method = method_from_code(r.take(1)?[0])?;
    let m = r.u32()? as usize;
    let na = r.u32()? as usize;
    let nb = r.u32()? as usize;
    let n_roots = r.u32()? as usize;
    let words = r.u32()? as usize;
    if words != BitMask::words_for(m) {
        return Err(Error::StateFile(format!("{words} words per mask for M = {m}")));
    }
    let sector = Sector::new(m, na, nb).map_err(|e| Error::StateFile(e.to_string()))?;
    let d = usize::try_from(r.u64()?).map_err(|_| Error::StateFile("basis size overflows".into()))?;
    let expected = d
        .checked_mul(16 * words + 8 * n_roots)
        .and_then(|x| x.checked_add(8 * n_roots))
        .ok_or_else(|| Error::StateFile("basis size overflows".into()))?;
    if payload.len() - HEADER_LEN != expected {
        return Err(Error::StateFile("payload size does not match the header".into()));
    }
    let mut configs = Vec::with_capacity(d);
    for _ in 0..d {
        let mut masks = [Vec::with_capacity(words), Vec::with_capacity(words)];
        for mask in &mut masks {
            for _ in 0..words {
                mask.push(r.u64()?);
            }
        }
        let [a, b] = masks;
        configs.push(Configuration::new(BitMask::from_words(&a), BitMask::from_words(&b)));
    }
    let basis = SubspaceBasis::from_sorted(configs).map_err(|e| Error::StateFile(e.to_string()))?;
    let mut coeffs = Vec::with_capacity(d * n_roots);
    for _ in 0..d * n_roots {
        coeffs.push(r.f64()?);
    }
    let energies = (0..n_roots).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    CIState::new(sector, basis, DMatrix::from_vec(d, n_roots, coeffs), energies, method)
        .map_err(|e| Error::StateFile(e.to_string()))
}

pub fn persist_state(path: impl AsRef<Path>, state: &CIState) -> Result<()> {
    std::fs::write(path, encode_state(state))?;
    Ok(())
}

pub fn load_state(path: impl AsRef<Path>) -> Result<CIState> {
    decode_state(&std::fs::read(path)?)
}
