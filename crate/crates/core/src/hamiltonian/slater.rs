//! Slater-Condon rules in the Jordan-Wigner sign convention of
//! [`crate::config`].

use super::Hamiltonian;
use crate::config::{BitMask, Configuration, Spin};
use crate::error::{Error, Result};

#[inline]
fn sign_of(parity: usize) -> f64 {
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of `a†_a a_i` acting within one spin mask.
#[inline]
fn single_sign(mask: &BitMask, i: usize, a: usize) -> f64 {
    sign_of(mask.count_between(i, a))
}

/// Sign of `a†_a a†_b a_j a_i` within one spin mask, `i < j`, `a < b`.
#[inline]
fn same_spin_double_sign(mask: &BitMask, i: usize, j: usize, a: usize, b: usize) -> f64 {
    let lt = |x: usize, y: usize| usize::from(x < y);
    let parity = mask.count_below(i)
        + (mask.count_below(j) - lt(i, j))
        + (mask.count_below(b) - lt(i, b) - lt(j, b))
        + (mask.count_below(a) - lt(i, a) - lt(j, a));
    sign_of(parity)
}

/// `<y|H|y>`.
pub fn diagonal_element(h: &Hamiltonian, y: &Configuration) -> f64 {
    let occ_a = y.alpha.to_vec();
    let occ_b = y.beta.to_vec();
    diagonal_with(h, &occ_a, &occ_b)
}

fn diagonal_with(h: &Hamiltonian, occ_a: &[usize], occ_b: &[usize]) -> f64 {
    let mut e = h.e0();
    for occ in [occ_a, occ_b] {
        for &p in occ {
            e += h.one_body(p, p);
            for &q in occ {
                e += 0.5 * (h.coulomb(p, q) - h.exchange(p, q));
            }
        }
    }
    for &p in occ_a {
        for &q in occ_b {
            e += h.coulomb(p, q);
        }
    }
    e
}

/// Unsigned value of `a†_a a_i` (spin `spin`) acting on a determinant with
/// the given occupations.
#[inline]
fn single_value(
    h: &Hamiltonian,
    same: &[usize],
    other: &[usize],
    i: usize,
    a: usize,
) -> f64 {
    let mut v = h.one_body(a, i);
    for &q in same {
        v += h.eri(a, i, q, q) - h.eri(a, q, q, i);
    }
    for &q in other {
        v += h.eri(a, i, q, q);
    }
    v
}

/// `<x|H|y>` for two determinants of the same sector.
pub fn matrix_element(h: &Hamiltonian, x: &Configuration, y: &Configuration) -> Result<f64> {
    if x.hamming_weights() != y.hamming_weights() {
        return Err(Error::SectorMismatch(format!(
            "<x|H|y> between weights {:?} and {:?}",
            x.hamming_weights(),
            y.hamming_weights()
        )));
    }
    let da = x.alpha.hamming_distance(&y.alpha) / 2;
    let db = x.beta.hamming_distance(&y.beta) / 2;
    Ok(match (da, db) {
        (0, 0) => diagonal_element(h, y),
        (1, 0) | (0, 1) => {
            let spin = if da == 1 { Spin::Alpha } else { Spin::Beta };
            let (ym, xm) = (y.mask(spin), x.mask(spin));
            let i = ym.difference(xm).to_vec()[0];
            let a = xm.difference(ym).to_vec()[0];
            let same = ym.to_vec();
            let other = y.mask(spin.flipped()).to_vec();
            single_sign(ym, i, a) * single_value(h, &same, &other, i, a)
        }
        (2, 0) | (0, 2) => {
            let spin = if da == 2 { Spin::Alpha } else { Spin::Beta };
            let (ym, xm) = (y.mask(spin), x.mask(spin));
            let holes = ym.difference(xm).to_vec();
            let parts = xm.difference(ym).to_vec();
            let (i, j, a, b) = (holes[0], holes[1], parts[0], parts[1]);
            same_spin_double_sign(ym, i, j, a, b) * (h.eri(a, i, b, j) - h.eri(a, j, b, i))
        }
        (1, 1) => {
            let i = y.alpha.difference(&x.alpha).to_vec()[0];
            let a = x.alpha.difference(&y.alpha).to_vec()[0];
            let j = y.beta.difference(&x.beta).to_vec()[0];
            let b = x.beta.difference(&y.beta).to_vec()[0];
            single_sign(&y.alpha, i, a) * single_sign(&y.beta, j, b) * h.eri(a, i, b, j)
        }
        _ => 0.0,
    })
}

/// Calls `f(z, <z|H|y>)` for `y` itself and every single and double
/// excitation of `y` with a nonzero matrix element. Each `z` is visited once.
pub fn for_each_connected<F: FnMut(Configuration, f64)>(h: &Hamiltonian, y: &Configuration, mut f: F) {
    let m = h.n_orb();
    let occ = [y.alpha.to_vec(), y.beta.to_vec()];
    let virt: [Vec<usize>; 2] = [
        (0..m).filter(|&p| !y.alpha.get(p)).collect(),
        (0..m).filter(|&p| !y.beta.get(p)).collect(),
    ];
    f(y.clone(), diagonal_with(h, &occ[0], &occ[1]));

    for (s, spin) in Spin::BOTH.into_iter().enumerate() {
        let mask = y.mask(spin);
        let (same, other) = (&occ[s], &occ[1 - s]);
        for &i in same {
            for &a in &virt[s] {
                let v = single_value(h, same, other, i, a);
                if v != 0.0 {
                    let mut z = y.clone();
                    let zm = z.mask_mut(spin);
                    zm.clear(i);
                    zm.set(a);
                    f(z, single_sign(mask, i, a) * v);
                }
            }
        }
        for (x, &i) in same.iter().enumerate() {
            for &j in &same[x + 1..] {
                for (w, &a) in virt[s].iter().enumerate() {
                    for &b in &virt[s][w + 1..] {
                        let v = h.eri(a, i, b, j) - h.eri(a, j, b, i);
                        if v != 0.0 {
                            let mut z = y.clone();
                            let zm = z.mask_mut(spin);
                            zm.clear(i);
                            zm.clear(j);
                            zm.set(a);
                            zm.set(b);
                            f(z, same_spin_double_sign(mask, i, j, a, b) * v);
                        }
                    }
                }
            }
        }
    }

    for &i in &occ[0] {
        for &a in &virt[0] {
            let sa = single_sign(&y.alpha, i, a);
            for &j in &occ[1] {
                for &b in &virt[1] {
                    let v = h.eri(a, i, b, j);
                    if v != 0.0 {
                        let mut z = y.clone();
                        z.alpha.clear(i);
                        z.alpha.set(a);
                        z.beta.clear(j);
                        z.beta.set(b);
                        f(z, sa * single_sign(&y.beta, j, b) * v);
                    }
                }
            }
        }
    }
}

/// Every `(z, <z|H|y>)` with a nonzero element, `y` first.
pub fn connected_configurations(h: &Hamiltonian, y: &Configuration) -> Vec<(Configuration, f64)> {
    let mut out = Vec::new();
    for_each_connected(h, y, |z, v| out.push((z, v)));
    out
}
