use std::collections::HashSet;
use std::fmt::Write as _;

use super::{eri_index, pair_index, Hamiltonian};
use crate::config::Sector;
use crate::error::{Error, Result};

/// Summary of an FCIDUMP parse.
#[derive(Debug, Clone, PartialEq)]
pub struct FcidumpReport {
    /// Sector implied by `NELEC` and `MS2`.
    pub sector: Sector,
    pub records: usize,
    /// Records that overwrote an earlier value for the same symmetry slot.
    pub duplicates: usize,
    /// Orbital-energy records (`i 0 0 0`), accepted and ignored.
    pub orbital_energies: usize,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Fcidump {
        line,
        msg: msg.into(),
    }
}

fn header_values(header: &str) -> Vec<(String, String)> {
    let cleaned = header
        .replace("&FCI", " ")
        .replace("&fci", " ")
        .replace("&END", " ")
        .replace("&end", " ")
        .replace('/', " ")
        .replace(',', " ")
        .replace('=', " = ");
    let toks: Vec<&str> = cleaned.split_whitespace().collect();
    let mut out = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if *t == "=" && i > 0 && i + 1 < toks.len() {
            out.push((toks[i - 1].to_ascii_uppercase(), toks[i + 1].to_string()));
        }
    }
    out
}

/// Parses a Molpro-convention FCIDUMP.
///
/// Records `(ij|kl)` with 1-based indices map to `(pr|qs)`; `k = l = 0`
/// records are one-electron integrals and the all-zero record is the core
/// energy. Missing symmetry partners are filled in; a repeated slot keeps the
/// last value and is counted in [`FcidumpReport::duplicates`].
pub fn parse_fcidump(text: &str) -> Result<(Hamiltonian, FcidumpReport)> {
    let lines: Vec<&str> = text.lines().collect();
    let end = lines
        .iter()
        .position(|l| {
            let t = l.trim();
            t.eq_ignore_ascii_case("&END") || t == "/" || t.ends_with("&END") || t.ends_with('/')
        })
        .ok_or_else(|| perr(1, "header is not terminated by '/' or '&END'"))?;
    let header = lines[..=end].join(" ");
    if !header.to_ascii_uppercase().contains("&FCI") {
        return Err(perr(1, "missing &FCI namelist"));
    }
    let values = header_values(&header);
    let get = |key: &str| -> Result<i64> {
        let v = values
            .iter()
            .find(|(k, _)| k == key)
            .ok_or_else(|| perr(1, format!("missing {key} in header")))?;
        v.1.parse::<i64>()
            .map_err(|_| perr(1, format!("{key} value {:?} is not an integer", v.1)))
    };
    let norb = get("NORB")?;
    let nelec = get("NELEC")?;
    let ms2 = values
        .iter()
        .find(|(k, _)| k == "MS2")
        .map(|(_, v)| v.parse::<i64>())
        .transpose()
        .map_err(|_| perr(1, "MS2 is not an integer"))?
        .unwrap_or(0);
    if norb <= 0 || nelec < 0 {
        return Err(perr(1, "NORB must be positive and NELEC non-negative"));
    }
    if (nelec + ms2).rem_euclid(2) != 0 || ms2.abs() > nelec {
        return Err(perr(1, format!("inconsistent NELEC={nelec} and MS2={ms2}")));
    }
    let m = norb as usize;
    let sector = Sector::new(m, ((nelec + ms2) / 2) as usize, ((nelec - ms2) / 2) as usize)
        .map_err(|e| perr(1, e.to_string()))?;

    let mut ham = Hamiltonian::zeros(m);
    let mut seen_eri = HashSet::new();
    let mut seen_h = HashSet::new();
    let mut seen_e0 = false;
    let mut report = FcidumpReport {
        sector,
        records: 0,
        duplicates: 0,
        orbital_energies: 0,
    };
    for (ln, line) in lines.iter().enumerate().skip(end + 1) {
        let lineno = ln + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(perr(lineno, format!("expected 5 fields, found {}", toks.len())));
        }
        let value: f64 = toks[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| perr(lineno, format!("non-numeric value {:?}", toks[0])))?;
        if !value.is_finite() {
            return Err(perr(lineno, "non-finite value"));
        }
        let mut idx = [0usize; 4];
        for (k, t) in toks[1..].iter().enumerate() {
            let v: usize = t
                .parse()
                .map_err(|_| perr(lineno, format!("bad index {t:?}")))?;
            if v > m {
                return Err(perr(lineno, format!("index {v} exceeds NORB={m}")));
            }
            idx[k] = v;
        }
        report.records += 1;
        let [i, j, k, l] = idx;
        match (i, j, k, l) {
            (0, 0, 0, 0) => {
                if seen_e0 {
                    report.duplicates += 1;
                }
                seen_e0 = true;
                ham.set_e0(value);
            }
            (i, 0, 0, 0) if i > 0 => report.orbital_energies += 1,
            (i, j, 0, 0) if i > 0 && j > 0 => {
                if !seen_h.insert(pair_index(i - 1, j - 1)) {
                    report.duplicates += 1;
                }
                ham.set_one_body(i - 1, j - 1, value);
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                if !seen_eri.insert(eri_index(i - 1, j - 1, k - 1, l - 1)) {
                    report.duplicates += 1;
                }
                ham.set_eri(i - 1, j - 1, k - 1, l - 1, value);
            }
            _ => {
                return Err(perr(
                    lineno,
                    format!("index pattern {i} {j} {k} {l} is not a valid record"),
                ))
            }
        }
    }
    Ok((ham, report))
}

/// Writes an FCIDUMP with 17 significant digits, so that
/// [`parse_fcidump`] reproduces every value bit for bit.
pub fn write_fcidump(ham: &Hamiltonian, sector: &Sector) -> String {
    let m = ham.n_orb();
    let mut out = String::new();
    let nelec = sector.n_alpha + sector.n_beta;
    let ms2 = sector.n_alpha as i64 - sector.n_beta as i64;
    writeln!(out, " &FCI NORB={m},NELEC={nelec},MS2={ms2},").unwrap();
    let orbsym = vec!["1"; m].join(",");
    writeln!(out, "  ORBSYM={orbsym},").unwrap();
    writeln!(out, "  ISYM=1,").unwrap();
    writeln!(out, " &END").unwrap();
    for ((p, r, q, s), v) in ham.unique_eri() {
        if v != 0.0 {
            writeln!(out, "{v:.16e} {} {} {} {}", p + 1, r + 1, q + 1, s + 1).unwrap();
        }
    }
    for p in 0..m {
        for r in 0..=p {
            let v = ham.one_body(p, r);
            if v != 0.0 {
                writeln!(out, "{v:.16e} {} {} 0 0", p + 1, r + 1).unwrap();
            }
        }
    }
    writeln!(out, "{:.16e} 0 0 0 0", ham.e0()).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Configuration;
    use crate::hamiltonian::{diagonal_element, random_hamiltonian};

    const ONE_ORBITAL: &str = " &FCI NORB=1,NELEC=2,MS2=0,\n  ORBSYM=1,\n  ISYM=1,\n &END\n 2.0 1 1 1 1\n -1.0 1 1 0 0\n 0.5 0 0 0 0\n";

    #[test]
    fn one_orbital_dump_diagonal() {
        let (h, rep) = parse_fcidump(ONE_ORBITAL).unwrap();
        assert_eq!(rep.sector, Sector::new(1, 1, 1).unwrap());
        let d = Configuration::from_occupations(1, [0], [0]);
        // 0.5 + 2*(-1.0) + 2.0
        assert_eq!(diagonal_element(&h, &d), 0.5);
    }

    #[test]
    fn symmetry_completion_from_single_record() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0\n/\n0.25 1 2 1 1\n";
        let (h, _) = parse_fcidump(text).unwrap();
        for (p, r, q, s) in [(0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)] {
            assert_eq!(h.eri(p, r, q, s), 0.25);
        }
    }

    #[test]
    fn sector_hint_from_header() {
        let text = "&FCI NORB=8,NELEC=10,MS2=0,\n&END\n";
        assert_eq!(parse_fcidump(text).unwrap().1.sector, Sector::new(8, 5, 5).unwrap());
        let text = "&FCI NORB = 4, NELEC = 3, MS2 = 1\n&END\n";
        assert_eq!(parse_fcidump(text).unwrap().1.sector, Sector::new(4, 2, 1).unwrap());
    }

    #[test]
    fn error_paths() {
        assert!(parse_fcidump("NORB=2\n1.0 1 1 0 0\n").is_err());
        assert!(parse_fcidump("&FCI NELEC=2\n&END\n").is_err());
        assert!(parse_fcidump("&FCI NORB=2,NELEC=3,MS2=0\n&END\n").is_err());
        assert!(parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0\n&END\n1.0 3 1 0 0\n").is_err());
        assert!(parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0\n&END\nabc 1 1 0 0\n").is_err());
        assert!(parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0\n&END\n1.0 1 1 0\n").is_err());
        assert!(parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0\n&END\n1.0 1 0 1 0\n").is_err());
    }

    #[test]
    fn duplicates_last_wins() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0\n&END\n1.0 1 2 0 0\n3.0 2 1 0 0\n0.5 1 2 1 2\n0.7 2 1 2 1\n";
        let (h, rep) = parse_fcidump(text).unwrap();
        assert_eq!(rep.duplicates, 2);
        assert_eq!(h.one_body(0, 1), 3.0);
        assert_eq!(h.eri(0, 1, 0, 1), 0.7);
    }

    #[test]
    fn fortran_exponents_and_orbital_energies() {
        let text = "&FCI NORB=1,NELEC=2,MS2=0\n&END\n1.5D-01 1 1 1 1\n-0.3 1 0 0 0\n";
        let (h, rep) = parse_fcidump(text).unwrap();
        assert_eq!(h.eri(0, 0, 0, 0), 0.15);
        assert_eq!(rep.orbital_energies, 1);
    }

    #[test]
    fn write_parse_round_trip_is_bit_exact() {
        for seed in 0..4 {
            let h = random_hamiltonian(4, seed);
            let s = Sector::new(4, 2, 1).unwrap();
            let (back, rep) = parse_fcidump(&write_fcidump(&h, &s)).unwrap();
            assert_eq!(rep.sector, s);
            assert_eq!(back, h);
        }
    }
}
