//! Run configuration: INI file plus `--key value` overrides.
//!
//! Keys inside a `[section]` are addressed as `section.key`; keys before the
//! first section are used as written. Orbital groups are declared as
//! `group.<name> = 0, 1, 2`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;
use crate::Command;

const HAMILTONIAN_KEYS: &[&str] = &[
    "fcidump",
    "model",
    "model.sites",
    "model.t",
    "model.u",
    "model.periodic",
    "model.orbitals",
    "model.seed",
    "n_alpha",
    "n_beta",
];
const SOLVER_KEYS: &[&str] = &["n_roots", "cap", "explicit_threshold", "davidson.tol", "davidson.max_iter", "tables"];
const SAMPLER_KEYS: &[&str] = &["seed", "samples", "sampler", "sampler.shots", "sampler.noise"];
const SQD_KEYS: &[&str] = &[
    "sqd.batches",
    "sqd.batch_size",
    "sqd.score_iters",
    "sqd.n_aug",
    "sqd.weighting",
    "sqd.include_reference",
    "sqd.spin_closure",
];
const EXT_KEYS: &[&str] = &["state_in", "generators.ranks", "generators.window", "ext.threshold", "ext.chunk", "ext.spin_closure"];
const FIT_KEYS: &[&str] = &["fit.curve", "fit.morse_window", "fit.tail_window", "fit.mu", "tables"];

fn allowed(cmd: Command) -> Vec<&'static str> {
    let mut keys: Vec<&str> = Vec::new();
    match cmd {
        Command::Fci => {
            keys.extend(HAMILTONIAN_KEYS);
            keys.extend(SOLVER_KEYS);
            keys.push("state_out");
        }
        Command::Sqd => {
            keys.extend(HAMILTONIAN_KEYS);
            keys.extend(SOLVER_KEYS);
            keys.extend(SAMPLER_KEYS);
            keys.extend(SQD_KEYS);
            keys.push("state_out");
        }
        Command::ExtSqd | Command::Qse => {
            keys.extend(HAMILTONIAN_KEYS);
            keys.extend(SOLVER_KEYS);
            keys.extend(SAMPLER_KEYS);
            keys.extend(SQD_KEYS);
            keys.extend(EXT_KEYS);
            keys.push("state_out");
            if cmd == Command::Qse {
                keys.push("qse.tau");
            }
        }
        Command::Sample => {
            keys.extend(HAMILTONIAN_KEYS);
            keys.extend(SAMPLER_KEYS);
            keys.extend(["sample.out", "cap", "davidson.tol", "davidson.max_iter"]);
        }
        Command::Observables => keys.extend(["state_in", "tables"]),
        Command::Fit => keys.extend(FIT_KEYS),
        Command::Model => {
            keys.extend(HAMILTONIAN_KEYS);
            keys.push("model.out");
        }
        Command::Stats => keys.extend(["samples", "n_orb", "n_alpha", "n_beta"]),
    }
    keys
}

fn takes_groups(cmd: Command) -> bool {
    !matches!(cmd, Command::Fit | Command::Model | Command::Stats | Command::Sample)
}

/// Resolved key-value settings for one subcommand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Merges the config file (if any) with the overrides and rejects keys
    /// the subcommand does not use.
    pub fn load(cmd: Command, file: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = file {
            let ini = ini::Ini::load_from_file(path)
                .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
            for (section, props) in ini.iter() {
                for (k, v) in props.iter() {
                    let key = match section {
                        Some(s) => format!("{s}.{k}"),
                        None => k.to_string(),
                    };
                    values.insert(key, v.trim().to_string());
                }
            }
        }
        let mut it = overrides.iter();
        while let Some(arg) = it.next() {
            let Some(flag) = arg.strip_prefix("--") else {
                return Err(CliError::Input(format!("unexpected argument {arg:?}; overrides take the form --key value")));
            };
            let (key, value) = match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| CliError::Input(format!("--{flag} needs a value")))?;
                    (flag.to_string(), v.clone())
                }
            };
            values.insert(key, value);
        }
        let ok = allowed(cmd);
        for key in values.keys() {
            let is_group = key.starts_with("group.") && key.len() > 6 && takes_groups(cmd);
            if !is_group && !ok.contains(&key.as_str()) {
                return Err(CliError::Input(format!("unknown key {key:?} for this subcommand")));
            }
        }
        Ok(RunConfig { values })
    }

    #[cfg(test)]
    fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        RunConfig {
            values: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.str(key).ok_or_else(|| CliError::Input(format!("missing required key {key:?}")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.str(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Input(format!("key {key:?}: cannot parse {v:?}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some("true" | "yes" | "on" | "1") => Ok(true),
            Some("false" | "no" | "off" | "0") => Ok(false),
            Some(v) => Err(CliError::Input(format!("key {key:?}: {v:?} is not a boolean"))),
        }
    }

    /// Comma- or space-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.str(key)
            .map(|v| {
                v.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|_| CliError::Input(format!("key {key:?}: cannot parse {s:?}")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// `lo, hi` pair; `inf` is accepted for either end.
    pub fn range(&self, key: &str) -> Result<Option<(f64, f64)>, CliError> {
        match self.list::<f64>(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 && v[0] <= v[1] => Ok(Some((v[0], v[1]))),
            Some(_) => Err(CliError::Input(format!("key {key:?} must be `lo, hi` with lo <= hi"))),
        }
    }

    /// `(name, orbitals)` for every `group.<name>` key, sorted by name.
    pub fn groups(&self) -> Result<Vec<(String, Vec<usize>)>, CliError> {
        self.values
            .keys()
            .filter_map(|k| k.strip_prefix("group.").map(|n| (k, n)))
            .map(|(k, n)| Ok((n.to_string(), self.list::<usize>(k)?.unwrap_or_default())))
            .collect()
    }
}
