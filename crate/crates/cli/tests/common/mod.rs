#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

use serde_json::Value;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn extsqd(cmd: &str, args: &[&str], out: Option<&Path>, workers: Option<&str>) -> Run {
    let mut c = Command::new(env!("CARGO_BIN_EXE_extsqd"));
    c.arg(cmd).args(args).env_remove("EXTSQD_WORKERS");
    if let Some(o) = out {
        c.arg("--output").arg(o);
    }
    if let Some(w) = workers {
        c.env("EXTSQD_WORKERS", w);
    }
    let o = c.output().expect("binary runs");
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
    }
}

pub fn load_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/result.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn validate(doc: &Value) {
    let v = jsonschema::validator_for(&schema()).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

/// Drops the pretty-printed `timing` object.
pub fn strip_timing(text: &str) -> String {
    let mut out = String::new();
    let mut skipping = false;
    for line in text.lines() {
        if line.starts_with("  \"timing\": {") {
            skipping = true;
            continue;
        }
        if skipping {
            if line.starts_with("  }") {
                skipping = false;
            }
            continue;
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}
