use std::path::Path;
use std::time::Instant;

use serde_json::{json, Map, Value};

use extsqd_core::config::{Sector, DEFAULT_ENUMERATION_CAP};
use extsqd_core::eigen::DavidsonOptions;
use extsqd_core::fits::{fit_state, fit_table, CurveData, Window, N2_REDUCED_MASS};
use extsqd_core::hamiltonian::{hubbard_chain, parse_fcidump, random_hamiltonian, write_fcidump, Hamiltonian, DEFAULT_EXPLICIT_THRESHOLD};
use extsqd_core::observables::{classify_roots, overlapping_groups, spin_report, OrbitalGroup};
use extsqd_core::persist::{load_state, persist_state};
use extsqd_core::pipelines::{
    make_generators, run_ext_sqd, run_fci, run_qse, run_sqd, CIState, ExtSqdOptions, GeneratorSet, SolverOptions,
    SqdOptions, DEFAULT_CHUNK, DEFAULT_CUT_THRESHOLD, DEFAULT_TAU,
};
use extsqd_core::sampling::{
    particle_number_stats, read_samples, sample_state, sample_uniform_sector, write_samples, BatchOptions,
    BatchWeighting, SampleSet,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::Command;

const DEFAULT_SHOTS: u64 = 10_000;

/// Results of one subcommand plus its stage timings.
pub struct Outcome {
    pub body: Map<String, Value>,
    pub converged: bool,
    pub stages: Map<String, Value>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    body: Map<String, Value>,
    stages: Map<String, Value>,
    converged: bool,
    tables: Vec<String>,
    warnings: Vec<String>,
}

impl Ctx<'_> {
    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.insert(stage.into(), json!(t.elapsed().as_secs_f64()));
        out
    }

    fn set(&mut self, key: &str, v: Value) {
        self.body.insert(key.into(), v);
    }

    fn table(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        if let Some(dir) = self.cfg.str("tables") {
            std::fs::create_dir_all(dir)?;
            std::fs::write(Path::new(dir).join(name), content)?;
            self.tables.push(name.to_string());
        }
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut ctx = Ctx {
        cfg,
        body: Map::new(),
        stages: Map::new(),
        converged: true,
        tables: Vec::new(),
        warnings: Vec::new(),
    };
    match cmd {
        Command::Fci => fci(&mut ctx)?,
        Command::Sqd => sqd(&mut ctx)?,
        Command::ExtSqd => ext_sqd(&mut ctx)?,
        Command::Qse => qse(&mut ctx)?,
        Command::Sample => sample(&mut ctx)?,
        Command::Observables => observables(&mut ctx)?,
        Command::Fit => fit(&mut ctx)?,
        Command::Model => model(&mut ctx)?,
        Command::Stats => stats(&mut ctx)?,
    }
    let tables = std::mem::take(&mut ctx.tables);
    let warnings = std::mem::take(&mut ctx.warnings);
    ctx.set("tables", json!(tables));
    ctx.set("warnings", json!(warnings));
    Ok(Outcome {
        body: ctx.body,
        converged: ctx.converged,
        stages: ctx.stages,
    })
}

fn sector_json(s: &Sector) -> Value {
    json!({"n_orb": s.n_orb, "n_alpha": s.n_alpha, "n_beta": s.n_beta})
}

fn load_hamiltonian(ctx: &mut Ctx) -> Result<(Hamiltonian, Sector), CliError> {
    let cfg = ctx.cfg;
    let (h, default_sector, source) = match (cfg.str("fcidump"), cfg.str("model")) {
        (Some(_), Some(_)) => return Err(CliError::Input("give either fcidump or model, not both".into())),
        (None, None) => return Err(CliError::Input("missing Hamiltonian: set fcidump or model".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            let (h, rep) = parse_fcidump(&text)?;
            let src = json!({"kind": "fcidump", "path": path, "records": rep.records, "duplicates": rep.duplicates});
            (h, Some(rep.sector), src)
        }
        (None, Some("hubbard")) => {
            let sites: usize = cfg.get("model.sites")?.ok_or_else(|| CliError::Input("model.sites is required".into()))?;
            let t = cfg.get_or("model.t", 1.0)?;
            let u = cfg.get_or("model.u", 4.0)?;
            let periodic = cfg.flag("model.periodic", false)?;
            let src = json!({"kind": "hubbard", "sites": sites, "t": t, "u": u, "periodic": periodic});
            (hubbard_chain(sites, t, u, periodic)?, None, src)
        }
        (None, Some("random")) => {
            let m: usize = cfg
                .get("model.orbitals")?
                .ok_or_else(|| CliError::Input("model.orbitals is required".into()))?;
            let seed = cfg.get_or("model.seed", 0u64)?;
            (random_hamiltonian(m, seed), None, json!({"kind": "random", "orbitals": m, "seed": seed}))
        }
        (None, Some(other)) => return Err(CliError::Input(format!("unknown model {other:?}"))),
    };
    let m = h.n_orb();
    let (da, db) = default_sector.map_or((m.div_ceil(2), m / 2), |s| (s.n_alpha, s.n_beta));
    let sector = Sector::new(m, cfg.get_or("n_alpha", da)?, cfg.get_or("n_beta", db)?)?;
    ctx.set("hamiltonian", source);
    ctx.set("sector", sector_json(&sector));
    Ok((h, sector))
}

fn solver_options(cfg: &RunConfig) -> Result<SolverOptions, CliError> {
    let d = DavidsonOptions::default();
    Ok(SolverOptions {
        davidson: DavidsonOptions {
            tol: cfg.get_or("davidson.tol", d.tol)?,
            max_iter: cfg.get_or("davidson.max_iter", d.max_iter)?,
            ..d
        },
        explicit_threshold: cfg.get_or("explicit_threshold", DEFAULT_EXPLICIT_THRESHOLD)?,
    })
}

fn cap(cfg: &RunConfig) -> Result<u128, CliError> {
    cfg.get_or("cap", DEFAULT_ENUMERATION_CAP)
}

fn roots_json(state: &CIState) -> Value {
    Value::Array(
        classify_roots(state)
            .into_iter()
            .map(|l| json!({"root": l.root, "energy": l.energy, "s_squared": l.s_squared, "label": l.label}))
            .collect(),
    )
}

fn energies_table(state: &CIState) -> String {
    let mut out = String::from("root\tenergy\ts_squared\tlabel\n");
    for l in classify_roots(state) {
        out.push_str(&format!("{}\t{:.12}\t{:.10}\t{}\n", l.root, l.energy, l.s_squared, l.label));
    }
    out
}

fn groups(ctx: &mut Ctx, n_orb: usize) -> Result<Vec<OrbitalGroup>, CliError> {
    let groups: Vec<OrbitalGroup> = ctx
        .cfg
        .groups()?
        .into_iter()
        .map(|(n, o)| OrbitalGroup::new(n, o))
        .collect();
    for g in &groups {
        if let Some(p) = g.orbitals.iter().find(|&&p| p >= n_orb) {
            return Err(CliError::Input(format!("group {} names orbital {p} but M = {n_orb}", g.name)));
        }
    }
    for (a, b) in overlapping_groups(&groups) {
        ctx.warn(format!("orbital groups {a} and {b} overlap"));
    }
    Ok(groups)
}

/// Roots, energies table, optional observables and state file.
fn report_state(ctx: &mut Ctx, state: &CIState) -> Result<(), CliError> {
    ctx.set("method", json!(state.method.tag()));
    ctx.set("roots", roots_json(state));
    ctx.table("energies.tsv", &energies_table(state))?;
    let groups = groups(ctx, state.sector.n_orb)?;
    if !groups.is_empty() {
        let rep = ctx.timed("observables", || spin_report(state, &groups))?;
        ctx.set("observables", serde_json::to_value(rep).expect("serializable"));
    }
    if let Some(path) = ctx.cfg.str("state_out") {
        persist_state(path, state)?;
    }
    Ok(())
}

fn fci(ctx: &mut Ctx) -> Result<(), CliError> {
    let (h, sector) = load_hamiltonian(ctx)?;
    let opts = solver_options(ctx.cfg)?;
    let n_roots = ctx.cfg.get_or("n_roots", 1usize)?;
    let cap = cap(ctx.cfg)?;
    let (state, conv) = ctx.timed("diagonalize", || run_fci(&h, sector, n_roots, cap, &opts))?;
    ctx.converged &= conv;
    ctx.set("dimensions", json!({"D": state.dimension()}));
    report_state(ctx, &state)
}

fn acquire_samples(ctx: &mut Ctx, h: &Hamiltonian, sector: Sector) -> Result<SampleSet, CliError> {
    let cfg = ctx.cfg;
    let seed = cfg.get_or("seed", 0u64)?;
    let kind = cfg
        .str("sampler")
        .unwrap_or(if cfg.str("samples").is_some() { "file" } else { "uniform" })
        .to_string();
    let shots = cfg.get_or("sampler.shots", DEFAULT_SHOTS)?;
    let noise = cfg.get_or("sampler.noise", 0.0f64)?;
    if noise != 0.0 && kind != "fci-state" {
        return Err(CliError::Input("sampler.noise applies only to the fci-state sampler".into()));
    }
    let set = match kind.as_str() {
        "file" => {
            let path = cfg.require("samples")?;
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            read_samples(&text, sector.n_orb)?
        }
        "uniform" => ctx.timed("sample", || sample_uniform_sector(&sector, shots, seed)),
        "fci-state" => {
            let opts = solver_options(cfg)?;
            let cap = cap(cfg)?;
            let (fci, _) = ctx.timed("reference_state", || run_fci(h, sector, 1, cap, &opts))?;
            ctx.timed("sample", || sample_state(&fci.ground(), shots, noise, seed))?
        }
        other => return Err(CliError::Input(format!("unknown sampler {other:?}"))),
    };
    let st = particle_number_stats(&set, &sector)?;
    ctx.set(
        "sampling",
        json!({"sampler": kind, "total": set.total(), "distinct": set.distinct(), "p_hw": st.p_hw, "ci95": [st.ci95.0, st.ci95.1], "p_unif": st.p_unif}),
    );
    Ok(set)
}

fn sqd_options(cfg: &RunConfig) -> Result<SqdOptions, CliError> {
    let d = SqdOptions::default();
    let weighting = match cfg.str("sqd.weighting").unwrap_or("multiplicity") {
        "multiplicity" => BatchWeighting::Multiplicity,
        "uniform" => BatchWeighting::Uniform,
        other => return Err(CliError::Input(format!("unknown sqd.weighting {other:?}"))),
    };
    Ok(SqdOptions {
        n_batches: cfg.get_or("sqd.batches", d.n_batches)?,
        batch_size: cfg.get_or("sqd.batch_size", d.batch_size)?,
        score_iters: cfg.get_or("sqd.score_iters", d.score_iters)?,
        n_roots: cfg.get_or("n_roots", 1)?,
        seed: cfg.get_or("seed", 0)?,
        batch: BatchOptions {
            weighting,
            include_reference: cfg.flag("sqd.include_reference", true)?,
            spin_closure: cfg.flag("sqd.spin_closure", true)?,
        },
        n_aug: cfg.get("sqd.n_aug")?,
        solver: solver_options(cfg)?,
    })
}

fn traces_table(diag: &extsqd_core::pipelines::SqdDiagnostics) -> String {
    let mut out = String::from("iteration\tbatch\tdimension\tground_energy\tbest\n");
    for it in &diag.iterations {
        for (k, (d, e)) in it.batch_dimensions.iter().zip(&it.batch_ground_energies).enumerate() {
            out.push_str(&format!("{}\t{k}\t{d}\t{e:.12}\t{}\n", it.iteration, (k == it.best_batch) as u8));
        }
    }
    out
}

/// SQD state from `state_in` or from an inline SQD run.
fn sqd_state(ctx: &mut Ctx, h: &Hamiltonian, sector: Sector) -> Result<CIState, CliError> {
    if let Some(path) = ctx.cfg.str("state_in") {
        let st = load_state(path)?;
        if st.sector != sector {
            return Err(CliError::Input(format!("state file sector {} differs from {sector}", st.sector)));
        }
        ctx.set("seed_state", json!({"source": "file", "dimension": st.dimension(), "energies": st.energies}));
        return Ok(st);
    }
    let samples = acquire_samples(ctx, h, sector)?;
    let opts = sqd_options(ctx.cfg)?;
    let (st, diag) = ctx.timed("sqd", || run_sqd(h, &samples, sector, &opts))?;
    ctx.converged &= diag.converged;
    ctx.table("traces.tsv", &traces_table(&diag))?;
    ctx.set("traces", serde_json::to_value(&diag).expect("serializable"));
    Ok(st)
}

fn sqd(ctx: &mut Ctx) -> Result<(), CliError> {
    let (h, sector) = load_hamiltonian(ctx)?;
    let st = sqd_state(ctx, &h, sector)?;
    ctx.set("dimensions", json!({"D": st.dimension()}));
    report_state(ctx, &st)
}

fn generators(ctx: &mut Ctx, sector: &Sector) -> Result<GeneratorSet, CliError> {
    let ranks = ctx.cfg.list::<usize>("generators.ranks")?.unwrap_or_else(|| vec![1, 2]);
    let window = ctx.cfg.list::<usize>("generators.window")?;
    let window = match window.as_deref() {
        None => None,
        Some([lo, hi]) if lo < hi => Some(*lo..*hi),
        Some(_) => return Err(CliError::Input("generators.window must be `lo, hi` with lo < hi".into())),
    };
    let g = make_generators(sector, &sector.reference(), &ranks, window.clone())?;
    ctx.set(
        "generators",
        json!({"ranks": g.ranks, "window": window.map(|w| [w.start, w.end]), "count": g.len(),
               "singles": g.counts.singles, "doubles": g.counts.doubles, "triples": g.counts.triples}),
    );
    Ok(g)
}

fn ext_sqd(ctx: &mut Ctx) -> Result<(), CliError> {
    let (h, sector) = load_hamiltonian(ctx)?;
    let seed_state = sqd_state(ctx, &h, sector)?;
    let g = generators(ctx, &sector)?;
    let d = ExtSqdOptions::default();
    let opts = ExtSqdOptions {
        threshold: ctx.cfg.get_or("ext.threshold", DEFAULT_CUT_THRESHOLD)?,
        n_roots: ctx.cfg.get_or("n_roots", 1)?,
        chunk: ctx.cfg.get_or("ext.chunk", DEFAULT_CHUNK)?,
        spin_closure: ctx.cfg.flag("ext.spin_closure", d.spin_closure)?,
        solver: solver_options(ctx.cfg)?,
    };
    let (st, rep) = ctx.timed("ext_sqd", || run_ext_sqd(&h, &seed_state, &g, &opts))?;
    ctx.converged &= rep.converged;
    if !rep.within_bound {
        ctx.warn(format!("extended dimension {} exceeds the single-double bound {}", rep.extended_dimension, rep.bound));
    }
    ctx.set("sqd_energies", json!(seed_state.energies));
    ctx.set(
        "dimensions",
        json!({"D": seed_state.dimension(), "D_cut": rep.cut_dimension, "D_E": rep.extended_dimension}),
    );
    ctx.set(
        "tallies",
        json!({"new_unique": rep.tallies.new_unique, "annihilated": rep.tallies.annihilated,
               "duplicate_new": rep.tallies.duplicate_new, "already_present": rep.tallies.already_present,
               "bound": rep.bound.to_string(), "within_bound": rep.within_bound}),
    );
    report_state(ctx, &st)
}

fn qse(ctx: &mut Ctx) -> Result<(), CliError> {
    let (h, sector) = load_hamiltonian(ctx)?;
    let seed_state = sqd_state(ctx, &h, sector)?;
    let g = generators(ctx, &sector)?;
    let tau = ctx.cfg.get_or("qse.tau", DEFAULT_TAU)?;
    let n_roots = ctx.cfg.get_or("n_roots", 1)?;
    let phi = seed_state.ground();
    let res = ctx.timed("qse", || run_qse(&h, &phi, &g, tau, n_roots))?;
    ctx.set("sqd_energies", json!(seed_state.energies));
    ctx.set(
        "dimensions",
        json!({"D": seed_state.dimension(), "qse_generators": res.n_generators, "qse_kept": res.kept_dimension,
               "qse_support": res.state.dimension()}),
    );
    report_state(ctx, &res.state)
}

fn sample(ctx: &mut Ctx) -> Result<(), CliError> {
    let (h, sector) = load_hamiltonian(ctx)?;
    let out = ctx.cfg.require("sample.out")?.to_string();
    let set = acquire_samples(ctx, &h, sector)?;
    std::fs::write(&out, write_samples(&set))?;
    ctx.set("method", json!("sample"));
    Ok(())
}

fn observables(ctx: &mut Ctx) -> Result<(), CliError> {
    let st = load_state(ctx.cfg.require("state_in")?)?;
    ctx.set("sector", sector_json(&st.sector));
    ctx.set("dimensions", json!({"D": st.dimension()}));
    let groups = groups(ctx, st.sector.n_orb)?;
    let rep = ctx.timed("observables", || spin_report(&st, &groups))?;
    let mut occ = String::from("root\torbital\tn_alpha\tn_beta\tn\n");
    for r in &rep {
        for p in 0..st.sector.n_orb {
            occ.push_str(&format!(
                "{}\t{p}\t{:.10}\t{:.10}\t{:.10}\n",
                r.root, r.occupancy.alpha[p], r.occupancy.beta[p], r.occupancy.total[p]
            ));
        }
    }
    ctx.table("occupancy.tsv", &occ)?;
    ctx.set("observables", serde_json::to_value(rep).expect("serializable"));
    ctx.set("method", json!(st.method.tag()));
    ctx.set("roots", roots_json(&st));
    Ok(())
}

fn fit(ctx: &mut Ctx) -> Result<(), CliError> {
    let path = ctx.cfg.require("fit.curve")?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    let curve = CurveData::parse(&text)?;
    let window = |key: &str, d: Window| -> Result<Window, CliError> {
        Ok(ctx.cfg.range(key)?.map_or(d, |(lo, hi)| Window { lo, hi }))
    };
    let mw = window("fit.morse_window", Window::MORSE_DEFAULT)?;
    let tw = window("fit.tail_window", Window::TAIL_DEFAULT)?;
    if ctx.cfg.str("fit.tail_window").is_none() {
        ctx.warn(format!("fit.tail_window not set; power-law fit uses R >= {}", tw.lo));
    }
    let mu = ctx.cfg.get_or("fit.mu", N2_REDUCED_MASS)?;
    let mut reports = Vec::new();
    for k in 0..curve.n_states() {
        let rep = fit_state(&curve, k, mw, tw, mu)?;
        if !rep.tail.monotone {
            ctx.warn(format!("tail of {} is not monotone", rep.state));
        }
        ctx.table(&format!("fit_{}.tsv", rep.state), &fit_table(&curve, k, &rep))?;
        reports.push(rep);
    }
    ctx.set("method", json!("fit"));
    ctx.set("fits", serde_json::to_value(reports).expect("serializable"));
    Ok(())
}

fn model(ctx: &mut Ctx) -> Result<(), CliError> {
    let (h, sector) = load_hamiltonian(ctx)?;
    let out = ctx.cfg.require("model.out")?;
    std::fs::write(out, write_fcidump(&h, &sector))?;
    ctx.set("method", json!("model"));
    Ok(())
}

fn stats(ctx: &mut Ctx) -> Result<(), CliError> {
    let path = ctx.cfg.require("samples")?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    let n_orb = match ctx.cfg.get::<usize>("n_orb")? {
        Some(m) => m,
        None => {
            let first = text
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty() && !l.starts_with('#'))
                .ok_or_else(|| CliError::Input("empty samples file".into()))?;
            first.split_whitespace().next().map_or(0, str::len) / 2
        }
    };
    let set = read_samples(&text, n_orb)?;
    let sector = Sector::new(
        n_orb,
        ctx.cfg.get("n_alpha")?.ok_or_else(|| CliError::Input("n_alpha is required".into()))?,
        ctx.cfg.get("n_beta")?.ok_or_else(|| CliError::Input("n_beta is required".into()))?,
    )?;
    let st = particle_number_stats(&set, &sector)?;
    ctx.set("sector", sector_json(&sector));
    ctx.set("method", json!("stats"));
    ctx.set(
        "statistics",
        json!({"total": st.total, "distinct": set.distinct(), "p_hw": st.p_hw, "ci95": [st.ci95.0, st.ci95.1], "p_unif": st.p_unif}),
    );
    Ok(())
}
