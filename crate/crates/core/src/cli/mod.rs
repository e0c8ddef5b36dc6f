//! Pipeline driver behind the `levy-homog` binary.
//!
//! Stages run lazily: `study` pulls in the invariant measure and the
//! homogenized model, reusing cached copies keyed by a hash of everything
//! they depend on. Every stage that runs writes its artifacts and a
//! `manifest_<stage>.json` naming the hashes of its inputs and outputs.

mod config;

pub use config::*;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ergodic::{estimate_invariant_measure, invariance_fixed_point, EmpiricalMeasure, InvariantOptions};
use crate::error::{invalid, Error, Result};
use crate::homogenize::{
    compute_homogenized, fclt_diagnostics, measure_hash, FcltOptions, FcltReport, HomogenizeOptions, Homogenization,
    RadialIndicator,
};
use crate::levy::io as levy_io;
use crate::model::{validate_assumptions, CoefficientModel, ValidationReport};
use crate::nonlocal::SolverOptions;
use crate::pde::{
    homogenization_error, solve_limit_mc, solve_limit_spectral, solve_u_eps_mc, uniform_points, ErrorTable,
    FeynmanKacOptions,
};
use crate::rng::SeedSequence;
use crate::sde::{simulate_x_eps, simulate_x_tilde, SimOptions};
use crate::MAX_DIM;

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "LEVY_HOMOG_CACHE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Validate,
    Simulate,
    Invariant,
    Corrector,
    Homogenize,
    Solve,
    Study,
    Report,
}

/// Provenance record written next to every stage's artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub model_hash: String,
    /// Artifact name to hash, for every input consumed.
    pub inputs: BTreeMap<String, String>,
    /// Artifact name to hash, for every output produced.
    pub outputs: BTreeMap<String, String>,
    /// File name to SHA-256 of its bytes.
    pub files: BTreeMap<String, String>,
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn json_hash<T: Serialize>(v: &T) -> Result<String> {
    Ok(sha_hex(serde_json::to_string(v)?.as_bytes()))
}

pub struct Pipeline<'a> {
    cfg: &'a RunConfig,
    model: CoefficientModel,
    model_hash: String,
    config_hash: String,
    out: PathBuf,
    cache_dir: Option<PathBuf>,
    seq: SeedSequence,
    mu: Option<(String, EmpiricalMeasure)>,
    hom: Option<(String, Homogenization)>,
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Self> {
        let model = cfg.load_model()?;
        std::fs::create_dir_all(&cfg.output_dir)?;
        let cache_dir = if cfg.cache {
            let dir = std::env::var_os(CACHE_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| cfg.output_dir.join("cache"));
            std::fs::create_dir_all(&dir)?;
            Some(dir)
        } else {
            None
        };
        Ok(Self {
            model_hash: model.hash(),
            config_hash: cfg.hash(&model),
            model,
            cfg,
            out: cfg.output_dir.clone(),
            cache_dir,
            seq: SeedSequence::new(cfg.seed),
            mu: None,
            hom: None,
        })
    }

    pub fn model(&self) -> &CoefficientModel {
        &self.model
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        std::fs::write(self.path(name), s)?;
        Ok(())
    }

    fn file_hashes(&self, names: &[&str]) -> Result<BTreeMap<String, String>> {
        names
            .iter()
            .map(|n| Ok((n.to_string(), sha_hex(&std::fs::read(self.path(n))?))))
            .collect()
    }

    fn write_manifest(
        &self,
        stage: &str,
        inputs: &[(&str, &str)],
        outputs: &[(&str, String)],
        files: &[&str],
    ) -> Result<()> {
        let mut ins: BTreeMap<String, String> = inputs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        ins.insert("model".into(), self.model_hash.clone());
        let m = Manifest {
            stage: stage.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: self.cfg.seed,
            config_hash: self.config_hash.clone(),
            model_hash: self.model_hash.clone(),
            inputs: ins,
            outputs: outputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            files: self.file_hashes(files)?,
        };
        self.write_json(&format!("manifest_{stage}.json"), &m)
    }

    fn cached<T: Serialize + DeserializeOwned>(&self, key: &str, compute: impl FnOnce() -> Result<T>) -> Result<T> {
        let Some(dir) = &self.cache_dir else {
            return compute();
        };
        let file = dir.join(format!("{key}.json"));
        if let Ok(text) = std::fs::read_to_string(&file) {
            match serde_json::from_str(&text) {
                Ok(v) => {
                    log::info!("cache hit {}", file.display());
                    return Ok(v);
                }
                Err(e) => log::warn!("ignoring unreadable cache entry {}: {e}", file.display()),
            }
        }
        let v = compute()?;
        std::fs::write(&file, serde_json::to_string(&v)?)?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let p = &self.cfg.validate;
        let report = validate_assumptions(&self.model, p.grid_n, p.tol)?;
        self.write_json("validation.json", &report)?;
        std::fs::write(self.path("validation.txt"), report.to_string())?;
        let h = json_hash(&report)?;
        self.write_manifest("validate", &[], &[("validation", h)], &["validation.json", "validation.txt"])?;
        if !report.all_pass() {
            let failed: Vec<&str> = report
                .entries
                .iter()
                .filter(|e| e.status == crate::model::CheckStatus::Fail)
                .map(|e| e.name.as_str())
                .collect();
            return Err(Error::AssumptionViolation {
                assumption: failed.join(","),
                detail: "see validation.json".into(),
            });
        }
        Ok(report)
    }

    pub fn simulate(&self) -> Result<Vec<String>> {
        let p = &self.cfg.simulate;
        let mut x0 = [0.0; MAX_DIM];
        for (a, v) in p.x0.iter().take(self.model.dim).enumerate() {
            x0[a] = *v;
        }
        let seq = self.seq.derive(3);
        let sim = SimOptions::default();
        let mut files = Vec::new();
        let mut outputs = Vec::new();
        for i in 0..p.n_paths {
            let path = if p.tilde {
                simulate_x_tilde(&self.model, p.epsilon, &x0, p.t, p.dt, &sim, &seq, i as u64)?
            } else {
                simulate_x_eps(&self.model, p.epsilon, &x0, p.t, p.dt, &sim, &seq, i as u64)?
            };
            let csv = format!("path_{i:04}.csv");
            path.write_csv(&self.path(&csv))?;
            files.push(csv.clone());
            if p.binary {
                let bin = format!("path_{i:04}.bin");
                path.write_binary(&self.path(&bin))?;
                files.push(bin);
            }
            outputs.push((format!("path_{i:04}"), json_hash(&path)?));
        }
        let refs: Vec<&str> = files.iter().map(|s| s.as_str()).collect();
        let outs: Vec<(&str, String)> = outputs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        self.write_manifest("simulate", &[], &outs, &refs)?;
        Ok(files)
    }

    fn invariant_key(&self) -> Result<String> {
        Ok(key_hash(&[
            "invariant",
            &self.model_hash,
            &serde_json::to_string(&self.cfg.invariant)?,
            &self.cfg.seed.to_string(),
        ]))
    }

    /// Invariant measure of the torus process, computed once per run.
    pub fn invariant(&mut self) -> Result<&EmpiricalMeasure> {
        if self.mu.is_none() {
            let p = self.cfg.invariant.clone();
            let key = self.invariant_key()?;
            let opts = InvariantOptions {
                n_chains: p.n_chains,
                dt: p.dt,
                ..InvariantOptions::default()
            };
            let seq = self.seq.derive(1);
            let model = &self.model;
            let mu = self.cached(&key, || {
                estimate_invariant_measure(model, p.epsilon, p.n_samples, p.burn_in, p.thin, p.bins, &seq, &opts)
            })?;
            let fp = invariance_fixed_point(
                &self.model,
                &mu,
                (p.n_samples / 10).clamp(1000, 20_000),
                1.0,
                p.dt,
                &self.seq.derive(7),
            )?;
            self.write_json("invariant.json", &mu)?;
            mu.write_csv(&self.path("invariant.csv"))?;
            self.write_json(
                "invariant_diagnostics.json",
                &serde_json::json!({
                    "ess": mu.ess,
                    "between_chain_tv": mu.between_chain_tv,
                    "tv_threshold": mu.tv_threshold,
                    "converged": mu.converged,
                    "fixed_point": fp,
                }),
            )?;
            if !mu.converged {
                log::warn!("invariant chains disagree: TV {:.3e} > {:.3e}", mu.between_chain_tv, mu.tv_threshold);
            }
            let h = measure_hash(&mu);
            self.write_manifest(
                "invariant",
                &[],
                &[("mu_hat", h.clone())],
                &["invariant.json", "invariant.csv", "invariant_diagnostics.json"],
            )?;
            self.mu = Some((h, mu));
        }
        Ok(&self.mu.as_ref().expect("set above").1)
    }

    fn homogenize_options(&self) -> HomogenizeOptions {
        let p = &self.cfg.homogenize;
        let mut o = HomogenizeOptions::for_dim(self.model.dim);
        if p.grid_n > 0 {
            o.solver = SolverOptions {
                grid_n: p.grid_n,
                ..o.solver
            };
        }
        o.sphere_nodes = p.sphere_nodes;
        o.mc_samples = p.mc_samples;
        o
    }

    /// Correctors and homogenized coefficients.
    pub fn homogenization(&mut self) -> Result<&Homogenization> {
        if self.hom.is_none() {
            self.invariant()?;
            let (mu_h, mu) = self.mu.as_ref().expect("invariant computed");
            let opts = self.homogenize_options();
            let key = key_hash(&[
                "homogenize",
                &self.invariant_key()?,
                &serde_json::to_string(&opts)?,
            ]);
            let seq = self.seq.derive(2);
            let model = &self.model;
            let h = self.cached(&key, || compute_homogenized(model, mu, &opts, &seq))?;
            let mu_h = mu_h.clone();

            h.b_hat.field.write_csv(&self.path("b_hat.csv"))?;
            h.e_hat.field.write_csv(&self.path("e_hat.csv"))?;
            self.write_json(
                "corrector.json",
                &serde_json::json!({
                    "b_hat_residual": h.b_hat.residual(),
                    "e_hat_residual": h.e_hat.residual(),
                    "b_hat": h.b_hat.solution,
                    "e_hat": h.e_hat.solution,
                }),
            )?;
            let bh = json_hash(&h.b_hat.field)?;
            let eh = json_hash(&h.e_hat.field)?;
            self.write_manifest(
                "corrector",
                &[("mu_hat", &mu_h)],
                &[("b_hat", bh.clone()), ("e_hat", eh.clone())],
                &["b_hat.csv", "e_hat.csv", "corrector.json"],
            )?;

            self.write_json("homogenized.json", &h.model)?;
            self.write_json("jump_measure.json", &h.jump_measure)?;
            let hh = json_hash(&h.model)?;
            self.write_manifest(
                "homogenize",
                &[("mu_hat", &mu_h), ("b_hat", &bh), ("e_hat", &eh)],
                &[("homogenized", hh.clone())],
                &["homogenized.json", "jump_measure.json"],
            )?;
            self.hom = Some((hh, h));
        }
        Ok(&self.hom.as_ref().expect("set above").1)
    }

    fn x_points(&self, per_axis: usize) -> Vec<crate::Point> {
        uniform_points(self.model.dim, per_axis)
    }

    pub fn solve(&mut self) -> Result<()> {
        self.homogenization()?;
        let (hh, h) = self.hom.as_ref().expect("homogenization computed");
        let p = &self.cfg.solve;
        let xs = self.x_points(p.x_points);
        let opts = FeynmanKacOptions {
            n_paths: p.n_paths,
            dt: p.dt,
            sim: SimOptions::default(),
        };
        let e_hat = (!self.model.e.is_zero()).then_some(&h.e_hat.field);
        let seq = self.seq.derive(4);
        let fk = solve_u_eps_mc(&self.model, p.epsilon, p.t, &xs, e_hat, &opts, &seq)?;
        let lim = solve_limit_spectral(&h.model, &self.model.u0, p.t, &xs)?;
        let lim_mc = solve_limit_mc(&h.model, &self.model.u0, p.t, &xs, p.limit_mc_paths, &seq.derive(1))?;
        let d = self.model.dim;
        let mut cols = vec!["x"];
        if d == 2 {
            cols.push("x2");
        }
        cols.extend([
            "u_eps",
            "stderr",
            "u_hat",
            "u_hat_stderr",
            "u_limit",
            "u_limit_mc",
            "u_limit_mc_stderr",
        ]);
        let rows: Vec<Vec<f64>> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let mut r = x[..d].to_vec();
                let hat = fk.hat_values.as_ref().map_or(fk.values[i], |v| v[i]);
                r.extend([
                    fk.values[i].value,
                    fk.values[i].stderr,
                    hat.value,
                    hat.stderr,
                    lim[i],
                    lim_mc[i].value,
                    lim_mc[i].stderr,
                ]);
                r
            })
            .collect();
        levy_io::write_csv(&self.path("solve.csv"), &cols, &rows)?;
        self.write_json(
            "solve.json",
            &serde_json::json!({
                "epsilon": p.epsilon,
                "t": p.t,
                "scheme": fk.scheme,
                "hat_bound_violations": fk.hat_bound_violations,
            }),
        )?;
        let th = sha_hex(&std::fs::read(self.path("solve.csv"))?);
        let hh = hh.clone();
        self.write_manifest(
            "solve",
            &[("homogenized", &hh)],
            &[("solve_table", th)],
            &["solve.csv", "solve.json"],
        )?;
        Ok(())
    }

    pub fn study(&mut self) -> Result<(ErrorTable, Option<FcltReport>)> {
        self.homogenization()?;
        let (hh, h) = self.hom.as_ref().expect("homogenization computed");
        let p = &self.cfg.study;
        let xs = self.x_points(p.x_points);
        let opts = FeynmanKacOptions {
            n_paths: p.n_paths,
            dt: p.dt,
            sim: SimOptions::default(),
        };
        let table = homogenization_error(&self.model, &h.model, &p.epsilons, p.t, &xs, &opts, &self.seq.derive(5))?;
        table.write_csv(&self.path("study.csv"))?;
        table.write_plot_script(&self.path("plot_study.py"), "study.csv")?;
        self.write_json("study.json", &table)?;
        let mut files = vec!["study.csv", "plot_study.py", "study.json"];
        let fclt = if p.fclt {
            let fo = FcltOptions {
                test: RadialIndicator { rho: p.fclt_rho },
                n_paths: p.fclt_paths,
                dt: p.fclt_dt,
                ..FcltOptions::default()
            };
            let r = fclt_diagnostics(&self.model, &h.model, &h.b_hat, &p.epsilons, p.t, &fo, &self.seq.derive(6))?;
            r.write_csv(&self.path("fclt.csv"))?;
            self.write_json("fclt.json", &r)?;
            files.extend(["fclt.csv", "fclt.json"]);
            Some(r)
        } else {
            None
        };
        let th = sha_hex(&std::fs::read(self.path("study.csv"))?);
        let hh = hh.clone();
        self.write_manifest("study", &[("homogenized", &hh)], &[("study_table", th)], &files)?;
        Ok((table, fclt))
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Checks the hash chain across every manifest in `dir` and writes
/// `report.md` and `report.json`.
pub fn report(dir: &Path) -> Result<String> {
    let mut manifests: Vec<Manifest> = Vec::new();
    let mut names: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("manifest_") && n.ends_with(".json"))
        })
        .collect();
    names.sort();
    for p in &names {
        manifests.push(read_json(p)?);
    }
    if manifests.is_empty() {
        return Err(Error::Provenance(format!("no manifests in {}", dir.display())));
    }
    let mut problems = Vec::new();
    let model_hash = &manifests[0].model_hash;
    let mut produced: BTreeMap<&str, (&str, &str)> = BTreeMap::new();
    for m in &manifests {
        if &m.model_hash != model_hash {
            problems.push(format!("stage {} was run on a different model", m.stage));
        }
        for (k, v) in &m.outputs {
            produced.insert(k, (v, &m.stage));
        }
        for (file, h) in &m.files {
            match std::fs::read(dir.join(file)) {
                Ok(bytes) if &sha_hex(&bytes) == h => {}
                Ok(_) => problems.push(format!("{file} changed after stage {} wrote it", m.stage)),
                Err(_) => problems.push(format!("{file} listed by stage {} is missing", m.stage)),
            }
        }
    }
    for m in &manifests {
        for (k, v) in &m.inputs {
            if k == "model" {
                if v != model_hash {
                    problems.push(format!("stage {} consumed model {}", m.stage, &v[..12.min(v.len())]));
                }
                continue;
            }
            match produced.get(k.as_str()) {
                Some((h, _)) if h == v => {}
                Some((_, s)) => problems.push(format!("stage {} consumed a {k} that stage {s} did not produce", m.stage)),
                None => problems.push(format!("stage {} consumed {k} but no manifest produces it", m.stage)),
            }
        }
    }
    let hom_path = dir.join("homogenized.json");
    let hom: Option<crate::homogenize::HomogenizedModel> = read_json(&hom_path).ok();
    if let (Some(h), Some((mu, _))) = (&hom, produced.get("mu_hat")) {
        if h.provenance.mu_hat_hash != *mu {
            problems.push("homogenized model names a different invariant measure".into());
        }
    }

    let mut md = String::new();
    writeln!(md, "# Run report\n").ok();
    writeln!(md, "model `{}`\n", model_hash).ok();
    writeln!(md, "| stage | config | outputs |").ok();
    writeln!(md, "|---|---|---|").ok();
    for m in &manifests {
        let outs: Vec<String> = m.outputs.iter().map(|(k, v)| format!("{k} `{}`", &v[..12.min(v.len())])).collect();
        writeln!(md, "| {} | `{}` | {} |", m.stage, &m.config_hash[..12], outs.join(", ")).ok();
    }
    if let Some(h) = &hom {
        writeln!(md, "\n## Homogenized coefficients\n").ok();
        for (a, c) in h.c_bar.iter().enumerate() {
            writeln!(md, "- C̄[{a}] = {:.6} ± {:.2e} (bias ≤ {:.2e})", c.value, c.stderr, c.bias).ok();
        }
        writeln!(md, "- Ē = {:.6} ± {:.2e}", h.e_bar.value, h.e_bar.stderr).ok();
        writeln!(md, "- Π total spectral mass = {:.6}", h.pi_spec.total_mass()).ok();
        writeln!(
            md,
            "- corrector residuals: b̂ {:.2e}, ê {:.2e}",
            h.provenance.b_hat_residual, h.provenance.e_hat_residual
        )
        .ok();
    }
    if let Ok(t) = read_json::<ErrorTable>(&dir.join("study.json")) {
        writeln!(md, "\n## Homogenization error (t = {})\n", t.t).ok();
        writeln!(md, "| ε | sup error | stderr | noise floor |").ok();
        writeln!(md, "|---|---|---|---|").ok();
        for r in &t.rows {
            writeln!(
                md,
                "| {} | {:.4e} | {:.2e} | {:.2e} |",
                r.epsilon, r.sup_error.value, r.sup_error.stderr, r.noise_floor
            )
            .ok();
        }
        writeln!(md, "\nnon-increasing within 3 stderr: {}", t.non_increasing(3.0)).ok();
    }
    if let Ok(f) = read_json::<FcltReport>(&dir.join("fclt.json")) {
        writeln!(md, "\n## Characteristics of the corrected process\n").ok();
        writeln!(md, "| ε | sup|Λ₁−C̄s| median | sup|B₂| | ∫f dν₂ | ∫f dν₃₊₄ | limit |").ok();
        writeln!(md, "|---|---|---|---|---|---|").ok();
        for r in &f.rows {
            writeln!(
                md,
                "| {} | {:.3e} | {:.3e} | {:.3e} | {:.4} | {:.4} |",
                r.epsilon, r.drift_sup_median.value, r.b2_sup.value, r.nu2.value, r.nu34.value, f.nu34_limit.value
            )
            .ok();
        }
    }
    writeln!(md, "\n## Provenance\n").ok();
    if problems.is_empty() {
        writeln!(md, "hash chain intact across {} manifests", manifests.len()).ok();
    } else {
        for p in &problems {
            writeln!(md, "- BROKEN: {p}").ok();
        }
    }
    std::fs::write(dir.join("report.md"), &md)?;
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "model_hash": model_hash,
            "stages": manifests.iter().map(|m| &m.stage).collect::<Vec<_>>(),
            "problems": problems,
        }))? + "\n",
    )?;
    if !problems.is_empty() {
        return Err(Error::Provenance(problems.join("; ")));
    }
    Ok(md)
}

/// Runs one subcommand, inside a dedicated thread pool when `threads` is set,
/// and returns a short human-readable summary.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<String> {
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| invalid(format!("thread pool: {e}")))?;
            pool.install(|| run_inner(cmd, cfg))
        }
        None => run_inner(cmd, cfg),
    }
}

fn run_inner(cmd: Command, cfg: &RunConfig) -> Result<String> {
    if cmd == Command::Report {
        return report(&cfg.output_dir);
    }
    let mut p = Pipeline::new(cfg)?;
    let summary = match cmd {
        Command::Validate => p.validate()?.to_string(),
        Command::Simulate => {
            let files = p.simulate()?;
            format!("wrote {} files to {}\n", files.len(), cfg.output_dir.display())
        }
        Command::Invariant => {
            let mu = p.invariant()?;
            format!(
                "invariant measure: {} samples, ESS {:.0}, between-chain TV {:.3e} (converged: {})\n",
                mu.n_samples, mu.ess, mu.between_chain_tv, mu.converged
            )
        }
        Command::Corrector | Command::Homogenize => {
            let h = p.homogenization()?;
            format!(
                "C̄ = {:?}, Ē = {:.6}, Π mass = {:.6}, residuals b̂ {:.2e} ê {:.2e}\n",
                h.model.c_bar.iter().map(|e| e.value).collect::<Vec<_>>(),
                h.model.e_bar.value,
                h.model.pi_spec.total_mass(),
                h.b_hat.residual(),
                h.e_hat.residual()
            )
        }
        Command::Solve => {
            p.solve()?;
            format!("wrote {}\n", cfg.output_dir.join("solve.csv").display())
        }
        Command::Study => {
            let (t, _) = p.study()?;
            t.rows
                .iter()
                .map(|r| format!("ε = {:<6} sup error {:.4e} ± {:.2e}\n", r.epsilon, r.sup_error.value, r.sup_error.stderr))
                .collect()
        }
        Command::Report => unreachable!(),
    };
    Ok(summary)
}

/// Machine-readable error record printed on failure.
pub fn error_record(e: &Error) -> String {
    serde_json::json!({ "status": "error", "kind": e.kind(), "message": e.to_string() }).to_string()
}
