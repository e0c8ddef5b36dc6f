use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use levy_homog::cli::{error_record, run, Command, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "levy-homog", version, about = "Homogenization of nonlocal PDEs driven by multiplicative stable noise")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (TOML); flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Model file (TOML).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Built-in model: constant, modulated, drift, pure-stable, pure-stable-2d.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Comma-separated ε list (study).
    #[arg(long, global = true, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// ε for simulate and solve.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Horizon for simulate, solve and study.
    #[arg(long, short, global = true)]
    t: Option<f64>,
    /// Path budget for simulate, solve and study.
    #[arg(long, global = true)]
    paths: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Check the model against the standing assumptions.
    Validate,
    /// Dump sample paths.
    Simulate,
    /// Estimate the invariant measure of the torus process.
    Invariant,
    /// Solve the corrector equations.
    Corrector,
    /// Compute the homogenized coefficients and jump measure.
    Homogenize,
    /// Solve the oscillating problem by Monte Carlo and its limit spectrally.
    Solve,
    /// Homogenization error over an ε sweep.
    Study,
    /// Summarise every artifact in the output directory and check provenance.
    Report,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Validate => Command::Validate,
            Cmd::Simulate => Command::Simulate,
            Cmd::Invariant => Command::Invariant,
            Cmd::Corrector => Command::Corrector,
            Cmd::Homogenize => Command::Homogenize,
            Cmd::Solve => Command::Solve,
            Cmd::Study => Command::Study,
            Cmd::Report => Command::Report,
        }
    }
}

fn build_config(c: &Common) -> levy_homog::Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &c.model {
        cfg.model = Some(m.clone());
    }
    if let Some(p) = &c.preset {
        cfg.preset = p.clone();
        cfg.model = None;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    if c.no_cache {
        cfg.cache = false;
    }
    if c.threads.is_some() {
        cfg.threads = c.threads;
    }
    if let Some(e) = &c.epsilons {
        cfg.study.epsilons = e.clone();
    }
    if let Some(e) = c.epsilon {
        cfg.simulate.epsilon = e;
        cfg.solve.epsilon = e;
    }
    if let Some(t) = c.t {
        cfg.simulate.t = t;
        cfg.solve.t = t;
        cfg.study.t = t;
    }
    if let Some(n) = c.paths {
        cfg.simulate.n_paths = n;
        cfg.solve.n_paths = n;
        cfg.study.n_paths = n;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match build_config(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            return ExitCode::from(2);
        }
    };
    match run(cli.command.into(), &cfg) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            let _ = std::fs::create_dir_all(&cfg.output_dir);
            let _ = std::fs::write(cfg.output_dir.join("error.json"), error_record(&e) + "\n");
            ExitCode::from(1)
        }
    }
}
