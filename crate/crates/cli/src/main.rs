//! `fpp`: first-passage percolation experiments from JSON configs.
//!
//! Exit codes: 0 success, 1 invariant failure or runtime error, 2 schema
//! violation, 3 budget or enumeration cap exceeded.

mod commands;
mod config;
mod error;
mod output;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{load_config, Experiment, ExperimentConfig, SelftestConfig, SCHEMA_VERSION};
use error::{CliError, CliResult};
use output::{Manifest, MANIFEST};

#[derive(Parser, Debug)]
#[command(name = "fpp", version, about = "First-passage percolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config; its command must match the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the master seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the edge-visit budget of the config.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, env = "FPP_OUT_DIR", default_value = "fpp-out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample fields, tabulate rescaled passage times and geodesic lengths.
    Simulate,
    /// Exact event probabilities, FKG slacks and strip supermultiplicativity.
    Oracle,
    /// Estimate elementary rates, extend them to a surface and check its laws.
    Rate,
    /// Build the disjoint geodesic network of a highway metric.
    Highways,
    /// Evaluate the three expressions of the functional.
    Functional,
    /// Probability of the lower-deviation event along an n ladder.
    LdTrend,
    /// Run the invariant suite (deterministic(1) law unless a config is given).
    Selftest,
    /// Repeat the run recorded in a manifest and compare every artifact hash.
    Rerun {
        manifest: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Oracle => "oracle",
            Command::Rate => "rate",
            Command::Highways => "highways",
            Command::Functional => "functional",
            Command::LdTrend => "ld-trend",
            Command::Selftest => "selftest",
            Command::Rerun { .. } => "rerun",
        }
    }
}

fn effective_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match (&cli.config, &cli.command) {
        (Some(p), _) => load_config(p)?,
        (None, Command::Selftest) => ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment: Experiment::Selftest(SelftestConfig::default()),
        },
        (None, c) => return Err(CliError::Schema(format!("`{}` needs --config", c.name()))),
    };
    if cfg.experiment.command() != cli.command.name() {
        return Err(CliError::Schema(format!(
            "config is for `{}` but the subcommand is `{}`",
            cfg.experiment.command(),
            cli.command.name()
        )));
    }
    if let Some(s) = cli.seed {
        cfg.experiment.set_seed(s);
    }
    if let Some(b) = cli.budget {
        cfg.experiment.set_budget(b);
    }
    Ok(cfg)
}

/// Runs `cfg`, writes artifacts and manifest into `out`, returns the exit code.
fn execute(cfg: &ExperimentConfig, out: &Path, expected: Option<&Manifest>) -> CliResult<u8> {
    cfg.experiment.validate()?;
    let outcome = commands::run(&cfg.experiment)?;
    let code = if outcome.failures.is_empty() { 0 } else { 1 };
    outcome.artifacts.write_all(out)?;
    let manifest = Manifest::new(cfg, &outcome.artifacts, code)?;
    let path = out.join(MANIFEST);
    let mut text = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Invariant(e.to_string()))?;
    text.push(b'\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    print!("{}", outcome.summary);
    for f in &outcome.failures {
        eprintln!("invariant failure: {f}");
    }
    if let Some(m) = expected {
        let diff = m.mismatches(&outcome.artifacts);
        if !diff.is_empty() {
            return Err(CliError::Invariant(format!("rerun is not reproducible: {}", diff.join(", "))));
        }
        println!("rerun: {} artifacts byte-identical", m.artifacts.len());
    }
    Ok(code)
}

fn main_inner(cli: &Cli) -> CliResult<u8> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Invariant(e.to_string()))?;
    }
    if let Command::Rerun { manifest } = &cli.command {
        let m = Manifest::load(manifest)?;
        let now = output::Versions::current();
        if now.fpp_core != m.versions.fpp_core || now.fpp_cli != m.versions.fpp_cli {
            eprintln!("warning: manifest was written by other versions ({:?})", m.versions);
        }
        return execute(&m.config, &cli.out, Some(&m));
    }
    let cfg = effective_config(cli)?;
    execute(&cfg, &cli.out, None)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fpp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
