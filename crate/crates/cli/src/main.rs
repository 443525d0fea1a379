//! `schauder`: runs oracle checks, expansions, IBVP solves, exponent fits, maximum
//! principle and boundary growth experiments, and writes `report.json` plus CSV/SVG
//! artifacts. Exit codes: 0 all assertions pass, 1 an assertion failed, 2 config error.

mod config;
mod experiments;
mod svg;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use schauder_core::model::catalog;
use schauder_core::spoly::Gamma;

use config::{config_error, load_value, parse, ConfigError, ExperimentConfig, Kind, SuiteConfig};
use experiments::{prepare, Outcome};

#[derive(Parser)]
#[command(name = "schauder", version, about = "Experiments for degenerate parabolic equations with x_n^gamma weights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// γ ≤ 1 as "p/q"; overrides the config.
    #[arg(long)]
    gamma: Option<String>,
    /// TOML or JSON experiment config (a previous report.json also works).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Experiments run concurrently in a suite.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Exact residual of the closed-form model solution.
    OracleCheck(Common),
    /// Particular solution, interior expansion, or homogeneous hierarchy.
    Expand(Common),
    /// Finite-difference solve of an IBVP.
    Solve(Common),
    /// Sup deviation over shrinking cubes and its log-log slope.
    Fit(Common),
    /// Discrete maximum principle, M-matrix and barrier sign checks.
    Maxprin(Common),
    /// Growth of |u| against the boundary gauge.
    Growth(Common),
    /// Several experiments from one config, written to one subdirectory each.
    Suite(Common),
    /// Built-in operators, data and barriers.
    ListBuiltins {
        #[arg(long)]
        json: bool,
    },
}

fn parse_gamma(s: &Option<String>) -> Result<Option<Gamma>> {
    s.as_deref().map(|g| g.parse::<Gamma>().map_err(|e| config_error(format!("--gamma {g}: {e}")))).transpose()
}

fn write_outcome(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let report = json!({
        "kind": cfg.kind,
        "name": cfg.name,
        "config": cfg,
        "results": outcome.results,
        "failures": outcome.failures,
        "passed": outcome.failures.is_empty(),
    });
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(dir.join("report.json"), text)?;
    for a in &outcome.artifacts {
        std::fs::write(dir.join(&a.name), &a.contents)?;
    }
    Ok(())
}

fn summarize(name: &str, outcome: &Outcome) {
    if outcome.failures.is_empty() {
        println!("{name}: PASS");
    } else {
        println!("{name}: FAIL");
        for f in &outcome.failures {
            println!("  {}: {}", f.check, f.message);
        }
    }
}

fn run_single(kind: Kind, c: &Common) -> Result<bool> {
    let gamma = parse_gamma(&c.gamma)?;
    let cfg: ExperimentConfig = match &c.config {
        Some(path) => parse(load_value(path)?)?,
        None => ExperimentConfig::default(),
    };
    let cfg = cfg.resolve(kind, gamma, c.seed)?;
    let prepared = prepare(&cfg)?;
    let outcome = prepared.run();
    write_outcome(&c.out, &cfg, &outcome)?;
    summarize(&kind.to_string(), &outcome);
    if kind == Kind::OracleCheck {
        if let Some(r) = outcome.results.get("residual").and_then(|r| r.as_str()) {
            println!("residual: {r}");
        }
    }
    Ok(outcome.failures.is_empty())
}

fn run_suite(c: &Common) -> Result<bool> {
    let path = c.config.as_ref().ok_or_else(|| config_error("suite needs --config"))?;
    let suite: SuiteConfig = parse(load_value(path)?)?;
    let gamma = parse_gamma(&c.gamma)?;
    let mut names = BTreeSet::new();
    let mut jobs = Vec::new();
    for (i, exp) in suite.experiments.into_iter().enumerate() {
        let kind = exp.kind.ok_or_else(|| config_error(format!("experiment {i} has no kind")))?;
        let mut exp = exp;
        if exp.gamma.is_none() {
            exp.gamma = suite.gamma;
        }
        if exp.seed.is_none() {
            exp.seed = suite.seed;
        }
        let name = exp.name.clone().unwrap_or_else(|| format!("{i:02}-{kind}"));
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') || !names.insert(name.clone()) {
            return Err(config_error(format!("experiment name {name:?} is empty, not a plain directory name, or repeated")));
        }
        exp.name = Some(name.clone());
        let cfg = exp.resolve(kind, gamma, c.seed)?;
        let prepared = prepare(&cfg)?;
        jobs.push((name, cfg, prepared));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(c.jobs.max(1)).build()?;
    let outcomes: Vec<Outcome> = pool.install(|| jobs.par_iter().map(|(_, _, p)| p.run()).collect());
    let mut entries = Vec::new();
    for ((name, cfg, _), outcome) in jobs.iter().zip(&outcomes) {
        write_outcome(&c.out.join(name), cfg, outcome)?;
        summarize(name, outcome);
        entries.push(json!({ "name": name, "kind": cfg.kind, "passed": outcome.failures.is_empty(), "failures": outcome.failures }));
    }
    let passed = outcomes.iter().all(|o| o.failures.is_empty());
    let mut text = serde_json::to_string_pretty(&json!({ "experiments": entries, "passed": passed }))?;
    text.push('\n');
    std::fs::create_dir_all(&c.out)?;
    std::fs::write(c.out.join("report.json"), text)?;
    Ok(passed)
}

fn list_builtins(as_json: bool) -> Result<bool> {
    let cat = catalog();
    if as_json {
        println!("{}", serde_json::to_string_pretty(&cat)?);
    } else {
        for e in cat {
            println!("{:<14} {:<9} {}", e.name, e.kind, e.description);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::OracleCheck(c) => run_single(Kind::OracleCheck, c),
        Command::Expand(c) => run_single(Kind::Expand, c),
        Command::Solve(c) => run_single(Kind::Solve, c),
        Command::Fit(c) => run_single(Kind::Fit, c),
        Command::Maxprin(c) => run_single(Kind::Maxprin, c),
        Command::Growth(c) => run_single(Kind::Growth, c),
        Command::Suite(c) => run_suite(c),
        Command::ListBuiltins { json } => list_builtins(*json),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
