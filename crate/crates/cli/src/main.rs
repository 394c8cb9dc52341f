//! `cat0lab`: runs experiment configs and exposes the reference oracles.
//!
//! Exit status: 0 on success, 2 for a config error, 3 when an experiment
//! refuses uncertified hypotheses, 1 for anything else. Failures print one
//! JSON object per line on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cat0lab_core::experiment::{run, ExperimentConfig, RunOptions};
use cat0lab_core::geometry::{BoundaryPoint, Point};
use cat0lab_core::oracle::{busemann_limit, tree_drift};
use cat0lab_core::LabError;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cat0lab", version, about = "Random walks on CAT(0) model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunArgs,
    },
    /// Run every config matching a glob pattern.
    Sweep {
        pattern: String,
        #[command(flatten)]
        opts: RunArgs,
    },
    /// Reference computations used by the acceptance tests.
    #[command(subcommand)]
    Oracle(Oracle),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Directory receiving `<experiment>-<seed>/report.json` and `series.csv`.
    #[arg(long, default_value = "out")]
    outdir: PathBuf,
    /// Run walk experiments even if admissibility is not certified.
    #[arg(long)]
    allow_uncertified: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Oracle {
    /// Exact expected distance of the simple walk on the 4-regular tree.
    TreeDrift {
        #[arg(long)]
        n: u64,
    },
    /// `d(ray_point(x, ξ, t), z) − t` for JSON-encoded `ξ`, `x`, `z`.
    BusemannLimit {
        #[arg(long)]
        xi: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        z: String,
        #[arg(long, default_value_t = 1e4)]
        t: f64,
    },
}

struct Failure {
    code: u8,
    status: &'static str,
    message: String,
}

impl Failure {
    fn report(&self, source: Option<&Path>) {
        let mut v = json!({ "status": self.status, "message": self.message });
        if let Some(p) = source {
            v["config"] = json!(p.display().to_string());
        }
        eprintln!("{v}");
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        let (code, status) = match e {
            LabError::Config(_) => (2, "config-error"),
            LabError::Refused(_) => (3, "refused"),
            _ => (1, "error"),
        };
        Failure { code, status, message: e.to_string() }
    }
}

fn run_one(path: &Path, opts: &RunArgs) -> Result<PathBuf, Failure> {
    let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    let config = ExperimentConfig::from_json(&text)?;
    let report = run(&config, RunOptions { threads: opts.threads, allow_uncertified: opts.allow_uncertified })?;
    Ok(report.write_artifacts(&opts.outdir)?)
}

fn ok_line(path: &Path, dir: &Path) {
    println!(
        "{}",
        json!({ "status": "ok", "config": path.display().to_string(), "artifacts": dir.display().to_string() })
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, opts } => match run_one(&config, &opts) {
            Ok(dir) => {
                ok_line(&config, &dir);
                ExitCode::SUCCESS
            }
            Err(f) => {
                f.report(Some(&config));
                ExitCode::from(f.code)
            }
        },
        Command::Sweep { pattern, opts } => {
            let paths = match glob::glob(&pattern) {
                Ok(p) => p,
                Err(e) => {
                    let f = Failure { code: 2, status: "config-error", message: format!("bad pattern: {e}") };
                    f.report(None);
                    return ExitCode::from(f.code);
                }
            };
            let mut worst = 0u8;
            let mut seen = 0usize;
            for entry in paths {
                let path = match entry {
                    Ok(p) => p,
                    Err(e) => {
                        Failure { code: 1, status: "error", message: e.to_string() }.report(None);
                        worst = worst.max(1);
                        continue;
                    }
                };
                seen += 1;
                match run_one(&path, &opts) {
                    Ok(dir) => ok_line(&path, &dir),
                    Err(f) => {
                        f.report(Some(&path));
                        worst = worst.max(f.code);
                    }
                }
            }
            if seen == 0 {
                Failure { code: 2, status: "config-error", message: format!("no configs match {pattern}") }
                    .report(None);
                return ExitCode::from(2);
            }
            ExitCode::from(worst)
        }
        Command::Oracle(o) => match oracle(o) {
            Ok(v) => {
                println!("{v}");
                ExitCode::SUCCESS
            }
            Err(f) => {
                f.report(None);
                ExitCode::from(f.code)
            }
        },
    }
}

fn parse_arg<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure { code: 2, status: "config-error", message: format!("{what}: {e}") })
}

fn oracle(o: Oracle) -> Result<serde_json::Value, Failure> {
    Ok(match o {
        Oracle::TreeDrift { n } => json!(tree_drift(n)?),
        Oracle::BusemannLimit { xi, x, z, t } => {
            let xi: BoundaryPoint = parse_arg("xi", &xi)?;
            let x: Point = parse_arg("x", &x)?;
            let z: Point = parse_arg("z", &z)?;
            json!({ "t": t, "value": busemann_limit(&xi, &x, &z, t)? })
        }
    })
}
