//! Batch front-end: scenario files in, CSV/JSON artifacts out.

mod compare;
mod scenario;
mod tasks;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "horizonlab", about = "Analogue-horizon scenario runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its artifacts.
    Run {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory (overrides the scenario's own `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override for randomized sub-tasks.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for independent sub-runs.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Numerically diff the artifacts of two runs of the same task.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        /// Max-abs difference accepted as equal.
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
    },
    /// Print the scenario JSON schema.
    Schema,
}

fn log_level() -> u8 {
    match std::env::var("HORIZONLAB_LOG").as_deref() {
        Ok("debug") => 2,
        Ok("info") => 1,
        _ => 0,
    }
}

macro_rules! info {
    ($($arg:tt)*) => {
        if log_level() >= 1 { eprintln!($($arg)*); }
    };
}

#[derive(Serialize)]
struct Summary {
    task: String,
    seed: u64,
    status: String,
    artifacts: Vec<String>,
    metrics: BTreeMap<String, serde_json::Value>,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Schema => {
            println!("{}", scenario::SCHEMA);
            ExitCode::SUCCESS
        }
        Command::Run { scenario, out, seed, threads } => run(&scenario, out, seed, threads),
        Command::Compare { run_a, run_b, tolerance } => run_compare(&run_a, &run_b, tolerance),
    }
}

fn run(path: &Path, out: Option<PathBuf>, seed: Option<u64>, threads: usize) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let doc: serde_json::Value = match serde_json::from_str(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {} is not valid JSON: {e}", path.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let errs = scenario::validate(&doc);
    if !errs.is_empty() {
        eprintln!("error: scenario fails validation ({} problems):", errs.len());
        for e in &errs {
            eprintln!("  - {e}");
        }
        return ExitCode::from(EXIT_VALIDATION);
    }
    let mut sc = scenario::load(doc);
    if let Some(s) = seed {
        sc.seed = s;
    }
    let out_dir = out
        .or_else(|| sc.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = fs::create_dir_all(&out_dir) {
        eprintln!("error: cannot create {}: {e}", out_dir.display());
        return ExitCode::from(EXIT_VALIDATION);
    }

    info!("running task `{}` into {}", sc.task, out_dir.display());
    match tasks::run_task(&sc, &out_dir, threads.max(1)) {
        Ok(output) => {
            let summary = Summary {
                task: sc.task.clone(),
                seed: sc.seed,
                status: "ok".into(),
                artifacts: output.artifacts,
                metrics: output.metrics,
            };
            let text = serde_json::to_string_pretty(&summary).unwrap();
            if let Err(e) = tasks::write_atomic(&out_dir, "summary.json", text.as_bytes()) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_NUMERICAL);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            // numerical failure: leave a diagnostics file next to whatever
            // partial artifacts exist
            let diag = json!({
                "task": sc.task,
                "status": "failed",
                "error": format!("{e:#}"),
            });
            let _ = tasks::write_atomic(
                &out_dir,
                "diagnostics.json",
                serde_json::to_string_pretty(&diag).unwrap().as_bytes(),
            );
            eprintln!("error: task failed: {e:#}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn run_compare(a: &Path, b: &Path, tolerance: f64) -> ExitCode {
    match compare::compare(a, b, tolerance) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            if report.within_tolerance {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
