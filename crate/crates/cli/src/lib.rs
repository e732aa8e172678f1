//! Experiment runner behind the `tflab` binary: configuration, execution and
//! the report written to the output directory.

use std::fs;
use std::path::Path;

pub mod config;
pub mod experiments;
pub mod report;

use config::ExperimentConfig;
use report::{Failure, FailureKind, Recorder, Summary};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ASSERTION: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const RUNTIME: i32 = 3;
}

/// A finished run: the summary that was written and the exit code.
pub struct Outcome {
    pub summary: Summary,
    pub code: i32,
}

/// Runs the experiment of `cfg`, writing its files and `summary.json` into
/// `out`. Library errors become runtime failures in the summary instead of
/// aborting, so the directory always explains a nonzero exit.
pub fn execute(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let mut summary = Summary {
        tool: "tflab",
        version: VERSION,
        experiment: cfg.experiment.name(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        passed: false,
        assertions: Vec::new(),
        failures: Vec::new(),
        files: Vec::new(),
        results: serde_json::Value::Null,
        config: cfg.canonical(),
    };
    if let Err(e) = fs::create_dir_all(out) {
        summary.failures.push(Failure::new(
            FailureKind::Io,
            "output directory",
            format!("{}: {e}", out.display()),
        ));
        return Outcome {
            summary,
            code: exit::RUNTIME,
        };
    }
    let mut rec = Recorder::new(out, cfg.output.write_bin);
    let code = match experiments::run(cfg, &mut rec) {
        Ok(results) => {
            summary.results = results;
            summary.failures = rec.failures();
            if summary.failures.is_empty() {
                exit::PASS
            } else {
                exit::ASSERTION
            }
        }
        Err(e) => {
            summary.failures = rec.failures();
            summary.failures.push(Failure::new(
                FailureKind::Runtime,
                cfg.experiment.name(),
                e.to_string(),
            ));
            exit::RUNTIME
        }
    };
    summary.passed = code == exit::PASS;
    summary.assertions = rec.assertions;
    summary.files = rec.files;
    summary.files.push("summary.json".into());
    let written = serde_json::to_string_pretty(&summary)
        .map_err(|e| e.to_string())
        .and_then(|s| fs::write(out.join("summary.json"), s + "\n").map_err(|e| e.to_string()));
    if let Err(e) = written {
        summary
            .failures
            .push(Failure::new(FailureKind::Io, "summary.json", e));
        summary.passed = false;
        return Outcome {
            summary,
            code: exit::RUNTIME,
        };
    }
    Outcome { summary, code }
}

/// Config problems as structured failures.
pub fn config_failures(problems: Vec<String>) -> Vec<Failure> {
    problems
        .into_iter()
        .map(|m| Failure::new(FailureKind::Config, "config", m))
        .collect()
}
