use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use tflab_cli::config::{Experiment, ExperimentConfig};
use tflab_cli::report::{Failure, FailureKind};
use tflab_cli::{config_failures, execute, exit, VERSION};

/// Time-frequency experiments on Gabor frames, FIOs and pseudodifferential operators.
#[derive(Parser, Debug)]
#[command(name = "tflab", version = VERSION)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum, required_unless_present = "emit_defaults")]
    experiment: Option<Experiment>,
    /// JSON config; missing fields take the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, overriding `threads`.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the annotated default config of the experiment and exit.
    #[arg(long)]
    emit_defaults: bool,
}

fn fail(code: i32, failures: Vec<Failure>) -> ExitCode {
    let doc = json!({"tool": "tflab", "version": VERSION, "passed": false, "failures": failures});
    eprintln!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("failures serialize")
    );
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let experiment = cli.experiment.unwrap_or(Experiment::Frames);
    if cli.emit_defaults {
        let doc = ExperimentConfig::annotated_defaults(experiment);
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("defaults serialize")
        );
        return ExitCode::SUCCESS;
    }
    let loaded = match &cli.config {
        Some(path) => ExperimentConfig::from_file(experiment, path),
        None => ExperimentConfig::from_value(experiment, json!({})),
    };
    let mut cfg = match loaded {
        Ok(cfg) => cfg,
        Err(problems) => return fail(exit::CONFIG, config_failures(problems)),
    };
    if let Some(dir) = cli.out {
        cfg.output.dir = dir;
    }
    if let Some(k) = cli.threads {
        cfg.threads = Some(k);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let problems = cfg.validate();
    if !problems.is_empty() {
        return fail(exit::CONFIG, config_failures(problems));
    }
    if let Some(k) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            return fail(
                exit::RUNTIME,
                vec![Failure::new(FailureKind::Runtime, "threads", e.to_string())],
            );
        }
    }
    let outcome = execute(&cfg, &cfg.output.dir);
    let s = &outcome.summary;
    println!(
        "{} {}: {} of {} assertions passed, output in {}",
        s.experiment,
        if s.passed { "PASS" } else { "FAIL" },
        s.assertions.iter().filter(|a| a.pass).count(),
        s.assertions.len(),
        cfg.output.dir.display()
    );
    if outcome.code != exit::PASS {
        return fail(outcome.code, s.failures.clone());
    }
    ExitCode::SUCCESS
}
