use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::{json, Value};

use tflab_cli::config::{Experiment, ExperimentConfig};

static NEXT: AtomicUsize = AtomicUsize::new(0);

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "tflab-cli-{}-{tag}-{}",
        std::process::id(),
        NEXT.fetch_add(1, Ordering::Relaxed)
    ));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, doc: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path
}

fn tflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tflab"))
        .args(args)
        .output()
        .unwrap()
}

fn run(experiment: &str, doc: &Value, extra: &[&str], tag: &str) -> (Output, PathBuf) {
    let dir = scratch(tag);
    let cfg = write_config(&dir, doc);
    let out = dir.join("out");
    let mut args = vec![
        experiment,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    (tflab(&args), out)
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| {
        panic!(
            "stderr is not JSON ({e}): {}",
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn small_frames() -> Value {
    json!({"frames": {"signals": 4}})
}

#[test]
fn frames_run_passes_and_writes_outputs() {
    let (o, out) = run("frames", &small_frames(), &[], "frames");
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = summary(&out);
    assert_eq!(s["passed"], json!(true));
    assert_eq!(s["experiment"], json!("frames"));
    assert_eq!(s["version"], json!(env!("CARGO_PKG_VERSION")));
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);
    for f in s["files"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).is_file(), "missing {f}");
    }
    assert!(out.join("reconstruction.csv").is_file());
}

#[test]
fn binary_outputs_on_request() {
    let mut doc = small_frames();
    doc["output"] = json!({"write_bin": true});
    let (o, out) = run("frames", &doc, &[], "bin");
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("dual_window.bin").is_file());
}

#[test]
fn output_is_deterministic_across_runs_and_thread_counts() {
    let doc = json!({"grid": {"l": 8.0, "n": 64}, "lattice": {"radius": 2.0}, "compactness": {"sections": [1, 2]}});
    let (a, out_a) = run("compactness", &doc, &["--threads", "1"], "det-a");
    let (b, out_b) = run("compactness", &doc, &["--threads", "3"], "det-b");
    assert_eq!(a.status.code(), b.status.code());
    for name in ["summary.json", "per_gamma.csv", "svals.csv", "probes.csv"] {
        assert_eq!(
            fs::read(out_a.join(name)).unwrap(),
            fs::read(out_b.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn compactness_of_constant_psdo_is_non_compact() {
    let doc = json!({
        "grid": {"l": 16.0, "n": 256},
        "symbol": {"preset": "one"},
        "compactness": {"operator": {"kind": "psdo", "form": "kn"}, "expect": "non-compact"},
    });
    let (o, out) = run("compactness", &doc, &[], "psdo-one");
    let s = summary(&out);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        serde_json::to_string_pretty(&s["assertions"]).unwrap()
    );
    assert_eq!(s["results"]["diagnostic"]["verdict"], json!("non-compact"));
}

#[test]
fn twopath_chirp_agrees() {
    let doc = json!({"lattice": {"radius": 2.0}});
    let (o, out) = run("twopath", &doc, &[], "twopath");
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(summary(&out)["config"]["phase"]["preset"], json!("chirp"));
}

#[test]
fn mixed_accepts_affine_maps_and_rejects_chirp() {
    let (o, out) = run("mixed", &json!({}), &[], "mixed");
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = summary(&out);
    assert!(s["results"]["counterexample"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["rejected"] == json!(true)));
}

#[test]
fn failed_assertion_exits_one_with_failure_list() {
    let mut doc = small_frames();
    doc["frames"]["tol"] = json!(1e-30);
    let (o, out) = run("frames", &doc, &[], "fail");
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_json(&o);
    let failures = err["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0]["kind"], json!("assertion"));
    assert_eq!(failures[0]["name"], json!("max reconstruction error"));
    let s = summary(&out);
    assert_eq!(s["passed"], json!(false));
    assert_eq!(s["failures"], err["failures"]);
}

#[test]
fn invalid_config_exits_two_with_every_problem() {
    let doc = json!({"lattice": {"alpha": -1.0}, "grid": {"n": 7}});
    let (o, out) = run("frames", &doc, &[], "invalid");
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_json(&o);
    let msgs: Vec<&str> = err["failures"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["message"].as_str().unwrap())
        .collect();
    assert!(msgs.iter().any(|m| m.contains("lattice.alpha")), "{msgs:?}");
    assert!(msgs.iter().any(|m| m.contains("grid.n")), "{msgs:?}");
    assert!(err["failures"]
        .as_array()
        .unwrap()
        .iter()
        .all(|f| f["kind"] == json!("config")));
    assert!(!out.exists());
}

#[test]
fn unknown_field_is_a_config_error() {
    let (o, _) = run("frames", &json!({"lattice": {"alhpa": 0.5}}), &[], "typo");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["failures"][0]["message"]
        .as_str()
        .unwrap()
        .contains("alhpa"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = tflab(&["frames", "--config", "/nonexistent/tflab.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_experiment_is_rejected() {
    let o = tflab(&["spectrogram"]);
    assert!(!o.status.success());
    let o = tflab(&[]);
    assert!(!o.status.success());
}

#[test]
fn emitted_defaults_round_trip() {
    for e in ["frames", "decay", "twopath", "compactness", "psdo", "mixed"] {
        let o = tflab(&["--emit-defaults", e]);
        assert!(o.status.success());
        let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(doc["_notes"].is_object());
        let experiment: Experiment = serde_json::from_value(json!(e)).unwrap();
        let parsed = ExperimentConfig::from_value(experiment, doc).unwrap();
        assert_eq!(parsed, ExperimentConfig::defaults(experiment), "{e}");
    }
    let dir = scratch("emit");
    let o = tflab(&["--emit-defaults", "mixed"]);
    let cfg = dir.join("mixed.json");
    fs::write(&cfg, &o.stdout).unwrap();
    let out = dir.join("out");
    let o = tflab(&[
        "mixed",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        summary(&out)["config_hash"],
        json!(ExperimentConfig::defaults(Experiment::Mixed).hash())
    );
}

#[test]
fn flags_override_config() {
    let mut doc = small_frames();
    doc["seed"] = json!(5);
    let (_, out_a) = run("frames", &doc, &[], "seed-a");
    let (_, out_b) = run("frames", &doc, &["--seed", "6"], "seed-b");
    let (a, b) = (summary(&out_a), summary(&out_b));
    assert_eq!(a["seed"], json!(5));
    assert_eq!(b["seed"], json!(6));
    assert_ne!(a["config_hash"], b["config_hash"]);
}

#[test]
fn zero_threads_is_rejected() {
    let (o, _) = run("frames", &small_frames(), &["--threads", "0"], "threads");
    assert_eq!(o.status.code(), Some(2));
}
