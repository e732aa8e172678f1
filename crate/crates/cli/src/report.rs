use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Config,
    Assertion,
    Runtime,
    Io,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub name: String,
    pub message: String,
}

impl Failure {
    pub fn new(kind: FailureKind, name: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind,
            name: name.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub observed: Value,
    pub expected: String,
    pub pass: bool,
}

/// Everything written to `summary.json`. Field order is fixed and no field
/// depends on time or on the machine, so equal configs give equal bytes.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub failures: Vec<Failure>,
    pub files: Vec<String>,
    pub results: Value,
    pub config: Value,
}

/// Collects assertions and output files of one experiment run.
pub struct Recorder {
    dir: PathBuf,
    pub write_bin: bool,
    pub assertions: Vec<Assertion>,
    pub files: Vec<String>,
}

impl Recorder {
    pub fn new(dir: &Path, write_bin: bool) -> Self {
        Self {
            dir: dir.to_path_buf(),
            write_bin,
            assertions: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Creates `name` in the output directory and hands a buffered writer to `body`.
    pub fn file(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> tflab::Result<()>,
    ) -> tflab::Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes a CSV from a header and rows of preformatted cells.
    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> tflab::Result<()> {
        self.file(name, |w| {
            writeln!(w, "{}", header.join(","))?;
            for r in rows {
                writeln!(w, "{}", r.join(","))?;
            }
            Ok(())
        })
    }

    pub fn check(
        &mut self,
        name: &str,
        observed: impl Serialize,
        expected: impl Into<String>,
        pass: bool,
    ) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            observed: serde_json::to_value(observed).unwrap_or(Value::Null),
            expected: expected.into(),
            pass,
        });
    }

    /// `observed ≤ limit`, failing on NaN.
    pub fn at_most(&mut self, name: &str, observed: f64, limit: f64) {
        self.check(name, observed, format!("<= {limit:e}"), observed <= limit);
    }

    /// `observed ≥ limit`, failing on NaN.
    pub fn at_least(&mut self, name: &str, observed: f64, limit: f64) {
        self.check(name, observed, format!(">= {limit:e}"), observed >= limit);
    }

    pub fn failures(&self) -> Vec<Failure> {
        self.assertions
            .iter()
            .filter(|a| !a.pass)
            .map(|a| {
                Failure::new(
                    FailureKind::Assertion,
                    a.name.clone(),
                    format!("observed {}, expected {}", a.observed, a.expected),
                )
            })
            .collect()
    }
}

/// Formats a float for CSV with full round-trip precision.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}
