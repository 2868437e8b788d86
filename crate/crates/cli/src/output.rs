use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde_json::Value;

use crate::Common;

/// A finished run: the JSON report, plus an optional CSV body.
pub struct Success {
    pub report: Value,
    pub csv: Option<String>,
    /// Report destination when `--out` takes the CSV.
    pub report_path: Option<PathBuf>,
    pub warnings: Vec<String>,
}

impl Success {
    pub fn json(report: Value, warnings: Vec<String>) -> Self {
        Self {
            report,
            csv: None,
            report_path: None,
            warnings,
        }
    }
}

pub enum Failure {
    /// Bad flags, unreadable or malformed files, unknown labels.
    Input(String),
    /// Something checked does not hold.
    Violation {
        report: Value,
        witness: Value,
        warnings: Vec<String>,
    },
}

impl Failure {
    pub fn input(e: impl std::fmt::Display) -> Self {
        Failure::Input(e.to_string())
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn render(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"));
    s.push('\n');
    s
}

fn write_to(path: Option<&Path>, body: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| format!("cannot write to stdout: {e}"))
        }
    }
}

fn is_csv(path: Option<&Path>) -> bool {
    path.and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: unknown field ignored: {w}");
    }
}

pub fn finish(result: Result<Success, Failure>, common: &Common) -> ExitCode {
    let out = common.out.as_deref();
    let written = match result {
        Ok(s) => {
            warn(&s.warnings);
            match s.csv {
                Some(csv) if is_csv(out) => {
                    write_to(out, &csv).and_then(|_| write_to(s.report_path.as_deref(), &render(&s.report)))
                }
                _ => write_to(out, &render(&s.report)),
            }
            .map(|_| 0)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Violation {
            report,
            witness,
            warnings,
        }) => {
            warn(&warnings);
            let target = if is_csv(out) { None } else { out };
            write_to(Some(&common.witness), &render(&witness))
                .and_then(|_| write_to(target, &render(&report)))
                .map(|_| {
                    eprintln!("violation found; witness written to {}", common.witness.display());
                    1
                })
        }
    };
    match written {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
