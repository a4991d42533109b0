//! Result files: CSV tables, machine-readable summaries, gnuplot scripts.
//!
//! CSV output is deterministic down to the byte: numbers go through Rust's
//! shortest round-trip `Display`, with negative zero normalized so reruns
//! diff clean.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Kind;

pub const SCHEMA_VERSION: u32 = 1;

/// Shortest round-trip decimal; -0 collapses to 0.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{}", x)
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let mut first = true;
        for x in row {
            if !first {
                text.push(',');
            }
            text.push_str(&fmt_num(*x));
            first = false;
        }
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    /// What was compared, e.g. "residual <= 1e-10".
    pub op: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    pub fn le(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            op: format!("{} <= {}", fmt_num(value), fmt_num(threshold)),
            passed: value <= threshold,
            value,
            threshold,
        }
    }

    pub fn lt(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            op: format!("{} < {}", fmt_num(value), fmt_num(threshold)),
            passed: value < threshold,
            value,
            threshold,
        }
    }

    pub fn ge(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            op: format!("{} >= {}", fmt_num(value), fmt_num(threshold)),
            passed: value >= threshold,
            value,
            threshold,
        }
    }
}

#[derive(Serialize)]
pub struct Failure {
    pub reason: String,
    pub detail: String,
}

#[derive(Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub tool_version: String,
    pub kind: String,
    pub engine: String,
    pub status: String,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    pub config: BTreeMap<String, String>,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn new(kind: Kind, engine: &str, config: BTreeMap<String, String>) -> Self {
        Summary {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            kind: kind.name().into(),
            engine: engine.into(),
            status: "pass".into(),
            exit_code: 0,
            failure: None,
            config,
            results: serde_json::Value::Object(Default::default()),
            checks: Vec::new(),
        }
    }

    pub fn fail(&mut self, exit_code: u8, reason: &str, detail: String) {
        self.status = "fail".into();
        self.exit_code = exit_code;
        self.failure = Some(Failure {
            reason: reason.into(),
            detail,
        });
    }

    /// Records checks and flips status on the first failed one.
    pub fn push_checks(&mut self, checks: Vec<Check>) {
        for check in checks {
            if !check.passed && self.exit_code == 0 {
                self.fail(
                    1,
                    "check_failed",
                    format!("{}: {}", check.name, check.op),
                );
            }
            self.checks.push(check);
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// A gnuplot script matched to the CSV schema of the run kind.
pub fn plot_script(kind: Kind) -> Option<&'static str> {
    match kind {
        Kind::Dc => Some(
            "set datafile separator ','\n\
             set xlabel 'phase difference'\n\
             set ylabel 'current'\n\
             set grid\n\
             plot 'result.csv' every ::1 using 1:2 with linespoints title 'dc current'\n",
        ),
        Kind::Energy => Some(
            "set datafile separator ','\n\
             set xlabel 'phase difference'\n\
             set ylabel 'coupling energy'\n\
             set grid\n\
             plot 'result.csv' every ::1 using 1:2 with linespoints title 'junction energy'\n",
        ),
        Kind::Ac => Some(
            "set datafile separator ','\n\
             set xlabel 'time'\n\
             set grid\n\
             plot 'result.csv' every ::1 using 1:2 with lines title 'current', \\\n\
             \x20    'result.csv' every ::1 using 1:3 with lines title 'region-1 charge'\n",
        ),
        Kind::Odlro => Some(
            "set datafile separator ','\n\
             set xlabel 'separation'\n\
             set ylabel 'plateau deviation'\n\
             set logscale y\n\
             set grid\n\
             plot 'result.csv' every ::1 using 1:4 with linespoints title 'deviation from plateau'\n",
        ),
        Kind::Oracle => Some(
            "set datafile separator ','\n\
             set xlabel 'phase difference'\n\
             set ylabel 'engine discrepancy'\n\
             set grid\n\
             plot 'result.csv' every ::1 using 1:2 with linespoints title 'exact vs mean-field'\n",
        ),
        Kind::Validate => None,
    }
}
