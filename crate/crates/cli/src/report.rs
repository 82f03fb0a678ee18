//! Check records and their JSON / CSV serialization.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::config::{Cx, Format, RunConfig};
use crate::CliError;

pub type Inputs = BTreeMap<String, Value>;

/// One verified identity at one set of inputs.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub inputs: Inputs,
    /// `null` in JSON when the check could not be evaluated.
    pub residual: Option<f64>,
    pub tol: f64,
    pub pass: bool,
    pub skipped: bool,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub non_convergence: bool,
}

impl CheckRecord {
    pub fn measured(check_id: &str, inputs: Inputs, residual: f64, tol: f64) -> Self {
        Self {
            check_id: check_id.into(),
            inputs,
            residual: residual.is_finite().then_some(residual),
            tol,
            pass: residual < tol,
            skipped: false,
            notes: Vec::new(),
            non_convergence: false,
        }
    }

    pub fn skipped(check_id: &str, inputs: Inputs, tol: f64, note: String) -> Self {
        Self {
            check_id: check_id.into(),
            inputs,
            residual: None,
            tol,
            pass: false,
            skipped: true,
            notes: vec![format!("skipped: {note}")],
            non_convergence: false,
        }
    }

    /// A numerical failure turned into a failing record.
    pub fn failed(check_id: &str, inputs: Inputs, tol: f64, err: &trischl::Error) -> Self {
        Self {
            check_id: check_id.into(),
            inputs,
            residual: None,
            tol,
            pass: false,
            skipped: false,
            notes: vec![format!("error: {err}")],
            non_convergence: err.is_non_convergence(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    fn sort_key(&self) -> (String, String) {
        (
            self.check_id.clone(),
            serde_json::to_string(&self.inputs).unwrap_or_default(),
        )
    }
}

/// Builds an input map from `(key, value)` pairs.
pub fn inputs<const N: usize>(pairs: [(&str, Value); N]) -> Inputs {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn cx(c: num_complex::Complex64) -> Value {
    Value::String(Cx(c).to_string())
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub config: &'a RunConfig,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl<'a> Report<'a> {
    pub fn new(config: &'a RunConfig, mut records: Vec<CheckRecord>) -> Self {
        records.sort_by_cached_key(CheckRecord::sort_key);
        let skipped = records.iter().filter(|r| r.skipped).count();
        let passed = records.iter().filter(|r| !r.skipped && r.pass).count();
        let summary = Summary {
            total: records.len(),
            passed,
            failed: records.len() - skipped - passed,
            skipped,
        };
        Self {
            config,
            records,
            summary,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn non_convergence(&self) -> bool {
        self.records.iter().any(|r| r.non_convergence)
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> Result<(), CliError> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["check_id", "inputs", "residual", "tol", "pass", "skipped", "notes"])?;
                for r in &self.records {
                    let inputs = r
                        .inputs
                        .iter()
                        .map(|(k, v)| format!("{k}={}", v.as_str().map_or_else(|| v.to_string(), str::to_string)))
                        .collect::<Vec<_>>()
                        .join(";");
                    w.write_record([
                        r.check_id.clone(),
                        inputs,
                        r.residual.map_or_else(String::new, |v| format!("{v:e}")),
                        format!("{:e}", r.tol),
                        r.pass.to_string(),
                        r.skipped.to_string(),
                        r.notes.join(" | "),
                    ])?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

/// One plot-data row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub x: Cx,
    pub re_y: f64,
    pub im_y: f64,
    pub re_dy: f64,
    pub im_dy: f64,
    pub residual: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedPoint {
    pub x: Cx,
    pub note: String,
}

#[derive(Debug, Serialize)]
pub struct SweepReport<'a> {
    pub config: &'a RunConfig,
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedPoint>,
}

impl SweepReport<'_> {
    pub fn write(&self, out: &mut dyn Write, format: Format) -> Result<(), CliError> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                for row in &self.rows {
                    w.serialize(row)?;
                }
                if self.rows.is_empty() {
                    w.write_record(["x", "re_y", "im_y", "re_dy", "im_dy", "residual", "note"])?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}
