//! Command-line front end: argument resolution, suites and reports.

pub mod config;
pub mod report;
pub mod suites;

use std::fs::File;
use std::io::{self, BufWriter, Write};

use config::{Cli, CommandKind, RunConfig};
use report::{Report, SweepReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Numerical(trischl::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad arguments, 3 for non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(e) if e.is_non_convergence() => 3,
            CliError::Numerical(trischl::Error::InvalidInput(_) | trischl::Error::Precondition(_)) => 2,
            _ => 1,
        }
    }
}

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Runs one subcommand and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let (kind, args) = cli.command.split();
    let cfg = RunConfig::resolve(kind, args)?;
    if kind == CommandKind::Sweep {
        let (rows, skipped) = suites::sweep(&cfg)?;
        let report = SweepReport {
            config: &cfg,
            rows,
            skipped,
        };
        let mut out = sink(&cfg)?;
        report.write(&mut out, cfg.format)?;
        out.flush()?;
        eprintln!(
            "sweep: {} rows, {} skipped points",
            report.rows.len(),
            report.skipped.len()
        );
        return Ok(0);
    }
    let records = match kind {
        CommandKind::VerifySchlesinger => suites::schlesinger(&cfg)?,
        CommandKind::VerifyTau => suites::tau(&cfg)?,
        CommandKind::VerifyPvi => suites::pvi(&cfg)?,
        CommandKind::VerifyReference => suites::reference(&cfg)?,
        CommandKind::Sweep => unreachable!(),
    };
    let report = Report::new(&cfg, records);
    let mut out = sink(&cfg)?;
    report.write(&mut out, cfg.format)?;
    out.flush()?;
    let s = report.summary;
    eprintln!(
        "{} checks: {} passed, {} failed, {} skipped",
        s.total, s.passed, s.failed, s.skipped
    );
    Ok(if report.non_convergence() {
        3
    } else if report.all_pass() {
        0
    } else {
        1
    })
}
