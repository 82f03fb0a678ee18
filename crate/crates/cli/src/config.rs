//! Command-line arguments and their resolution into a validated run.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::CliError;

/// A complex number on the wire: `a`, `bi`, `a+bi` or `a-bi`, no spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx(pub Complex64);

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Complex64 { re, im } = self.0;
        if im.is_sign_negative() {
            write!(f, "{re}-{}i", -im)
        } else {
            write!(f, "{re}+{im}i")
        }
    }
}

impl FromStr for Cx {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("cannot parse complex number {s:?}; expected a, bi, a+bi or a-bi");
        if s.is_empty() || s.contains(char::is_whitespace) {
            return Err(bad());
        }
        let Some(body) = s.strip_suffix('i') else {
            return match s.parse::<f64>() {
                Ok(re) if re.is_finite() => Ok(Cx(Complex64::new(re, 0.0))),
                _ => Err(bad()),
            };
        };
        // split at the last sign that is not a leading sign or an exponent sign
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let imag = |t: &str| -> Result<f64, String> {
            match t {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                _ => t.parse::<f64>().map_err(|_| bad()),
            }
        };
        let (re, im) = match split {
            Some(k) => (body[..k].parse::<f64>().map_err(|_| bad())?, imag(&body[k..])?),
            None => (0.0, imag(body)?),
        };
        if !(re.is_finite() && im.is_finite()) {
            return Err(bad());
        }
        Ok(Cx(Complex64::new(re, im)))
    }
}

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Comma-separated complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct CxList(pub Vec<Cx>);

impl FromStr for CxList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',').map(Cx::from_str).collect::<Result<_, _>>().map(CxList)
    }
}

/// `start:stop:count`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: Cx,
    pub stop: Cx,
    pub count: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("grid {s:?} must look like start:stop:count"));
        };
        let count: usize = n
            .parse()
            .map_err(|_| format!("grid count {n:?} is not a non-negative integer"))?;
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        Ok(Grid {
            start: a.parse()?,
            stop: b.parse()?,
            count,
        })
    }
}

impl Grid {
    pub fn points(&self) -> Vec<Complex64> {
        if self.count == 1 {
            return vec![self.start.0];
        }
        let step = (self.stop.0 - self.start.0) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.stop.0
                } else {
                    self.start.0 + step * k as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Case1,
    Case2,
    Hitchin,
    Kk,
    PicardOkamoto,
}

impl Family {
    pub fn is_reference(self) -> bool {
        matches!(self, Family::Hitchin | Family::Kk | Family::PicardOkamoto)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Case1 => "case1",
            Family::Case2 => "case2",
            Family::Hitchin => "hitchin",
            Family::Kk => "kk",
            Family::PicardOkamoto => "picard-okamoto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "trischl",
    version,
    about = "Verification suites for triangular Schlesinger systems and Painleve VI families"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    VerifySchlesinger,
    VerifyTau,
    VerifyPvi,
    VerifyReference,
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sum rule, Schlesinger PDEs, zero relation and EPD potential on one curve.
    VerifySchlesinger(RunArgs),
    /// Closed-form tau against its analytic and contour log-derivatives.
    VerifyTau(RunArgs),
    /// PVI residuals and closed-form derivatives of a genus-one family on an x-grid.
    VerifyPvi(RunArgs),
    /// Residual gate for a reference family, with theta and period sanity checks.
    VerifyReference(RunArgs),
    /// Plot data (x, y, y', residual) for a family on an x-grid.
    Sweep(RunArgs),
}

impl Command {
    pub fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::VerifySchlesinger(a) => (CommandKind::VerifySchlesinger, a),
            Command::VerifyTau(a) => (CommandKind::VerifyTau, a),
            Command::VerifyPvi(a) => (CommandKind::VerifyPvi, a),
            Command::VerifyReference(a) => (CommandKind::VerifyReference, a),
            Command::Sweep(a) => (CommandKind::Sweep, a),
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Genus of the curve.
    #[arg(long, default_value_t = 1)]
    pub genus: usize,
    /// Finite branch points, e.g. 0,1,0.3+0.1i.
    #[arg(long, allow_hyphen_values = true)]
    pub branch_points: Option<CxList>,
    /// Power n of v^n du (first eigenvalue set); must be nonzero.
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<i32>,
    /// Cycle coefficients in the loop basis, e.g. 1,0.
    #[arg(long, allow_hyphen_values = true)]
    pub cycle: Option<CxList>,
    /// Solution family; reference families only for verify-pvi, verify-reference and sweep.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Coefficient of the first basis cycle (genus one), or the Picard/Hitchin c1.
    #[arg(long, allow_hyphen_values = true)]
    pub c1: Option<Cx>,
    /// Coefficient of the second basis cycle (genus one), or the Picard/Hitchin c2.
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<Cx>,
    /// Theta characteristic p (Kitaev-Korotkin).
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// Theta characteristic q (Kitaev-Korotkin).
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// start:stop:count, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub x_grid: Option<Grid>,
    /// Base finite-difference step for first derivatives.
    #[arg(long)]
    pub h: Option<f64>,
    /// Pass/fail threshold for the main residuals.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// Initial panels per contour segment.
    #[arg(long)]
    pub quad_panels: Option<usize>,
    /// Maximum number of theta-series terms.
    #[arg(long)]
    pub theta_cap: Option<usize>,
    /// Seed for random curves when no branch points are given.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Fully resolved settings, echoed at the top of every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub genus: usize,
    pub branch_points: Vec<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<i32>,
    pub cycle: Vec<Cx>,
    pub c1: Cx,
    pub c2: Cx,
    pub p: f64,
    pub q: f64,
    pub x_grid: Grid,
    pub h: f64,
    pub tol: f64,
    pub quad_order: usize,
    pub quad_panels: usize,
    pub theta_cap: usize,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn default_tol(command: CommandKind, family: Family) -> f64 {
    match (command, family) {
        (CommandKind::VerifyReference | CommandKind::VerifyPvi | CommandKind::Sweep, Family::Kk) => 1e-4,
        (CommandKind::VerifyReference | CommandKind::VerifyPvi | CommandKind::Sweep, f) if f.is_reference() => 1e-5,
        _ => 1e-6,
    }
}

impl RunConfig {
    pub fn resolve(command: CommandKind, a: RunArgs) -> Result<Self, CliError> {
        let family = a.family.unwrap_or(match command {
            CommandKind::VerifyReference => Family::Hitchin,
            _ => Family::Case1,
        });
        match command {
            CommandKind::VerifySchlesinger | CommandKind::VerifyTau if family.is_reference() => {
                return Err(usage(format!(
                    "{} is not a Schlesinger family; use case1 or case2",
                    family.name()
                )))
            }
            CommandKind::VerifyReference if !family.is_reference() => {
                return Err(usage(format!(
                    "{} is not a reference family; use hitchin, kk or picard-okamoto",
                    family.name()
                )))
            }
            _ => {}
        }
        if a.genus == 0 {
            return Err(usage("genus must be at least 1"));
        }
        let needs_pvi = matches!(
            command,
            CommandKind::VerifyPvi | CommandKind::Sweep | CommandKind::VerifyReference
        );
        if needs_pvi && a.genus != 1 {
            return Err(usage("PVI families live on genus-one curves; use --genus 1"));
        }
        let n = match family {
            Family::Case1 => {
                let n = a.n.unwrap_or(-1);
                if n == 0 {
                    return Err(usage("n must be a nonzero integer"));
                }
                Some(n)
            }
            _ => None,
        };
        let count = 2 * a.genus + 1;
        let (branch_points, seed) = match (&a.branch_points, a.seed) {
            (Some(list), _) => {
                if list.0.len() != count {
                    return Err(usage(format!(
                        "genus {} needs {count} finite branch points, got {}",
                        a.genus,
                        list.0.len()
                    )));
                }
                (list.0.clone(), None)
            }
            (None, None) if a.genus == 1 => (vec![Cx(0.0.into()), Cx(1.0.into()), Cx(0.3.into())], None),
            (None, seed) => {
                let seed = seed.unwrap_or(7);
                let curve = if family == Family::Case2 {
                    trischl::curve::HyperCurve::random_with_origin(a.genus, seed)
                } else {
                    trischl::curve::HyperCurve::random(a.genus, seed)
                };
                (curve.branch_points().iter().copied().map(Cx).collect(), Some(seed))
            }
        };
        let cycle = match &a.cycle {
            Some(list) => {
                if list.0.len() != 2 * a.genus {
                    return Err(usage(format!(
                        "a genus-{} cycle has {} coefficients, got {}",
                        a.genus,
                        2 * a.genus,
                        list.0.len()
                    )));
                }
                list.0.clone()
            }
            None => (0..2 * a.genus)
                .map(|k| Cx(if k == 0 { 1.0 } else { 0.0 }.into()))
                .collect(),
        };
        let (dc1, dc2) = match family {
            Family::Hitchin => (0.3, 0.1),
            Family::PicardOkamoto => (1.0 / 3.0, 0.2),
            _ => (1.0, 0.0),
        };
        let c1 = a.c1.unwrap_or(Cx(dc1.into()));
        let c2 = a.c2.unwrap_or(Cx(dc2.into()));
        let default_grid = match family {
            Family::Kk => "0.3:0.6:4",
            Family::Hitchin | Family::PicardOkamoto => "0.2:0.8:7",
            _ => "0.05:0.95:19",
        };
        let x_grid = a
            .x_grid
            .unwrap_or_else(|| default_grid.parse().expect("default grid parses"));
        let h = a.h.unwrap_or(1e-5);
        if !(h > 0.0 && h < 0.1) {
            return Err(usage(format!("finite-difference step must lie in (0, 0.1), got {h}")));
        }
        let tol = a.tol.unwrap_or(default_tol(command, family));
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(usage(format!("tolerance must be positive, got {tol}")));
        }
        let quad_order = a.quad_order.unwrap_or(16);
        let quad_panels = a.quad_panels.unwrap_or(8);
        let theta_cap = a.theta_cap.unwrap_or(trischl::reference::THETA_MAX_TERMS);
        if theta_cap < 5 {
            return Err(usage(format!("theta cap must be at least 5, got {theta_cap}")));
        }
        let cfg = RunConfig {
            command,
            genus: a.genus,
            branch_points,
            seed,
            family,
            n,
            cycle,
            c1,
            c2,
            p: a.p.unwrap_or(0.17),
            q: a.q.unwrap_or(0.29),
            x_grid,
            h,
            tol,
            quad_order,
            quad_panels,
            theta_cap,
            format: a.format,
            out: a.out,
        };
        cfg.quad().validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn quad(&self) -> trischl::numerics::QuadratureSpec {
        trischl::numerics::QuadratureSpec {
            order: self.quad_order,
            panels: self.quad_panels,
            ..Default::default()
        }
    }

    pub fn diff(&self) -> trischl::numerics::DiffSpec {
        trischl::numerics::DiffSpec::default().with_step(self.h)
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.branch_points.iter().map(|c| c.0).collect()
    }
}
