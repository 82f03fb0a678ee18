//! Upper-triangular solutions of the rank-two Schlesinger system built from
//! hyperelliptic periods, and numerical checks of the identities they obey.
//!
//! Two eigenvalue sets are supported:
//!
//! * `Case1 { n }`: `alpha_i = n/4`, `a_i = \oint v^n du / (u - u_i)`;
//! * `Case2`: `u_1 = 0`, `alpha = (1/4, -1/4, ..., -1/4)`,
//!   `a_1 = -\oint du/v`, `a_i = \oint du/v + u_i \oint du / ((u - u_i) v)`.
//!
//! Indices are zero-based in code, so `u_1` is `branch_points()[0]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::curve::{ContourSet, Cycle, HyperCurve, IntegrandSpec};
use crate::error::{Error, Result};
use crate::numerics::{
    central_derivative, central_derivatives, integrate_path, mixed_partial, DiffSpec, QuadratureSpec,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "lowercase")]
pub enum SolutionCase {
    Case1 { n: i32 },
    Case2,
}

impl SolutionCase {
    pub fn validate(&self) -> Result<()> {
        match self {
            SolutionCase::Case1 { n: 0 } => Err(Error::InvalidInput("n must be nonzero".into())),
            _ => Ok(()),
        }
    }

    /// Eigenvalues `alpha_1 .. alpha_{2g+1}`.
    pub fn alphas(&self, genus: usize) -> Vec<Rational64> {
        let count = 2 * genus + 1;
        match *self {
            SolutionCase::Case1 { n } => vec![Rational64::new(n.into(), 4); count],
            SolutionCase::Case2 => (0..count)
                .map(|i| Rational64::new(if i == 0 { 1 } else { -1 }, 4))
                .collect(),
        }
    }

    pub fn alpha_inf(&self, genus: usize) -> Rational64 {
        let g = genus as i64;
        match *self {
            SolutionCase::Case1 { n } => Rational64::new(-i64::from(n) * (2 * g + 1), 4),
            SolutionCase::Case2 => Rational64::new(2 * g - 1, 4),
        }
    }

    /// Positive even `n` makes every integrand polynomial, so all `a_i`
    /// vanish identically.
    pub fn is_degenerate(&self) -> bool {
        matches!(*self, SolutionCase::Case1 { n } if n > 0 && n % 2 == 0)
    }

    /// Branch points that may be moved; `u_1` is frozen at zero in Case 2.
    pub fn free_indices(&self, genus: usize) -> std::ops::Range<usize> {
        match self {
            SolutionCase::Case1 { .. } => 0..2 * genus + 1,
            SolutionCase::Case2 => 1..2 * genus + 1,
        }
    }

    fn check_curve(&self, curve: &HyperCurve) -> Result<()> {
        self.validate()?;
        if matches!(self, SolutionCase::Case2) && curve.branch_points()[0] != ZERO {
            return Err(Error::Precondition(format!(
                "the second eigenvalue set needs u_1 = 0, got {}",
                curve.branch_points()[0]
            )));
        }
        Ok(())
    }

    fn specs(&self, genus: usize) -> Vec<IntegrandSpec> {
        let count = 2 * genus + 1;
        match *self {
            SolutionCase::Case1 { n } => (0..count).map(|i| IntegrandSpec::power(n).with_pole(i)).collect(),
            SolutionCase::Case2 => std::iter::once(IntegrandSpec::holomorphic())
                .chain((1..count).map(|i| IntegrandSpec::holomorphic().with_pole(i)))
                .collect(),
        }
    }

    /// Coefficients `a_i` on a fixed contour set.
    pub fn coefficients_on(
        &self,
        contours: &ContourSet,
        curve: &HyperCurve,
        cycle: &Cycle,
        quad: &QuadratureSpec,
    ) -> Result<Vec<Complex64>> {
        let raw = contours.periods(curve, cycle, &self.specs(curve.genus()), quad)?;
        Ok(match self {
            SolutionCase::Case1 { .. } => raw,
            SolutionCase::Case2 => {
                let w = raw[0];
                std::iter::once(-w)
                    .chain(curve.branch_points()[1..].iter().zip(&raw[1..]).map(|(u, p)| w + u * p))
                    .collect()
            }
        })
    }

    /// The potential `f` with `a_i = df/du_i`: `-(2/n) \oint v^n du` or
    /// `2 \oint u du / v`.
    pub fn potential_on(
        &self,
        contours: &ContourSet,
        curve: &HyperCurve,
        cycle: &Cycle,
        quad: &QuadratureSpec,
    ) -> Result<Complex64> {
        let (spec, factor) = match *self {
            SolutionCase::Case1 { n } => (IntegrandSpec::power(n), -2.0 / f64::from(n)),
            SolutionCase::Case2 => (IntegrandSpec::holomorphic().with_u_power(1), 2.0),
        };
        Ok(factor * contours.periods(curve, cycle, std::slice::from_ref(&spec), quad)?[0])
    }
}

/// Eigenvalues and off-diagonal coefficients of an upper-triangular solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangularSolution {
    pub case: SolutionCase,
    pub alphas: Vec<Rational64>,
    pub alpha_inf: Rational64,
    pub a: Vec<Complex64>,
    pub cycle: Cycle,
    pub curve: HyperCurve,
}

impl TriangularSolution {
    pub fn build(case: SolutionCase, curve: &HyperCurve, cycle: &Cycle, quad: &QuadratureSpec) -> Result<Self> {
        case.check_curve(curve)?;
        let contours = ContourSet::new(curve)?;
        let a = case.coefficients_on(&contours, curve, cycle, quad)?;
        let g = curve.genus();
        Ok(Self {
            case,
            alphas: case.alphas(g),
            alpha_inf: case.alpha_inf(g),
            a,
            cycle: cycle.clone(),
            curve: curve.clone(),
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.case.is_degenerate()
    }

    pub fn alphas_f64(&self) -> Vec<f64> {
        self.alphas.iter().map(rational_f64).collect()
    }

    /// `|sum a_i| / max(1, max |a_i|)`.
    pub fn sum_residual(&self) -> f64 {
        let sum: Complex64 = self.a.iter().sum();
        sum.norm() / self.scale()
    }

    /// `max(1, max |a_i|)`.
    pub fn scale(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(1.0, f64::max)
    }
}

pub fn case1_coefficients(
    curve: &HyperCurve,
    cycle: &Cycle,
    n: i32,
    quad: &QuadratureSpec,
) -> Result<TriangularSolution> {
    TriangularSolution::build(SolutionCase::Case1 { n }, curve, cycle, quad)
}

pub fn case2_coefficients(curve: &HyperCurve, cycle: &Cycle, quad: &QuadratureSpec) -> Result<TriangularSolution> {
    TriangularSolution::build(SolutionCase::Case2, curve, cycle, quad)
}

pub(crate) fn rational_f64(r: &Rational64) -> f64 {
    r.to_f64().expect("small rationals convert")
}

/// A complex 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub fn upper(alpha: Complex64, a: Complex64) -> Self {
        Mat2([[alpha, a], [ZERO, -alpha]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][0] * other.0[0][c] + self.0[r][1] * other.0[1][c];
            }
        }
        out
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] += other.0[r][c];
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                m = m.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueMatrices {
    pub finite: Vec<Mat2>,
    pub infinity: Mat2,
}

impl ResidueMatrices {
    /// `A(u) = sum_i A^(i) / (u - u_i)`.
    pub fn at(&self, points: &[Complex64], u: Complex64) -> Mat2 {
        self.finite
            .iter()
            .zip(points)
            .fold(Mat2::zero(), |acc, (m, p)| acc.add(&m.scale(1.0 / (u - p))))
    }
}

/// `A^(i) = [[alpha_i, a_i], [0, -alpha_i]]` and `A^(inf) = -sum A^(i)`,
/// checked against `diag(alpha_inf, -alpha_inf)`.
pub fn residue_matrices(sol: &TriangularSolution) -> Result<ResidueMatrices> {
    let finite: Vec<Mat2> = sol
        .alphas_f64()
        .iter()
        .zip(&sol.a)
        .map(|(&al, &a)| Mat2::upper(al.into(), a))
        .collect();
    let infinity = finite
        .iter()
        .fold(Mat2::zero(), |acc, m| acc.add(m))
        .scale((-1.0).into());
    let ai = rational_f64(&sol.alpha_inf);
    let expected = Mat2([[ai.into(), ZERO], [ZERO, (-ai).into()]]);
    let gap = infinity.max_abs_diff(&expected);
    if gap > 1e-9 * sol.scale() {
        return Err(Error::Consistency(format!(
            "-sum A^(i) differs from diag({ai}, {}) by {gap:e}",
            -ai
        )));
    }
    Ok(ResidueMatrices { finite, infinity })
}

/// One `(i, j)` entry of a derivative check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub i: usize,
    pub j: usize,
    pub residual: f64,
    /// Finite-difference error estimate, normalized like `residual`.
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeReport {
    pub case: SolutionCase,
    pub pairs: Vec<PairResidual>,
    pub max_residual: f64,
    pub sum_residual: f64,
    pub degenerate: bool,
}

fn others(points: &[Complex64], j: usize) -> Vec<Complex64> {
    points
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != j)
        .map(|(_, &p)| p)
        .collect()
}

fn max_of(pairs: &[PairResidual]) -> f64 {
    pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
}

/// Checks `da_i/du_j = 2 (alpha_j a_i - alpha_i a_j) / (u_j - u_i)` for every
/// admissible `i != j` by Richardson central differences on frozen contours.
/// Residuals are divided by `max(1, max |a_i|)`.
pub fn verify_pde(
    case: SolutionCase,
    cycle: &Cycle,
    curve: &HyperCurve,
    quad: &QuadratureSpec,
    diff: &DiffSpec,
) -> Result<PdeReport> {
    let sol = TriangularSolution::build(case, curve, cycle, quad)?;
    let contours = ContourSet::new(curve)?;
    let points = curve.branch_points();
    let alphas = sol.alphas_f64();
    let scale = sol.scale();
    let mut pairs = Vec::new();
    for j in case.free_indices(curve.genus()) {
        let d = central_derivatives(
            |uj| case.coefficients_on(&contours, &curve.with_point(j, uj)?, cycle, quad),
            points[j],
            1,
            diff,
            &others(points, j),
        )?;
        for (i, di) in d.iter().enumerate() {
            if i == j {
                continue;
            }
            let rhs = 2.0 * (alphas[j] * sol.a[i] - alphas[i] * sol.a[j]) / (points[j] - points[i]);
            pairs.push(PairResidual {
                i,
                j,
                residual: (di.value - rhs).norm() / scale,
                estimate: di.error / scale,
            });
        }
    }
    Ok(PdeReport {
        case,
        max_residual: max_of(&pairs),
        sum_residual: sol.sum_residual(),
        pairs,
        degenerate: case.is_degenerate(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpdReport {
    pub potential: Complex64,
    /// `|df/du_i - a_i|` per admissible `i`, normalized.
    pub gradient: Vec<PairResidual>,
    /// Cross-derivative residuals of the EPD equation per admissible pair.
    pub cross: Vec<PairResidual>,
    pub max_gradient: f64,
    pub max_cross: f64,
    pub degenerate: bool,
}

/// The potential `f` of a solution, with finite-difference checks of
/// `a_i = df/du_i` and of the Euler-Poisson-Darboux equation
/// `d^2 f / du_i du_j = (beta_j df/du_i - beta_i df/du_j) / (u_i - u_j)`,
/// `beta_i = -2 alpha_i`.
pub fn epd_potential(
    sol: &TriangularSolution,
    quad: &QuadratureSpec,
    diff: &DiffSpec,
    second: &DiffSpec,
) -> Result<EpdReport> {
    let case = sol.case;
    let curve = &sol.curve;
    let cycle = &sol.cycle;
    let contours = ContourSet::new(curve)?;
    let points = curve.branch_points();
    let scale = sol.scale();
    let betas: Vec<f64> = sol.alphas_f64().iter().map(|a| -2.0 * a).collect();
    let potential = case.potential_on(&contours, curve, cycle, quad)?;

    let mut gradient = Vec::new();
    for i in case.free_indices(curve.genus()) {
        let d = central_derivative(
            |ui| case.potential_on(&contours, &curve.with_point(i, ui)?, cycle, quad),
            points[i],
            1,
            diff,
            &others(points, i),
        )?;
        gradient.push(PairResidual {
            i,
            j: i,
            residual: (d.value - sol.a[i]).norm() / scale,
            estimate: d.error / scale,
        });
    }

    let mut cross = Vec::new();
    let free: Vec<usize> = case.free_indices(curve.genus()).collect();
    for (x, &i) in free.iter().enumerate() {
        for &j in &free[x + 1..] {
            let d = mixed_partial(
                |ui, uj| {
                    let moved = curve.with_point(i, ui)?.with_point(j, uj)?;
                    case.potential_on(&contours, &moved, cycle, quad)
                },
                (points[i], points[j]),
                second,
            )?;
            let rhs = (betas[j] * sol.a[i] - betas[i] * sol.a[j]) / (points[i] - points[j]);
            cross.push(PairResidual {
                i,
                j,
                residual: (d.value - rhs).norm() / scale,
                estimate: d.error / scale,
            });
        }
    }
    Ok(EpdReport {
        potential,
        max_gradient: max_of(&gradient),
        max_cross: max_of(&cross),
        gradient,
        cross,
        degenerate: case.is_degenerate(),
    })
}

/// EPD residual of `f = prod (u - u_i)^(1/2)` (all `beta_i = -1/2`) as a
/// function of the `u_i` at the probe `u`, using finite differences only.
/// Returns the largest residual over pairs, normalized by
/// `max(1, max |df/du_i|)`.
pub fn separable_solution_check(
    points: &[Complex64],
    probe: Complex64,
    diff: &DiffSpec,
    second: &DiffSpec,
) -> Result<f64> {
    for (i, p) in points.iter().enumerate() {
        if points[i + 1..].contains(p) {
            return Err(Error::Precondition(format!("branch point {p} is repeated")));
        }
        if *p == probe {
            return Err(Error::Precondition(format!(
                "probe {probe} coincides with a branch point"
            )));
        }
    }
    let f = |pts: &[Complex64]| -> Complex64 { pts.iter().map(|p| (probe - p).sqrt()).product() };
    let moved = |i: usize, v: Complex64| {
        let mut pts = points.to_vec();
        pts[i] = v;
        pts
    };
    let grad: Vec<Complex64> = (0..points.len())
        .map(|i| central_derivative(|v| Ok(f(&moved(i, v))), points[i], 1, diff, &[probe]).map(|d| d.value))
        .collect::<Result<_>>()?;
    let scale = grad.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let beta = -0.5;
    let mut worst: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = mixed_partial(
                |a, b| {
                    let mut pts = points.to_vec();
                    pts[i] = a;
                    pts[j] = b;
                    Ok(f(&pts))
                },
                (points[i], points[j]),
                second,
            )?;
            let rhs = (beta * grad[i] - beta * grad[j]) / (points[i] - points[j]);
            worst = worst.max((d.value - rhs).norm() / scale);
        }
    }
    Ok(worst)
}

/// `|(2g - 1) \oint du/v + sum_i u_i \oint du / ((u - u_i) v)|` divided by
/// the largest term (at least 1). Holds on any curve.
pub fn verify_zero_relation(curve: &HyperCurve, cycle: &Cycle, quad: &QuadratureSpec) -> Result<f64> {
    let count = curve.branch_points().len();
    let specs: Vec<IntegrandSpec> = std::iter::once(IntegrandSpec::holomorphic())
        .chain((0..count).map(|i| IntegrandSpec::holomorphic().with_pole(i)))
        .collect();
    let p = ContourSet::new(curve)?.periods(curve, cycle, &specs, quad)?;
    let first = (2 * curve.genus() - 1) as f64 * p[0];
    let terms: Vec<Complex64> = std::iter::once(first)
        .chain(curve.branch_points().iter().zip(&p[1..]).map(|(u, q)| u * q))
        .collect();
    let sum: Complex64 = terms.iter().sum();
    let scale = terms.iter().map(|z| z.norm()).fold(1.0, f64::max);
    Ok(sum.norm() / scale)
}

/// Closed-form tau function with the constant factor set to 1:
/// `V^(n^2/8)` for Case 1 (`V` the Vandermonde product `prod_{k<i} (u_i - u_k)`)
/// and `(prod_{2<=k<i} (u_i - u_k) / prod_{k>=2} u_k)^(1/8)` for Case 2.
/// Principal branch.
pub fn tau_value(case: SolutionCase, points: &[Complex64]) -> Result<Complex64> {
    case.validate()?;
    for (i, p) in points.iter().enumerate() {
        if points[i + 1..].contains(p) {
            return Err(Error::Domain(format!("branch point {p} is repeated")));
        }
    }
    let vandermonde = |pts: &[Complex64]| -> Complex64 {
        let mut v = Complex64::new(1.0, 0.0);
        for i in 0..pts.len() {
            for k in 0..i {
                v *= pts[i] - pts[k];
            }
        }
        v
    };
    let (base, power) = match case {
        SolutionCase::Case1 { n } => (vandermonde(points), f64::from(n * n) / 8.0),
        SolutionCase::Case2 => {
            if points.first() != Some(&ZERO) {
                return Err(Error::Precondition("the second eigenvalue set needs u_1 = 0".into()));
            }
            let rest = &points[1..];
            let denom: Complex64 = rest.iter().product();
            (vandermonde(rest) / denom, 0.125)
        }
    };
    Ok((base.ln() * power).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauEntry {
    pub j: usize,
    /// Finite difference of `ln tau`.
    pub finite_difference: Complex64,
    /// `sum_{k != j} 2 alpha_j alpha_k / (u_j - u_k)`.
    pub analytic: Complex64,
    /// `(1/2 pi i) \oint (1/2) tr A(u)^2 du` on a small circle around `u_j`.
    pub contour: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub tau: Complex64,
    pub entries: Vec<TauEntry>,
    pub max_fd_vs_analytic: f64,
    pub max_analytic_vs_contour: f64,
}

/// Three-way check of `d ln tau / du_j = (1/2) res_{u_j} tr A^2`.
pub fn verify_tau(sol: &TriangularSolution, quad: &QuadratureSpec, diff: &DiffSpec) -> Result<TauReport> {
    let case = sol.case;
    let points = sol.curve.branch_points();
    let tau = tau_value(case, points)?;
    if tau.norm() == 0.0 || !tau.is_finite() {
        return Err(Error::Domain(format!("tau = {tau} on distinct branch points")));
    }
    let alphas = sol.alphas_f64();
    let matrices = residue_matrices(sol)?;
    let mut entries = Vec::new();
    for j in case.free_indices(sol.curve.genus()) {
        let rest = others(points, j);
        let d = central_derivative(
            |uj| {
                let mut pts = points.to_vec();
                pts[j] = uj;
                tau_value(case, &pts)
            },
            points[j],
            1,
            diff,
            &rest,
        )?;
        let analytic: Complex64 = (0..points.len())
            .filter(|&k| k != j)
            .map(|k| 2.0 * alphas[j] * alphas[k] / (points[j] - points[k]))
            .sum();
        let radius = 0.25
            * rest
                .iter()
                .map(|p| (p - points[j]).norm())
                .fold(f64::INFINITY, f64::min);
        let integral = integrate_path(
            |t| {
                let e = Complex64::from_polar(1.0, 2.0 * PI * t);
                let u = points[j] + radius * e;
                let du = Complex64::new(0.0, 2.0 * PI) * radius * e;
                let a = matrices.at(points, u);
                0.5 * a.mul(&a).trace() * du
            },
            quad,
        )?;
        entries.push(TauEntry {
            j,
            finite_difference: d.value / tau,
            analytic,
            contour: integral.value / Complex64::new(0.0, 2.0 * PI),
        });
    }
    let scale = entries.iter().map(|e| e.analytic.norm()).fold(1.0, f64::max);
    Ok(TauReport {
        tau,
        max_fd_vs_analytic: entries
            .iter()
            .map(|e| (e.finite_difference - e.analytic).norm() / scale)
            .fold(0.0, f64::max),
        max_analytic_vs_contour: entries
            .iter()
            .map(|e| (e.analytic - e.contour).norm() / scale)
            .fold(0.0, f64::max),
        entries,
    })
}
