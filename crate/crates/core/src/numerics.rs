//! Numerical kernel: composite Gauss–Legendre quadrature along parametrized
//! paths and Richardson-extrapolated central differences.
//!
//! Every result carries an error estimate. Quadrature refines by doubling the
//! panel count (never the order), which keeps nearly singular integrands close
//! to a pinch point well resolved.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings for composite Gauss–Legendre quadrature on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss points per panel.
    pub order: usize,
    /// Panel count of the first pass.
    pub panels: usize,
    /// Relative agreement required between two successive refinements.
    pub refine_tol: f64,
    /// Maximum number of panel doublings.
    pub max_refinements: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: 16,
            panels: 8,
            refine_tol: 1e-12,
            max_refinements: 8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 4 {
            return Err(Error::InvalidInput(format!(
                "quadrature order must be at least 4, got {}",
                self.order
            )));
        }
        if self.panels == 0 || self.max_refinements == 0 {
            return Err(Error::InvalidInput(
                "quadrature needs at least one panel and one refinement".into(),
            ));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "refine_tol must be positive, got {}",
                self.refine_tol
            )));
        }
        Ok(())
    }
}

/// A quadrature result with the agreement of its last refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// `|I_r - I_{r-1}|` of the last refinement.
    pub error: f64,
    /// Panel count of the accepted pass.
    pub panels: usize,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on `[0, 1]`: nodes in increasing order with their weights.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: usize,
}

impl CompositeRule {
    pub fn new(base: &GaussLegendre, panels: usize) -> Self {
        let width = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * base.nodes.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in 0..panels {
            let left = p as f64 * width;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(left + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * w);
            }
        }
        Self { nodes, weights, panels }
    }
}

/// Weighted sums of several integrands over one rule, with their L1 scales.
pub struct RuleSums {
    pub sums: Vec<Complex64>,
    pub scales: Vec<f64>,
}

/// Drives refinement for a batch of integrands sharing the same nodes.
///
/// `eval` receives a rule and returns, per component, the weighted sum and
/// the weighted sum of absolute values; the latter sets the scale against
/// which agreement is measured, so integrals that cancel to zero still
/// converge.
pub fn integrate_batch<F>(spec: &QuadratureSpec, mut eval: F) -> Result<Vec<Integral>>
where
    F: FnMut(&CompositeRule) -> Result<RuleSums>,
{
    spec.validate()?;
    let base = GaussLegendre::new(spec.order);
    let mut panels = spec.panels;
    let mut previous = eval(&CompositeRule::new(&base, panels))?;
    for _ in 0..spec.max_refinements {
        panels *= 2;
        let current = eval(&CompositeRule::new(&base, panels))?;
        let mut worst: Option<(usize, f64)> = None;
        let mut converged = true;
        for (idx, (c, p)) in current.sums.iter().zip(&previous.sums).enumerate() {
            let agreement = (c - p).norm();
            let scale = current.scales[idx].max(f64::MIN_POSITIVE);
            if agreement > spec.refine_tol * scale {
                converged = false;
            }
            let rel = agreement / scale;
            if worst.is_none_or(|(_, w)| rel > w) {
                worst = Some((idx, rel));
            }
        }
        if converged {
            return Ok(current
                .sums
                .iter()
                .zip(&previous.sums)
                .map(|(c, p)| Integral {
                    value: *c,
                    error: (c - p).norm(),
                    panels,
                })
                .collect());
        }
        if panels >= spec.panels << spec.max_refinements {
            let (idx, _) = worst.unwrap_or((0, 0.0));
            return Err(Error::NonConvergence {
                refinements: spec.max_refinements,
                last: current.sums[idx],
                previous: previous.sums[idx],
                agreement: (current.sums[idx] - previous.sums[idx]).norm(),
            });
        }
        previous = current;
    }
    unreachable!("refinement loop always returns")
}

/// Integrates a smooth complex function of `t` over `[0, 1]`.
pub fn integrate_path<F>(f: F, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    let out = integrate_batch(spec, |rule| {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(*t);
            sum += v * w;
            scale += v.norm() * w;
        }
        Ok(RuleSums {
            sums: vec![sum],
            scales: vec![scale],
        })
    })?;
    Ok(out[0])
}

/// How the base finite-difference step scales with the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepScale {
    Absolute,
    /// `h * max(1, |at|)`.
    Relative,
}

/// Central-difference settings. `levels` is the number of Richardson
/// extrapolation steps; the stencil uses `levels + 1` step sizes
/// `h, h/2, ..., h/2^levels`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffSpec {
    pub h: f64,
    pub levels: usize,
    pub scale_mode: StepScale,
}

impl Default for DiffSpec {
    fn default() -> Self {
        Self {
            h: 1e-5,
            levels: 2,
            scale_mode: StepScale::Relative,
        }
    }
}

impl DiffSpec {
    /// Step suited to second derivatives and mixed partials, where roundoff
    /// grows like `eps / h^2`.
    pub fn second_order() -> Self {
        Self {
            h: 6e-3,
            levels: 3,
            scale_mode: StepScale::Relative,
        }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn absolute(mut self) -> Self {
        self.scale_mode = StepScale::Absolute;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidInput(format!(
                "finite-difference step must be positive, got {}",
                self.h
            )));
        }
        if self.levels == 0 || self.levels > 8 {
            return Err(Error::InvalidInput(format!(
                "Richardson levels must be in 1..=8, got {}",
                self.levels
            )));
        }
        Ok(())
    }

    pub fn step_at(&self, at: Complex64) -> f64 {
        match self.scale_mode {
            StepScale::Absolute => self.h,
            StepScale::Relative => self.h * at.norm().max(1.0),
        }
    }
}

/// A derivative estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: Complex64,
    pub error: f64,
}

fn check_stencil(at: Complex64, h_max: f64, h_min: f64, singular: &[Complex64]) -> Result<()> {
    for &s in singular {
        // distance from s to the real-direction segment [at - h_max, at + h_max]
        let d = s - at;
        let along = d.re.clamp(-h_max, h_max);
        let dist = (d - Complex64::new(along, 0.0)).norm();
        if dist < 0.5 * h_min {
            return Err(Error::SingularStencil { point: s });
        }
    }
    Ok(())
}

fn richardson(estimates: &[Complex64]) -> (Complex64, f64) {
    let n = estimates.len();
    let mut table: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (l, &e) in estimates.iter().enumerate() {
        let mut row = vec![e];
        for m in 1..=l {
            let factor = 4f64.powi(m as i32);
            let prev = table[l - 1][m - 1];
            let cur = row[m - 1];
            row.push(cur + (cur - prev) / (factor - 1.0));
        }
        table.push(row);
    }
    let last = &table[n - 1];
    let best = last[n - 1];
    let truncation = if n > 1 { (best - last[n - 2]).norm() } else { 0.0 };
    (best, truncation)
}

/// Richardson-extrapolated central difference of order 1 or 2 at `at`.
///
/// Steps are taken along the real direction; for analytic `f` this is the
/// complex derivative. A stencil that comes within half its smallest step of
/// a declared singular point is rejected.
pub fn central_derivative<F>(
    f: F,
    at: Complex64,
    order: usize,
    spec: &DiffSpec,
    singular: &[Complex64],
) -> Result<Derivative>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let out = central_derivatives(|z| Ok(vec![f(z)?]), at, order, spec, singular)?;
    Ok(out[0])
}

/// [`central_derivative`] for a vector-valued `f`, sharing the stencil.
pub fn central_derivatives<F>(
    f: F,
    at: Complex64,
    order: usize,
    spec: &DiffSpec,
    singular: &[Complex64],
) -> Result<Vec<Derivative>>
where
    F: Fn(Complex64) -> Result<Vec<Complex64>>,
{
    spec.validate()?;
    if order != 1 && order != 2 {
        return Err(Error::InvalidInput(format!(
            "central_derivative supports orders 1 and 2, got {order}"
        )));
    }
    let h0 = spec.step_at(at);
    let h_min = h0 / 2f64.powi(spec.levels as i32);
    check_stencil(at, h0, h_min, singular)?;

    let centre = if order == 2 { Some(f(at)?) } else { None };
    let mut fmax = centre
        .as_ref()
        .map_or(Vec::new(), |c| c.iter().map(|z| z.norm()).collect());
    let mut estimates: Vec<Vec<Complex64>> = Vec::with_capacity(spec.levels + 1);
    for l in 0..=spec.levels {
        let h = h0 / 2f64.powi(l as i32);
        let step = Complex64::new(h, 0.0);
        let fp = f(at + step)?;
        let fm = f(at - step)?;
        if fp.len() != fm.len() || centre.as_ref().is_some_and(|c| c.len() != fp.len()) {
            return Err(Error::InvalidInput("vector length changed across the stencil".into()));
        }
        fmax.resize(fp.len(), 0.0);
        for (k, m) in fmax.iter_mut().enumerate() {
            *m = m.max(fp[k].norm()).max(fm[k].norm());
        }
        let d = (0..fp.len())
            .map(|k| match &centre {
                None => (fp[k] - fm[k]) / (2.0 * h),
                Some(c) => (fp[k] - 2.0 * c[k] + fm[k]) / (h * h),
            })
            .collect();
        estimates.push(d);
    }
    Ok((0..fmax.len())
        .map(|k| {
            let column: Vec<Complex64> = estimates.iter().map(|e| e[k]).collect();
            let (value, truncation) = richardson(&column);
            let roundoff = 8.0 * f64::EPSILON * fmax[k] / h_min.powi(order as i32);
            Derivative {
                value,
                error: truncation + roundoff,
            }
        })
        .collect())
}

/// Richardson-extrapolated mixed partial `d^2 f / (dx dy)` from the 4-point
/// central stencil.
pub fn mixed_partial<F>(f: F, at: (Complex64, Complex64), spec: &DiffSpec) -> Result<Derivative>
where
    F: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    spec.validate()?;
    let h0 = spec.step_at(at.0).max(spec.step_at(at.1));
    let h_min = h0 / 2f64.powi(spec.levels as i32);
    let mut fmax: f64 = 0.0;
    let mut estimates = Vec::with_capacity(spec.levels + 1);
    for l in 0..=spec.levels {
        let h = h0 / 2f64.powi(l as i32);
        let s = Complex64::new(h, 0.0);
        let pp = f(at.0 + s, at.1 + s)?;
        let pm = f(at.0 + s, at.1 - s)?;
        let mp = f(at.0 - s, at.1 + s)?;
        let mm = f(at.0 - s, at.1 - s)?;
        fmax = fmax.max(pp.norm()).max(pm.norm()).max(mp.norm()).max(mm.norm());
        estimates.push((pp - pm - mp + mm) / (4.0 * h * h));
    }
    let (value, truncation) = richardson(&estimates);
    let roundoff = 8.0 * f64::EPSILON * fmax / (h_min * h_min);
    Ok(Derivative {
        value,
        error: truncation + roundoff,
    })
}

/// Settings for Taylor coefficients taken from samples on a circle.
///
/// The radius is `radius` times the distance from the expansion point to the
/// nearest declared singularity. Coefficients are computed at that radius and
/// at half of it; their difference is the error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorSpec {
    pub nodes: usize,
    pub radius: f64,
}

impl Default for TaylorSpec {
    fn default() -> Self {
        Self {
            nodes: 32,
            radius: 0.25,
        }
    }
}

impl TaylorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::InvalidInput(format!(
                "need at least 8 circle nodes, got {}",
                self.nodes
            )));
        }
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(Error::InvalidInput(format!(
                "circle radius fraction must lie in (0, 1), got {}",
                self.radius
            )));
        }
        Ok(())
    }
}

/// Truncated Taylor series `sum c_k (z - at)^k`, `k < len`.
///
/// Arithmetic truncates to the shorter operand.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: Complex64, len: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// The identity function `z` expanded at `at`.
    pub fn variable(at: Complex64, len: usize) -> Self {
        let mut j = Self::constant(at, len);
        if len > 1 {
            j.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> Complex64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs[k] * fact
    }

    /// Series of the derivative; one coefficient shorter.
    pub fn diff(&self) -> Jet {
        Jet::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn recip(&self) -> Result<Jet> {
        let c0 = self.coeffs[0];
        if c0.norm() == 0.0 {
            return Err(Error::Domain("reciprocal of a series vanishing at its centre".into()));
        }
        let mut r = Vec::with_capacity(self.len());
        r.push(1.0 / c0);
        for k in 1..self.len() {
            let s: Complex64 = (1..=k).map(|i| self.coeffs[i] * r[k - i]).sum();
            r.push(-s / c0);
        }
        Ok(Jet::new(r))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    /// `f' / f`.
    pub fn log_derivative(&self) -> Result<Jet> {
        self.diff().div(self)
    }
}

impl std::ops::Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet::new(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect())
    }
}

impl std::ops::Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet::new(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect())
    }
}

impl std::ops::Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let n = self.len().min(o.len());
        Jet::new(
            (0..n)
                .map(|k| (0..=k).map(|i| self.coeffs[i] * o.coeffs[k - i]).sum())
                .collect(),
        )
    }
}

impl std::ops::Add<Complex64> for &Jet {
    type Output = Jet;
    fn add(self, c: Complex64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += c;
        j
    }
}

impl std::ops::Mul<Complex64> for &Jet {
    type Output = Jet;
    fn mul(self, c: Complex64) -> Jet {
        Jet::new(self.coeffs.iter().map(|a| a * c).collect())
    }
}

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(self.coeffs.iter().map(|a| -a).collect())
    }
}

/// A jet together with per-coefficient error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet {
    pub jet: Jet,
    pub errors: Vec<f64>,
}

impl TaylorJet {
    /// Largest estimated error among derivatives up to order `k`.
    pub fn derivative_error(&self, k: usize) -> f64 {
        (0..=k.min(self.errors.len() - 1))
            .map(|i| self.errors[i] * (1..=i).map(|m| m as f64).product::<f64>())
            .fold(0.0, f64::max)
    }
}

fn circle_coefficients<F>(f: &F, at: Complex64, len: usize, r: f64, nodes: usize) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let samples: Vec<(Complex64, Complex64)> = (0..nodes)
        .map(|j| {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / nodes as f64);
            Ok((w, f(at + w * r)?))
        })
        .collect::<Result<_>>()?;
    Ok((0..len)
        .map(|k| {
            let s: Complex64 = samples.iter().map(|(w, v)| v * w.powu(k as u32).conj()).sum();
            s / (nodes as f64 * r.powi(k as i32))
        })
        .collect())
}

/// Taylor coefficients `c_0 .. c_{len-1}` of an analytic `f` at `at` by the
/// trapezoidal rule on circles around `at`.
///
/// `f` must be analytic on the disc of radius `spec.radius * d`, where `d`
/// is the distance from `at` to the nearest point of `singular`.
pub fn taylor_jet<F>(f: F, at: Complex64, len: usize, spec: &TaylorSpec, singular: &[Complex64]) -> Result<TaylorJet>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    spec.validate()?;
    if len == 0 || len >= spec.nodes / 2 {
        return Err(Error::InvalidInput(format!(
            "jet length {len} must be positive and below half the node count {}",
            spec.nodes
        )));
    }
    let d = singular.iter().map(|s| (s - at).norm()).fold(f64::INFINITY, f64::min);
    let d = if d.is_finite() { d } else { at.norm().max(1.0) };
    if d == 0.0 {
        return Err(Error::SingularStencil { point: at });
    }
    let r = spec.radius * d;
    let wide = circle_coefficients(&f, at, len, r, spec.nodes)?;
    let narrow = circle_coefficients(&f, at, len, 0.5 * r, spec.nodes)?;
    let errors = wide.iter().zip(&narrow).map(|(a, b)| (a - b).norm()).collect();
    Ok(TaylorJet {
        jet: Jet::new(wide),
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for order in [4, 7, 16, 33] {
            let gl = GaussLegendre::new(order);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "order {order}: {s}");
            assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn cauchy_integral_of_dz_over_z() {
        let f = |t: f64| {
            let z = (2.0 * PI * I * t).exp();
            2.0 * PI * I * z / z
        };
        let r = integrate_path(f, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 2.0 * PI * I).norm() < 1e-13);
    }

    #[test]
    fn holomorphic_loop_integral_vanishes() {
        let f = |t: f64| {
            let z = (2.0 * PI * I * t).exp();
            z * 2.0 * PI * I * z
        };
        let r = integrate_path(f, &QuadratureSpec::default()).unwrap();
        assert!(r.value.norm() < 1e-13);
    }

    #[test]
    fn residue_of_shifted_pole() {
        let f = |t: f64| {
            let z = (2.0 * PI * I * t).exp();
            2.0 * PI * I * z / (z - 0.3)
        };
        let r = integrate_path(f, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 2.0 * PI * I).norm() < 1e-12);
    }

    #[test]
    fn non_convergence_reports_last_two_values() {
        let spec = QuadratureSpec {
            order: 4,
            panels: 1,
            refine_tol: 1e-15,
            max_refinements: 2,
        };
        let err = integrate_path(|t| Complex64::new((t + 1e-9).powf(-0.9), 0.0), &spec).unwrap_err();
        match err {
            Error::NonConvergence { last, previous, .. } => assert!(last != previous),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_low_order() {
        let spec = QuadratureSpec {
            order: 3,
            ..Default::default()
        };
        assert!(integrate_path(|_| Complex64::new(1.0, 0.0), &spec).is_err());
    }

    #[test]
    fn cubic_derivatives() {
        let f = |z: Complex64| Ok(z * z * z);
        let at = Complex64::new(2.0, 0.0);
        let d1 = central_derivative(f, at, 1, &DiffSpec::default(), &[]).unwrap();
        assert!((d1.value - 12.0).norm() <= d1.error.max(1e-9));
        let d2 = central_derivative(f, at, 2, &DiffSpec::second_order(), &[]).unwrap();
        assert!((d2.value - 12.0).norm() <= d2.error.max(1e-9));
    }

    #[test]
    fn exp_derivative_against_series() {
        // series-evaluated exp as the independent reference
        let series = |z: Complex64| {
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = term;
            for k in 1..40 {
                term *= z / k as f64;
                sum += term;
            }
            sum
        };
        let d = central_derivative(
            |z| Ok(series(z)),
            Complex64::new(0.0, 0.0),
            1,
            &DiffSpec::default(),
            &[],
        )
        .unwrap();
        assert!((d.value - 1.0).norm() < 1e-10);
    }

    #[test]
    fn stencil_on_singularity_is_rejected() {
        let f = |z: Complex64| Ok(1.0 / z);
        let err = central_derivative(
            f,
            Complex64::new(1e-6, 0.0),
            1,
            &DiffSpec::default().absolute(),
            &[Complex64::new(0.0, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularStencil { .. }));
    }

    #[test]
    fn mixed_partial_of_product() {
        let f = |x: Complex64, y: Complex64| Ok(x * x * y * y * y);
        let d = mixed_partial(
            f,
            (Complex64::new(1.5, 0.0), Complex64::new(-0.5, 0.0)),
            &DiffSpec::second_order(),
        )
        .unwrap();
        // 6 x y^2
        assert!((d.value - 6.0 * 1.5 * 0.25).norm() < 1e-9);
    }
}
