//! Hyperelliptic curves `v^2 = (u - u_1) ... (u - u_{2g+1})`, their basis
//! cycles realized as contours in the `u`-plane, branch tracking of `v`
//! along those contours, and period integrals.
//!
//! Basis loop `delta_k` (`k = 0..2g`) encircles the branch points at
//! positions `k` and `k + 1` of the curve's loop order, counterclockwise. The
//! loop order is the branch points sorted by real part, then imaginary part;
//! it is fixed when a curve is built and kept when a single branch point is
//! moved, so finite differences never switch basis.
//!
//! Contours are confocal (Bernstein) ellipses with foci at the two enclosed
//! branch points. In the Joukowski coordinate `zeta` the ellipse is the circle
//! `|zeta| = rho`, the enclosed branch points sit on `|zeta| = 1` and every
//! other branch point lies outside `|zeta| = rho_min`; `rho = rho_min^margin`
//! splits that annulus, so the periodic integrand is analytic in a strip on
//! both sides of the contour.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{central_derivative, integrate_batch, DiffSpec, QuadratureSpec, RuleSums};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default fraction of the log-clearance placed between the enclosed pair
/// and the contour.
pub const DEFAULT_MARGIN: f64 = 0.5;

/// Smallest Bernstein radius of a foreign branch point for which a basis
/// contour is built.
pub const MIN_CLEARANCE: f64 = 1.2;

/// A hyperelliptic curve with `2g + 1` finite branch points; the branch
/// point at infinity is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperCurve {
    points: Vec<Complex64>,
    loop_order: Vec<usize>,
}

impl HyperCurve {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        validate_points(&points)?;
        let mut loop_order: Vec<usize> = (0..points.len()).collect();
        loop_order.sort_by(|&a, &b| {
            let (pa, pb) = (points[a], points[b]);
            pa.re
                .partial_cmp(&pb.re)
                .unwrap()
                .then(pa.im.partial_cmp(&pb.im).unwrap())
        });
        Ok(Self { points, loop_order })
    }

    /// The Legendre curve `v^2 = u (u - 1) (u - x)`.
    pub fn legendre(x: Complex64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), x])
    }

    pub fn from_real(points: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&p| Complex64::new(p, 0.0)).collect())
    }

    pub fn genus(&self) -> usize {
        (self.points.len() - 1) / 2
    }

    pub fn branch_points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn loop_order(&self) -> &[usize] {
        &self.loop_order
    }

    /// Branch-point indices enclosed by basis loop `k`.
    pub fn basis_pair(&self, k: usize) -> (usize, usize) {
        (self.loop_order[k], self.loop_order[k + 1])
    }

    /// Moves branch point `index` while keeping the loop order.
    pub fn with_point(&self, index: usize, value: Complex64) -> Result<Self> {
        let mut points = self.points.clone();
        points[index] = value;
        validate_points(&points)?;
        Ok(Self {
            points,
            loop_order: self.loop_order.clone(),
        })
    }

    pub fn polynomial(&self, u: Complex64) -> Complex64 {
        self.points.iter().map(|p| u - p).product()
    }

    /// Product of principal square roots of the linear factors. Continuous
    /// in the branch points as long as no factor crosses the negative axis.
    pub fn factored_sqrt(&self, u: Complex64) -> Complex64 {
        self.points.iter().map(|p| (u - p).sqrt()).product()
    }

    /// Seeded random curve whose basis contours all have comfortable
    /// clearance.
    pub fn random(genus: usize, seed: u64) -> Self {
        Self::random_impl(genus, seed, false)
    }

    /// Seeded random curve with `u_1 = 0`.
    pub fn random_with_origin(genus: usize, seed: u64) -> Self {
        Self::random_impl(genus, seed, true)
    }

    fn random_impl(genus: usize, seed: u64, origin: bool) -> Self {
        assert!(genus >= 1, "genus must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = 2 * genus + 1;
        loop {
            let points: Vec<Complex64> = (0..count)
                .map(|i| {
                    if origin && i == 0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(i as f64 + rng.gen_range(-0.3..0.3), rng.gen_range(-0.7..0.7))
                    }
                })
                .collect();
            let Ok(curve) = Self::new(points) else { continue };
            let spread_ok = pairwise_min_distance(&curve.points) > 0.4;
            let clearance_ok = (0..2 * genus).all(|k| {
                let (a, b) = curve.basis_pair(k);
                foreign_clearance(&curve, a, b) > 2.0
            });
            if spread_ok && clearance_ok {
                return curve;
            }
        }
    }
}

fn pairwise_min_distance(points: &[Complex64]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            min = min.min((points[i] - points[j]).norm());
        }
    }
    min
}

fn validate_points(points: &[Complex64]) -> Result<()> {
    if points.len() < 3 || points.len().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "a curve needs an odd number (>= 3) of finite branch points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::InvalidInput("branch points must be finite".into()));
    }
    let mut diameter: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            diameter = diameter.max((points[i] - points[j]).norm());
        }
    }
    let min = pairwise_min_distance(points);
    if min <= 1e-8 * diameter {
        return Err(Error::Domain(format!(
            "branch points are not distinct (minimum separation {min:e})"
        )));
    }
    Ok(())
}

/// Bernstein radius of `s` relative to the segment `[a, b]`: the `rho` of
/// the confocal ellipse through `s` with foci `a`, `b`.
pub fn bernstein_radius(a: Complex64, b: Complex64, s: Complex64) -> f64 {
    let half = (b - a) / 2.0;
    let w = (s - (a + b) / 2.0) / half;
    let root = (w * w - 1.0).sqrt();
    (w + root).norm().max((w - root).norm())
}

fn foreign_clearance(curve: &HyperCurve, a: usize, b: usize) -> f64 {
    let (pa, pb) = (curve.points[a], curve.points[b]);
    curve
        .points
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != a && *i != b)
        .map(|(_, &s)| bernstein_radius(pa, pb, s))
        .fold(f64::INFINITY, f64::min)
}

/// A homology class `sum_k c_k delta_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    coefficients: Vec<Complex64>,
}

impl Cycle {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() || !coefficients.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "a cycle needs 2g coefficients, got {}",
                coefficients.len()
            )));
        }
        if coefficients.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::InvalidInput("cycle is trivial".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Genus-one cycle `c1 A + c2 B` with `A = delta_0`, `B = delta_1`.
    pub fn genus_one(c1: Complex64, c2: Complex64) -> Result<Self> {
        Self::new(vec![c1, c2])
    }

    pub fn basis(genus: usize, k: usize) -> Self {
        let mut coefficients = vec![Complex64::new(0.0, 0.0); 2 * genus];
        coefficients[k] = Complex64::new(1.0, 0.0);
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn genus(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }
}

/// A closed loop around one pair of branch points, parametrized by
/// `t in [0, 1]`, together with the value of `v` at its base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourPath {
    pub pair: (usize, usize),
    centre: Complex64,
    half_axis: Complex64,
    rho: f64,
    seed: Complex64,
}

impl ContourPath {
    fn zeta(&self, t: f64) -> Complex64 {
        // base point at angle -pi/2: the side below the oriented segment
        Complex64::from_polar(self.rho, 2.0 * PI * t - PI / 2.0)
    }

    pub fn point(&self, t: f64) -> Complex64 {
        let z = self.zeta(t);
        self.centre + self.half_axis * (z + 1.0 / z) / 2.0
    }

    /// `du/dt`.
    pub fn tangent(&self, t: f64) -> Complex64 {
        let z = self.zeta(t);
        self.half_axis * PI * I * (z - 1.0 / z)
    }

    pub fn base_point(&self) -> Complex64 {
        self.point(0.0)
    }

    /// Value of `v` at the base point for the curve the path was built on.
    pub fn seed(&self) -> Complex64 {
        self.seed
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Closed polyline of `count + 1` samples; the last equals the first.
    pub fn samples(&self, count: usize) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = (0..count).map(|i| self.point(i as f64 / count as f64)).collect();
        out.push(out[0]);
        out
    }

    /// Distance from the contour to the nearest branch point of `curve`.
    pub fn clearance(&self, curve: &HyperCurve) -> f64 {
        let pts = self.samples(512);
        curve
            .branch_points()
            .iter()
            .map(|b| pts.iter().map(|p| (p - b).norm()).fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks that `curve` has exactly this path's pair inside the contour.
    fn check_encloses(&self, curve: &HyperCurve) -> Result<()> {
        let (a, b) = self.pair;
        let pa = self.centre - self.half_axis;
        let pb = self.centre + self.half_axis;
        for (i, &p) in curve.branch_points().iter().enumerate() {
            let r = bernstein_radius(pa, pb, p);
            let inside = i == a || i == b;
            let ok = if inside {
                r < self.rho * 0.999
            } else {
                r > self.rho * 1.001
            };
            if !ok {
                return Err(Error::Geometry {
                    first: a,
                    second: b,
                    reason: format!("branch point {i} crossed the contour"),
                });
            }
        }
        Ok(())
    }
}

/// Builds the contour realizing basis loop `k`.
///
/// `margin` in `(0, 1)` places the ellipse at `rho = rho_min^margin`, where
/// `rho_min` is the Bernstein radius of the nearest foreign branch point.
pub fn build_contour(curve: &HyperCurve, k: usize, margin: f64) -> Result<ContourPath> {
    let g = curve.genus();
    if k >= 2 * g {
        return Err(Error::InvalidInput(format!(
            "basis index {k} out of range for genus {g}"
        )));
    }
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidInput(format!(
            "contour margin must lie in (0, 1), got {margin}"
        )));
    }
    let (a, b) = curve.basis_pair(k);
    let clearance = foreign_clearance(curve, a, b);
    if clearance < MIN_CLEARANCE {
        return Err(Error::Geometry {
            first: a,
            second: b,
            reason: format!(
                "a foreign branch point lies too close to the segment (Bernstein radius {clearance:.4} < {MIN_CLEARANCE})"
            ),
        });
    }
    let (pa, pb) = (curve.points[a], curve.points[b]);
    let mut path = ContourPath {
        pair: (a, b),
        centre: (pa + pb) / 2.0,
        half_axis: (pb - pa) / 2.0,
        rho: clearance.powf(margin),
        seed: Complex64::new(0.0, 0.0),
    };
    path.seed = base_seed(curve, &path)?;
    Ok(path)
}

/// `v` at the base point: the factored root just below the midpoint of the
/// enclosed segment, continued straight down to the contour. The value is
/// independent of the margin.
fn base_seed(curve: &HyperCurve, path: &ContourPath) -> Result<Complex64> {
    const STEPS: usize = 256;
    let depth = (path.rho - 1.0 / path.rho) / 2.0;
    let start = 1e-3_f64.min(depth / 2.0);
    let ray: Vec<Complex64> = (0..=STEPS)
        .map(|k| {
            let s = start + (depth - start) * k as f64 / STEPS as f64;
            path.centre - I * s * path.half_axis
        })
        .collect();
    let vs = continue_along(curve, &ray, None)?;
    Ok(*vs.last().expect("ray is not empty"))
}

/// Chooses the square root of `square` closest to `previous`, or reports an
/// ambiguous step.
fn nearest_root(square: Complex64, previous: Complex64) -> std::result::Result<Complex64, (f64, f64)> {
    let w = square.sqrt();
    let chosen = if (w - previous).norm() <= (w + previous).norm() {
        w
    } else {
        -w
    };
    let jump = (chosen - previous).norm();
    if jump > 0.5 * chosen.norm().max(previous.norm()) {
        Err((jump, chosen.norm()))
    } else {
        Ok(chosen)
    }
}

/// Continues `v` along an arbitrary polyline starting from the root of
/// `v^2` nearest `seed` (or the factored root when `seed` is `None`).
pub fn continue_along(curve: &HyperCurve, points: &[Complex64], seed: Option<Complex64>) -> Result<Vec<Complex64>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let first = match seed {
        Some(s) => {
            let w = curve.polynomial(points[0]).sqrt();
            if (w - s).norm() <= (w + s).norm() {
                w
            } else {
                -w
            }
        }
        None => curve.factored_sqrt(points[0]),
    };
    let mut out = Vec::with_capacity(points.len());
    out.push(first);
    for (index, &u) in points.iter().enumerate().skip(1) {
        let prev = out[index - 1];
        let v = nearest_root(curve.polynomial(u), prev).map_err(|(jump, magnitude)| Error::StepDensity {
            index,
            jump,
            magnitude,
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Samples `v` along `path` (`samples` steps, closed), continued from the
/// path's base-point seed.
pub fn continue_v(curve: &HyperCurve, path: &ContourPath, samples: usize) -> Result<Vec<(Complex64, Complex64)>> {
    let pts = path.samples(samples);
    let vs = continue_along(curve, &pts, Some(path.seed))?;
    Ok(pts.into_iter().zip(vs).collect())
}

/// Tracks `v` through an increasing sequence of path parameters, bisecting
/// any step too coarse for unambiguous continuation.
struct Tracker<'a> {
    curve: &'a HyperCurve,
    path: &'a ContourPath,
    t: f64,
    v: Complex64,
}

impl<'a> Tracker<'a> {
    fn new(curve: &'a HyperCurve, path: &'a ContourPath) -> Self {
        let u0 = path.base_point();
        let w = curve.polynomial(u0).sqrt();
        let v = if (w - path.seed).norm() <= (w + path.seed).norm() {
            w
        } else {
            -w
        };
        Self { curve, path, t: 0.0, v }
    }

    fn advance(&mut self, t: f64) -> Result<Complex64> {
        self.v = self.step(self.t, self.v, t, 0)?;
        self.t = t;
        Ok(self.v)
    }

    fn step(&self, t0: f64, v0: Complex64, t1: f64, depth: usize) -> Result<Complex64> {
        let u = self.path.point(t1);
        match nearest_root(self.curve.polynomial(u), v0) {
            Ok(v) => Ok(v),
            Err((jump, magnitude)) => {
                if depth > 40 {
                    return Err(Error::StepDensity {
                        index: 0,
                        jump,
                        magnitude,
                    });
                }
                let mid = 0.5 * (t0 + t1);
                let vm = self.step(t0, v0, mid, depth + 1)?;
                self.step(mid, vm, t1, depth + 1)
            }
        }
    }
}

/// The differential `u^m (u - u_i)^(-1)... v^n du` over the chosen poles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrandSpec {
    pub n: i32,
    pub m: u32,
    poles: Vec<usize>,
}

impl IntegrandSpec {
    /// `v^n du`.
    pub fn power(n: i32) -> Self {
        Self {
            n,
            m: 0,
            poles: Vec::new(),
        }
    }

    /// `du / v`.
    pub fn holomorphic() -> Self {
        Self::power(-1)
    }

    pub fn with_pole(mut self, index: usize) -> Self {
        if !self.poles.contains(&index) {
            self.poles.push(index);
            self.poles.sort_unstable();
        }
        self
    }

    pub fn with_u_power(mut self, m: u32) -> Self {
        self.m = m;
        self
    }

    pub fn poles(&self) -> &[usize] {
        &self.poles
    }

    /// The 0/1 pole flags `e_1 .. e_{2g+1}`.
    pub fn pole_flags(&self, count: usize) -> Vec<u8> {
        (0..count).map(|i| u8::from(self.poles.contains(&i))).collect()
    }

    fn validate(&self, curve: &HyperCurve) -> Result<()> {
        if let Some(&bad) = self.poles.iter().find(|&&p| p >= curve.branch_points().len()) {
            return Err(Error::InvalidInput(format!("pole index {bad} is not a branch point")));
        }
        Ok(())
    }

    pub fn eval(&self, curve: &HyperCurve, u: Complex64, v: Complex64) -> Complex64 {
        let mut value = v.powi(self.n);
        if self.m > 0 {
            value *= u.powu(self.m);
        }
        for &p in &self.poles {
            value /= u - curve.branch_points()[p];
        }
        value
    }
}

/// Basis contours built once for a reference curve and reused for nearby
/// curves, so periods stay smooth functions of the branch points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    paths: Vec<ContourPath>,
}

impl ContourSet {
    pub fn new(curve: &HyperCurve) -> Result<Self> {
        Self::with_margin(curve, DEFAULT_MARGIN)
    }

    pub fn with_margin(curve: &HyperCurve, margin: f64) -> Result<Self> {
        let paths = (0..2 * curve.genus())
            .map(|k| build_contour(curve, k, margin))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[ContourPath] {
        &self.paths
    }

    /// Integrals of each spec over basis loop `k` of `curve`.
    pub fn loop_integrals(
        &self,
        curve: &HyperCurve,
        k: usize,
        specs: &[IntegrandSpec],
        quad: &QuadratureSpec,
    ) -> Result<Vec<Complex64>> {
        let path = &self.paths[k];
        path.check_encloses(curve)?;
        for s in specs {
            s.validate(curve)?;
        }
        let out = integrate_batch(quad, |rule| {
            let mut tracker = Tracker::new(curve, path);
            let mut sums = vec![Complex64::new(0.0, 0.0); specs.len()];
            let mut scales = vec![0.0; specs.len()];
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let v = tracker.advance(*t)?;
                let u = path.point(*t);
                let du = path.tangent(*t);
                for (idx, s) in specs.iter().enumerate() {
                    let f = s.eval(curve, u, v) * du;
                    sums[idx] += f * w;
                    scales[idx] += f.norm() * w;
                }
            }
            Ok(RuleSums { sums, scales })
        })?;
        Ok(out.into_iter().map(|i| i.value).collect())
    }

    /// Periods of each spec over `cycle`.
    pub fn periods(
        &self,
        curve: &HyperCurve,
        cycle: &Cycle,
        specs: &[IntegrandSpec],
        quad: &QuadratureSpec,
    ) -> Result<Vec<Complex64>> {
        if cycle.genus() != curve.genus() {
            return Err(Error::InvalidInput(format!(
                "cycle has genus {} but the curve has genus {}",
                cycle.genus(),
                curve.genus()
            )));
        }
        let mut total = vec![Complex64::new(0.0, 0.0); specs.len()];
        for (k, c) in cycle.coefficients().iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let loop_values = self.loop_integrals(curve, k, specs, quad)?;
            for (acc, val) in total.iter_mut().zip(loop_values) {
                *acc += c * val;
            }
        }
        Ok(total)
    }
}

/// Periods of several differentials over `cycle` on freshly built contours.
pub fn periods(
    curve: &HyperCurve,
    cycle: &Cycle,
    specs: &[IntegrandSpec],
    quad: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    ContourSet::new(curve)?.periods(curve, cycle, specs, quad)
}

/// `sum_k c_k \oint_{delta_k} u^m prod (u - u_i)^(-e_i) v^n du`.
pub fn period(curve: &HyperCurve, cycle: &Cycle, spec: &IntegrandSpec, quad: &QuadratureSpec) -> Result<Complex64> {
    Ok(periods(curve, cycle, std::slice::from_ref(spec), quad)?[0])
}

/// Residual of `d/du_i \oint v^n du = -(n/2) \oint v^n du / (u - u_i)`,
/// normalized by `max(1, |\oint v^n du|)`.
pub fn period_u_derivative(
    curve: &HyperCurve,
    cycle: &Cycle,
    n: i32,
    i: usize,
    quad: &QuadratureSpec,
    diff: &DiffSpec,
) -> Result<f64> {
    let contours = ContourSet::new(curve)?;
    let plain = IntegrandSpec::power(n);
    let with_pole = IntegrandSpec::power(n).with_pole(i);
    let base = contours.periods(curve, cycle, &[plain.clone(), with_pole], quad)?;
    let others: Vec<Complex64> = curve
        .branch_points()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, &p)| p)
        .collect();
    let d = central_derivative(
        |ui| {
            let moved = curve.with_point(i, ui)?;
            Ok(contours.periods(&moved, cycle, std::slice::from_ref(&plain), quad)?[0])
        },
        curve.branch_points()[i],
        1,
        diff,
        &others,
    )?;
    Ok((d.value + f64::from(n) / 2.0 * base[1]).norm() / base[0].norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_even_and_coincident_points() {
        assert!(HyperCurve::from_real(&[0.0, 1.0]).is_err());
        assert!(HyperCurve::from_real(&[0.0, 1.0, 2.0, 3.0]).is_err());
        assert!(matches!(HyperCurve::from_real(&[0.0, 1.0, 1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn legendre_loop_order_sorts_by_real_part() {
        let curve = HyperCurve::legendre(c(0.3)).unwrap();
        assert_eq!(curve.basis_pair(0), (0, 2));
        assert_eq!(curve.basis_pair(1), (2, 1));
        let moved = curve.with_point(2, c(1.5)).unwrap();
        assert_eq!(moved.loop_order(), curve.loop_order());
    }

    #[test]
    fn contours_around_pairs() {
        let curve = HyperCurve::from_real(&[0.0, 1.0, 4.0]).unwrap();
        let p0 = build_contour(&curve, 0, 0.2).unwrap();
        assert_eq!(p0.pair, (0, 1));
        let p1 = build_contour(&curve, 1, 0.2).unwrap();
        assert_eq!(p1.pair, (1, 2));
        for p in [&p0, &p1] {
            let s = p.samples(64);
            assert!((s[0] - s[64]).norm() < 1e-12);
            p.check_encloses(&curve).unwrap();
        }
    }

    #[test]
    fn crowded_pair_is_a_geometry_error() {
        let curve = HyperCurve::from_real(&[0.0, 1.0, 1.005]).unwrap();
        let err = build_contour(&curve, 0, DEFAULT_MARGIN).unwrap_err();
        assert!(matches!(err, Error::Geometry { .. }), "{err}");
    }

    #[test]
    fn margin_out_of_range() {
        let curve = HyperCurve::from_real(&[0.0, 1.0, 4.0]).unwrap();
        assert!(build_contour(&curve, 0, 1.5).is_err());
        assert!(build_contour(&curve, 2, 0.5).is_err());
    }

    #[test]
    fn coarse_sampling_is_a_step_density_error() {
        let curve = HyperCurve::from_real(&[0.0, 1.0, 4.0]).unwrap();
        // stepping straight across u = 0 leaves the root choice undetermined
        let bad = vec![c(0.01), c(-0.01)];
        assert!(matches!(
            continue_along(&curve, &bad, None),
            Err(Error::StepDensity { .. })
        ));
    }

    #[test]
    fn pole_flags_roundtrip() {
        let s = IntegrandSpec::power(-1).with_pole(2).with_pole(0).with_pole(2);
        assert_eq!(s.pole_flags(3), vec![1, 0, 1]);
    }
}
