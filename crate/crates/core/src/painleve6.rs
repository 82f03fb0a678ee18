//! Genus-one Painleve VI families on the Legendre curve `v^2 = u (u - 1)(u - x)`.
//!
//! The triangular solutions restricted to branch points `(0, 1, x)` give the
//! zero of the top-right entry of `A(u)` as
//! `y = x a_1 / (x a_1 + (x - 1) a_2)`, where `a_1, a_2, a_3` sit at
//! `u = 0, 1, x`. Derivatives in `x` come from the flows
//! `da_i/dx = 2 (alpha_3 a_i - alpha_i a_3) / (x - u_i)`.

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::curve::{ContourSet, Cycle, HyperCurve, IntegrandSpec};
use crate::error::{Error, Result};
use crate::numerics::{central_derivative, central_derivatives, DiffSpec, QuadratureSpec};
use crate::schlesinger::{rational_f64, SolutionCase};

/// Parameters `(alpha, beta, gamma, delta)` of PVI, hatted in the usual
/// notation to keep them apart from the eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PviParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
}

/// Exact PVI parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalPviParams {
    pub alpha: Rational64,
    pub beta: Rational64,
    pub gamma: Rational64,
    pub delta: Rational64,
}

impl RationalPviParams {
    pub fn new(alpha: Rational64, beta: Rational64, gamma: Rational64, delta: Rational64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    pub fn from_ratios(v: [(i64, i64); 4]) -> Self {
        let r = |(a, b): (i64, i64)| Rational64::new(a, b);
        Self::new(r(v[0]), r(v[1]), r(v[2]), r(v[3]))
    }

    /// PVI(1/8, -1/8, 1/8, 3/8).
    pub fn eighths() -> Self {
        Self::from_ratios([(1, 8), (-1, 8), (1, 8), (3, 8)])
    }

    /// PVI(0, 0, 0, 1/2), solved by Picard's elliptic family.
    pub fn picard() -> Self {
        Self::from_ratios([(0, 1), (0, 1), (0, 1), (1, 2)])
    }

    pub fn to_complex(&self) -> PviParams {
        let c = |r: &Rational64| Complex64::new(rational_f64(r), 0.0);
        PviParams {
            alpha: c(&self.alpha),
            beta: c(&self.beta),
            gamma: c(&self.gamma),
            delta: c(&self.delta),
        }
    }
}

/// `((2 a_inf - 1)^2 / 2, -2 a_1^2, 2 a_2^2, 1/2 - 2 a_3^2)`.
pub fn pvi_params_from_alphas(a1: Rational64, a2: Rational64, a3: Rational64, a_inf: Rational64) -> RationalPviParams {
    let two = Rational64::from_integer(2);
    let one = Rational64::from_integer(1);
    let t = two * a_inf - one;
    RationalPviParams::new(t * t / two, -two * a1 * a1, two * a2 * a2, one / two - two * a3 * a3)
}

/// Right-hand side of PVI,
/// `y'' = (1/2)(1/y + 1/(y-1) + 1/(y-x)) y'^2 - (1/x + 1/(x-1) + 1/(y-x)) y'
///        + y (y-1)(y-x) / (x^2 (x-1)^2) (a + b x/y^2 + c (x-1)/(y-1)^2 + d x (x-1)/(y-x)^2)`.
pub fn pvi_rhs(x: Complex64, y: Complex64, dy: Complex64, p: &PviParams) -> Result<Complex64> {
    let near = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-13 * b.norm().max(1.0);
    let one = Complex64::new(1.0, 0.0);
    if near(x, 0.0.into()) || near(x, one) {
        return Err(Error::Domain(format!("x = {x} is a fixed singularity")));
    }
    if near(y, 0.0.into()) || near(y, one) || near(y, x) {
        return Err(Error::Domain(format!("y = {y} sits on a singular value at x = {x}")));
    }
    let first = 0.5 * (1.0 / y + 1.0 / (y - 1.0) + 1.0 / (y - x)) * dy * dy;
    let second = (1.0 / x + 1.0 / (x - 1.0) + 1.0 / (y - x)) * dy;
    let xx = x * x * (x - 1.0) * (x - 1.0);
    let bracket = p.alpha
        + p.beta * x / (y * y)
        + p.gamma * (x - 1.0) / ((y - 1.0) * (y - 1.0))
        + p.delta * x * (x - 1.0) / ((y - x) * (y - x));
    Ok(first - second + y * (y - 1.0) * (y - x) / xx * bracket)
}

/// `y'' - RHS`.
pub fn pvi_residual(x: Complex64, y: Complex64, dy: Complex64, d2y: Complex64, p: &PviParams) -> Result<Complex64> {
    Ok(d2y - pvi_rhs(x, y, dy, p)?)
}

/// A point on a solution together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PviPoint {
    pub x: Complex64,
    pub y: Complex64,
    pub dy: Complex64,
    pub d2y: Complex64,
}

impl PviPoint {
    /// `|y'' - RHS| / max(1, |y''|)`.
    pub fn residual(&self, p: &PviParams) -> Result<f64> {
        Ok(pvi_residual(self.x, self.y, self.dy, self.d2y, p)?.norm() / self.d2y.norm().max(1.0))
    }
}

/// Either a regular point or a movable pole of the solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Evaluation {
    Regular(PviPoint),
    Pole {
        x: Complex64,
        denominator: f64,
    },
    /// `y` meets one of the fixed singular values `0, 1, x`.
    SingularValue {
        x: Complex64,
        y: Complex64,
    },
    /// Every coefficient vanishes identically (positive even `n`).
    Degenerate {
        x: Complex64,
    },
}

impl Evaluation {
    pub fn point(&self) -> Option<&PviPoint> {
        match self {
            Evaluation::Regular(p) => Some(p),
            _ => None,
        }
    }

    /// Short reason for a skipped point.
    pub fn skip_note(&self) -> Option<String> {
        match self {
            Evaluation::Regular(_) => None,
            Evaluation::Pole { x, denominator } => {
                Some(format!("pole at x = {x} (relative denominator {denominator:e})"))
            }
            Evaluation::SingularValue { x, y } => Some(format!("y = {y} meets a singular value at x = {x}")),
            Evaluation::Degenerate { x } => Some(format!("degenerate family (all a_i vanish) at x = {x}")),
        }
    }
}

/// Relative size below which the denominator of `y` is treated as a pole.
pub const POLE_THRESHOLD: f64 = 1e-8;

/// Coefficients of the closed-form `2 D^2 y'` for the first eigenvalue set,
/// as `[constant, x]` pairs for the `a_1^2`, `a_2^2` and `a_1 a_2` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlopeCoefficients {
    pub a1_sq: [Rational64; 2],
    pub a2_sq: [Rational64; 2],
    pub a1_a2: [Rational64; 2],
}

/// `n (x - 1) a_2^2 - n x a_1^2 - 2 (n + 1) a_1 a_2`.
pub fn case1_slope_coefficients(n: i32) -> SlopeCoefficients {
    let n = Rational64::from_integer(n.into());
    let zero = Rational64::from_integer(0);
    let two = Rational64::from_integer(2);
    SlopeCoefficients {
        a1_sq: [zero, -n],
        a2_sq: [-n, n],
        a1_a2: [-two * (n + 1), zero],
    }
}

/// `x a_1^2 - (x - 1) a_2^2`, the form specific to `n = -1`.
pub fn minus_one_slope_coefficients() -> SlopeCoefficients {
    let zero = Rational64::from_integer(0);
    let one = Rational64::from_integer(1);
    SlopeCoefficients {
        a1_sq: [zero, one],
        a2_sq: [one, -one],
        a1_a2: [zero, zero],
    }
}

/// A cycle-based family `gamma = c_1 A + c_2 B` on the Legendre curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenusOneFamily {
    pub case: SolutionCase,
    pub c1: Complex64,
    pub c2: Complex64,
}

impl GenusOneFamily {
    pub fn new(case: SolutionCase, c1: Complex64, c2: Complex64) -> Result<Self> {
        case.validate()?;
        if c1.norm() == 0.0 && c2.norm() == 0.0 {
            return Err(Error::InvalidInput("(c1, c2) must not both vanish".into()));
        }
        Ok(Self { case, c1, c2 })
    }

    pub fn cycle(&self) -> Cycle {
        Cycle::genus_one(self.c1, self.c2).expect("nonzero genus-one cycle")
    }

    pub fn eigenvalues(&self) -> [Rational64; 4] {
        let al = self.case.alphas(1);
        [al[0], al[1], al[2], self.case.alpha_inf(1)]
    }

    pub fn params(&self) -> RationalPviParams {
        let [a1, a2, a3, ai] = self.eigenvalues();
        pvi_params_from_alphas(a1, a2, a3, ai)
    }

    pub fn contours(x: Complex64) -> Result<(HyperCurve, ContourSet)> {
        let curve = HyperCurve::legendre(x)?;
        let contours = ContourSet::new(&curve)?;
        Ok((curve, contours))
    }

    /// `(a_1, a_2, a_3)` at `x` on the given contours.
    pub fn coefficients_on(
        &self,
        contours: &ContourSet,
        x: Complex64,
        quad: &QuadratureSpec,
    ) -> Result<[Complex64; 3]> {
        let curve = HyperCurve::legendre(x)?;
        let a = self.case.coefficients_on(contours, &curve, &self.cycle(), quad)?;
        Ok([a[0], a[1], a[2]])
    }

    /// `y` alone, for finite differencing on frozen contours.
    pub fn y_on(&self, contours: &ContourSet, x: Complex64, quad: &QuadratureSpec) -> Result<Complex64> {
        let [a1, a2, _] = self.coefficients_on(contours, x, quad)?;
        Ok(x * a1 / (x * a1 + (x - 1.0) * a2))
    }

    /// `y`, `y'`, `y''` from the closed forms.
    pub fn evaluate_on(&self, contours: &ContourSet, x: Complex64, quad: &QuadratureSpec) -> Result<Evaluation> {
        let a = self.coefficients_on(contours, x, quad)?;
        Ok(self.from_coefficients(x, a))
    }

    pub fn evaluate(&self, x: Complex64, quad: &QuadratureSpec) -> Result<Evaluation> {
        let (_, contours) = Self::contours(x)?;
        self.evaluate_on(&contours, x, quad)
    }

    pub fn from_coefficients(&self, x: Complex64, [a1, a2, a3]: [Complex64; 3]) -> Evaluation {
        if self.case.is_degenerate() {
            return Evaluation::Degenerate { x };
        }
        let d = x * a1 + (x - 1.0) * a2;
        let scale = (x * a1).norm().max(((x - 1.0) * a2).norm());
        if d.norm() < POLE_THRESHOLD * scale || scale == 0.0 {
            return Evaluation::Pole {
                x,
                denominator: if scale == 0.0 { 0.0 } else { d.norm() / scale },
            };
        }
        let y = x * a1 / d;
        let close = |s: Complex64| (y - s).norm() < POLE_THRESHOLD * s.norm().max(1.0);
        if close(0.0.into()) || close(1.0.into()) || close(x) {
            return Evaluation::SingularValue { x, y };
        }
        let (dy, d2y) = match self.case {
            SolutionCase::Case1 { n: -1 } => (
                (x * a1 * a1 - (x - 1.0) * a2 * a2) / (2.0 * d * d),
                -a1 * a2 * a3 / (2.0 * d * d * d),
            ),
            SolutionCase::Case1 { n } => case1_derivatives(f64::from(n), x, a1, a2),
            SolutionCase::Case2 => (
                (x * a1 * a1 + (x - 1.0) * a2 * a2 + 2.0 * (x - 1.0) * a1 * a2) / (2.0 * d * d),
                (a2 * a2 * a2 / x + x * a3 * a3 * a3 - 2.0 * a1 * a2 * a3) / (2.0 * d * d * d),
            ),
        };
        Evaluation::Regular(PviPoint { x, y, dy, d2y })
    }

    /// Closed-form `y'`, `y''` against central differences of `y`, each as
    /// `|closed - fd| / max(1, |closed|)`.
    pub fn derivative_check(
        &self,
        x: Complex64,
        quad: &QuadratureSpec,
        first: &DiffSpec,
        second: &DiffSpec,
    ) -> Result<Option<(f64, f64)>> {
        let (_, contours) = Self::contours(x)?;
        let Evaluation::Regular(p) = self.evaluate_on(&contours, x, quad)? else {
            return Ok(None);
        };
        let fixed = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let y = |t: Complex64| self.y_on(&contours, t, quad);
        let d1 = central_derivative(y, x, 1, first, &fixed)?;
        let d2 = central_derivative(y, x, 2, second, &fixed)?;
        Ok(Some((
            (p.dy - d1.value).norm() / p.dy.norm().max(1.0),
            (p.d2y - d2.value).norm() / p.d2y.norm().max(1.0),
        )))
    }
}

/// `y'` and `y''` for `n != -1`. With `D = x a_1 + (x - 1) a_2` and
/// `P = n (x - 1) a_2^2 - n x a_1^2 - 2 (n + 1) a_1 a_2`, `y' = P / (2 D^2)`
/// and `y'' = P' / (2 D^2) - P D' / D^3`, where `a_1' = (n/2)(2 a_1 + a_2)/x`,
/// `a_2' = (n/2)(a_1 + 2 a_2)/(x - 1)` and `D' = (1 + 3n/2)(a_1 + a_2)`.
fn case1_derivatives(n: f64, x: Complex64, a1: Complex64, a2: Complex64) -> (Complex64, Complex64) {
    let d = x * a1 + (x - 1.0) * a2;
    let p = n * (x - 1.0) * a2 * a2 - n * x * a1 * a1 - 2.0 * (n + 1.0) * a1 * a2;
    let da1 = 0.5 * n * (2.0 * a1 + a2) / x;
    let da2 = 0.5 * n * (a1 + 2.0 * a2) / (x - 1.0);
    let dd = (1.0 + 1.5 * n) * (a1 + a2);
    let dp = n * a2 * a2 + 2.0 * n * (x - 1.0) * a2 * da2
        - n * a1 * a1
        - 2.0 * n * x * a1 * da1
        - 2.0 * (n + 1.0) * (da1 * a2 + a1 * da2);
    (p / (2.0 * d * d), dp / (2.0 * d * d) - p * dd / (d * d * d))
}

pub fn y_case1(x: Complex64, c1: Complex64, c2: Complex64, n: i32, quad: &QuadratureSpec) -> Result<Evaluation> {
    GenusOneFamily::new(SolutionCase::Case1 { n }, c1, c2)?.evaluate(x, quad)
}

pub fn y_case2(x: Complex64, c1: Complex64, c2: Complex64, quad: &QuadratureSpec) -> Result<Evaluation> {
    GenusOneFamily::new(SolutionCase::Case2, c1, c2)?.evaluate(x, quad)
}

/// `y` for the second eigenvalue set from the unsimplified coefficients
/// `a_2 = \oint du/v + \oint du/((u-1) v)`, `a_3 = \oint du/v + x \oint du/((u-x) v)`,
/// via `y = -x a_1 / (x a_3 + a_2)`.
pub fn y_case2_unsimplified(x: Complex64, c1: Complex64, c2: Complex64, quad: &QuadratureSpec) -> Result<Complex64> {
    let (curve, contours) = GenusOneFamily::contours(x)?;
    let cycle = Cycle::genus_one(c1, c2)?;
    let specs = [
        IntegrandSpec::holomorphic(),
        IntegrandSpec::holomorphic().with_pole(1),
        IntegrandSpec::holomorphic().with_pole(2),
    ];
    let p = contours.periods(&curve, &cycle, &specs, quad)?;
    let a1 = -p[0];
    let a2 = p[0] + p[1];
    let a3 = p[0] + x * p[2];
    Ok(-x * a1 / (x * a3 + a2))
}

/// Which hypergeometric equation to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HyperOde {
    P,
    Q,
}

/// Eigenvalues `(alpha, beta, gamma)` of the general triangular reduction at
/// `0, 1, x`; the eigenvalue at infinity is `-delta` with
/// `delta = alpha + beta + gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PqParams {
    pub alpha: Rational64,
    pub beta: Rational64,
    pub gamma: Rational64,
}

impl PqParams {
    pub fn new(alpha: Rational64, beta: Rational64, gamma: Rational64) -> Self {
        Self { alpha, beta, gamma }
    }

    /// `(1/4, -1/4, -1/4)`, the second eigenvalue set.
    pub fn picard_fuchs() -> Self {
        Self::new(Rational64::new(1, 4), Rational64::new(-1, 4), Rational64::new(-1, 4))
    }

    pub fn delta(&self) -> Rational64 {
        self.alpha + self.beta + self.gamma
    }

    /// `(a, b, c)` of `x (1 - x) p'' + (c - (a + b + 1) x) p' - a b p = 0`
    /// satisfied by `p`.
    pub fn hypergeometric_p(&self) -> [Rational64; 3] {
        let two = Rational64::from_integer(2);
        let one = Rational64::from_integer(1);
        [
            -two * self.delta(),
            -two * self.gamma,
            one - two * (self.alpha + self.gamma),
        ]
    }

    /// `(a, b, c)` for `q`.
    pub fn hypergeometric_q(&self) -> [Rational64; 3] {
        let two = Rational64::from_integer(2);
        [-two * self.delta(), -two * self.gamma, -two * (self.alpha + self.gamma)]
    }

    fn f(&self) -> (f64, f64, f64) {
        (
            rational_f64(&self.alpha),
            rational_f64(&self.beta),
            rational_f64(&self.gamma),
        )
    }
}

/// Residuals of `p' = (2/x)(gamma p + alpha (p + q))` and
/// `q' = (2/(x - 1))(gamma q + beta (p + q))`.
pub fn pq_system_residual(
    params: &PqParams,
    x: Complex64,
    p: Complex64,
    dp: Complex64,
    q: Complex64,
    dq: Complex64,
) -> (Complex64, Complex64) {
    let (a, b, g) = params.f();
    (
        dp - 2.0 / x * (g * p + a * (p + q)),
        dq - 2.0 / (x - 1.0) * (g * q + b * (p + q)),
    )
}

/// The second-order equation for `p` implied by the system:
/// `x (x - 1) p'' + ((2g + 2a - 1) - (4g + 2a + 2b - 1) x) p' + 4 (g^2 + g (a + b)) p`.
pub fn p_equation_residual(params: &PqParams, x: Complex64, p: Complex64, dp: Complex64, d2p: Complex64) -> Complex64 {
    let (a, b, g) = params.f();
    x * (x - 1.0) * d2p
        + ((2.0 * g + 2.0 * a - 1.0) - (4.0 * g + 2.0 * a + 2.0 * b - 1.0) * x) * dp
        + 4.0 * (g * g + g * (a + b)) * p
}

/// `x (x - 1) q'' + (2 (g + a) - (4g + 2a + 2b - 1) x) q' + 4 (g^2 + g (a + b)) q`.
pub fn q_equation_residual(params: &PqParams, x: Complex64, q: Complex64, dq: Complex64, d2q: Complex64) -> Complex64 {
    let (a, b, g) = params.f();
    x * (x - 1.0) * d2q
        + (2.0 * (g + a) - (4.0 * g + 2.0 * a + 2.0 * b - 1.0) * x) * dq
        + 4.0 * (g * g + g * (a + b)) * q
}

/// Residual of the standard hypergeometric equation with parameters `abc`.
pub fn hypergeometric_standard_residual(
    abc: [Rational64; 3],
    x: Complex64,
    f: Complex64,
    df: Complex64,
    d2f: Complex64,
) -> Complex64 {
    let [a, b, c] = abc.map(|r| rational_f64(&r));
    x * (1.0 - x) * d2f + (c - (a + b + 1.0) * x) * df - a * b * f
}

/// `p(x) = \oint du/v` and `q(x) = x \oint du / ((u - x) v)` over
/// `c_1 A + c_2 B`, on fixed contours.
pub fn pq_periods_on(
    contours: &ContourSet,
    x: Complex64,
    c1: Complex64,
    c2: Complex64,
    quad: &QuadratureSpec,
) -> Result<[Complex64; 2]> {
    let curve = HyperCurve::legendre(x)?;
    let specs = [IntegrandSpec::holomorphic(), IntegrandSpec::holomorphic().with_pole(2)];
    let p = contours.periods(&curve, &Cycle::genus_one(c1, c2)?, &specs, quad)?;
    Ok([p[0], x * p[1]])
}

/// Residuals of the Picard-Fuchs checks at one point, each divided by
/// `max(1, |p|, |q|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricReport {
    pub which: HyperOde,
    /// `x (x-1) p'' + (2x - 1) p' + p/4` or `x (x-1) q'' + 2x q' + q/4`.
    pub ode: f64,
    /// `q - 2 x p'`.
    pub relation: f64,
    /// The first-order system at `(1/4, -1/4, -1/4)`.
    pub system: f64,
}

pub fn hypergeometric_residual(
    which: HyperOde,
    x: Complex64,
    c1: Complex64,
    c2: Complex64,
    quad: &QuadratureSpec,
    first: &DiffSpec,
    second: &DiffSpec,
) -> Result<HypergeometricReport> {
    let (_, contours) = GenusOneFamily::contours(x)?;
    let fixed = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let f = |t: Complex64| pq_periods_on(&contours, t, c1, c2, quad).map(|v| v.to_vec());
    let [p, q] = pq_periods_on(&contours, x, c1, c2, quad)?;
    let d1 = central_derivatives(f, x, 1, first, &fixed)?;
    let d2 = central_derivatives(f, x, 2, second, &fixed)?;
    let (dp, dq) = (d1[0].value, d1[1].value);
    let scale = p.norm().max(q.norm()).max(1.0);
    let ode = match which {
        HyperOde::P => x * (x - 1.0) * d2[0].value + (2.0 * x - 1.0) * dp + 0.25 * p,
        HyperOde::Q => x * (x - 1.0) * d2[1].value + 2.0 * x * dq + 0.25 * q,
    };
    let (r1, r2) = pq_system_residual(&PqParams::picard_fuchs(), x, p, dp, q, dq);
    Ok(HypergeometricReport {
        which,
        ode: ode.norm() / scale,
        relation: (q - 2.0 * x * dp).norm() / scale,
        system: r1.norm().max(r2.norm()) / scale,
    })
}
