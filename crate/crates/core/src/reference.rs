//! Reference solutions of PVI(1/8, -1/8, 1/8, 3/8) built from theta series
//! and complete elliptic integrals: Picard's elliptic family pushed through
//! an Okamoto map, Hitchin's theta formula and the Kitaev-Korotkin tau
//! function. Derivatives in `x` come from Taylor jets sampled on circles, so
//! nested differentiation stays exact to roundoff.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{period, Cycle, HyperCurve, IntegrandSpec};
use crate::error::{Error, Result};
use crate::numerics::{taylor_jet, Jet, QuadratureSpec, TaylorJet, TaylorSpec};
use crate::painleve6::{Evaluation, PviPoint, RationalPviParams, POLE_THRESHOLD};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Hard cap on the number of theta-series terms.
pub const THETA_MAX_TERMS: usize = 64;

/// Relative size of the last included theta term.
pub const THETA_TRUNCATION: f64 = 1e-16;

/// Agreement required between `x` and the theta quartic ratio at `mu(x)`.
pub const ROUND_TRIP_TOL: f64 = 1e-10;

/// Complete elliptic integral `K(m) = int_0^{pi/2} dt / sqrt(1 - m sin^2 t)`
/// through the arithmetic-geometric mean, on the principal branch.
pub fn agm_ellipk(m: C) -> Result<C> {
    if !(m.re.is_finite() && m.im.is_finite()) {
        return Err(Error::InvalidInput(format!("modulus {m} is not finite")));
    }
    if m.im == 0.0 && m.re >= 1.0 {
        return Err(Error::Domain(format!("K(m) has a branch cut on [1, inf), got m = {m}")));
    }
    let mut a = C::new(1.0, 0.0);
    let mut b = (1.0 - m).sqrt();
    for _ in 0..64 {
        if (a - b).norm() <= 2.0 * f64::EPSILON * a.norm() {
            return Ok(PI / (2.0 * a));
        }
        let next = 0.5 * (a + b);
        let mut g = (a * b).sqrt();
        // the "right" square root keeps the iteration on the principal sheet
        if (next - g).norm() > (next + g).norm() {
            g = -g;
        }
        a = next;
        b = g;
    }
    Err(Error::Domain(format!("AGM iteration for K({m}) did not settle")))
}

/// `theta_{p,q}(z | mu)` and its first three `z`-derivatives,
/// `sum_n exp(i pi (n+p)^2 mu + 2 i pi (n+p)(z+q))`.
pub fn theta_jet(z: C, mu: C, p: f64, q: f64) -> Result<[C; 4]> {
    theta_jet_capped(z, mu, p, q, THETA_MAX_TERMS)
}

/// [`theta_jet`] with an explicit bound on the number of terms.
pub fn theta_jet_capped(z: C, mu: C, p: f64, q: f64, cap: usize) -> Result<[C; 4]> {
    if cap < 5 {
        return Err(Error::InvalidInput(format!(
            "theta term cap must be at least 5, got {cap}"
        )));
    }
    if !(mu.im > 0.0) {
        return Err(Error::Domain(format!("nome modulus >= 1 for mu = {mu}")));
    }
    // the largest term sits near a = -Im z / Im mu
    let centre = (-p - z.im / mu.im).round() as i64;
    let mut sum = [C::new(0.0, 0.0); 4];
    let mut scale = [0.0f64; 4];
    let add = |n: i64, sum: &mut [C; 4], scale: &mut [f64; 4]| -> [f64; 4] {
        let a = n as f64 + p;
        let base = (I * PI * a * a * mu + 2.0 * I * PI * a * (z + q)).exp();
        let f = 2.0 * I * PI * a;
        let mut t = base;
        let mut mags = [0.0; 4];
        for k in 0..4 {
            sum[k] += t;
            mags[k] = t.norm();
            scale[k] += mags[k];
            t *= f;
        }
        mags
    };
    add(centre, &mut sum, &mut scale);
    let mut terms = 1;
    let mut m = 1;
    loop {
        let up = add(centre + m, &mut sum, &mut scale);
        let down = add(centre - m, &mut sum, &mut scale);
        terms += 2;
        let settled = (0..4).all(|k| up[k].max(down[k]) <= THETA_TRUNCATION * scale[k]);
        if settled && m >= 2 {
            return Ok(sum);
        }
        if terms + 2 > cap {
            return Err(Error::Domain(format!(
                "theta series at mu = {mu} did not settle within {cap} terms"
            )));
        }
        m += 1;
    }
}

/// One derivative of `theta_{p,q}(z | mu)`, `order <= 3`.
pub fn theta(z: C, mu: C, (p, q): (f64, f64), order: usize) -> Result<C> {
    if order > 3 {
        return Err(Error::InvalidInput(format!(
            "theta derivatives go up to order 3, got {order}"
        )));
    }
    Ok(theta_jet(z, mu, p, q)?[order])
}

/// The four Jacobi thetas as characteristic choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Jacobi {
    One,
    Two,
    Three,
    Four,
}

impl Jacobi {
    /// `(p, q, sign)`, with `theta_1 = -theta_{1/2,1/2}`.
    pub fn characteristic(self) -> (f64, f64, f64) {
        match self {
            Jacobi::One => (0.5, 0.5, -1.0),
            Jacobi::Two => (0.5, 0.0, 1.0),
            Jacobi::Three => (0.0, 0.0, 1.0),
            Jacobi::Four => (0.0, 0.5, 1.0),
        }
    }

    /// Values and derivatives `0..=3` at `z`.
    pub fn jet(self, z: C, mu: C) -> Result<[C; 4]> {
        self.jet_capped(z, mu, THETA_MAX_TERMS)
    }

    pub fn jet_capped(self, z: C, mu: C, cap: usize) -> Result<[C; 4]> {
        let (p, q, s) = self.characteristic();
        Ok(theta_jet_capped(z, mu, p, q, cap)?.map(|v| v * s))
    }

    pub fn at(self, z: C, mu: C) -> Result<C> {
        Ok(self.jet(z, mu)?[0])
    }
}

/// A single theta evaluation kept for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub z: C,
    pub mu: C,
    pub p: f64,
    pub q: f64,
    pub order: usize,
    pub value: C,
}

impl ThetaValue {
    pub fn evaluate(z: C, mu: C, p: f64, q: f64, order: usize) -> Result<Self> {
        let value = theta(z, mu, (p, q), order)?;
        Ok(Self {
            z,
            mu,
            p,
            q,
            order,
            value,
        })
    }
}

/// `theta_2^4(0) / theta_3^4(0)`, the Legendre modulus of `mu`.
pub fn x_from_mu(mu: C) -> Result<C> {
    x_from_mu_capped(mu, THETA_MAX_TERMS)
}

fn x_from_mu_capped(mu: C, cap: usize) -> Result<C> {
    let zero = C::new(0.0, 0.0);
    let t2 = Jacobi::Two.jet_capped(zero, mu, cap)?[0];
    let t3 = Jacobi::Three.jet_capped(zero, mu, cap)?[0];
    Ok(t2.powu(4) / t3.powu(4))
}

/// Which anharmonic image of `x` the period ratio is attached to.
///
/// Each variant is a coset of the level-two congruence subgroup, acting on
/// the standard ratio `mu_0 = i K(1-x) / K(x)` by a fixed integer Mobius map
/// so that `theta_2^4 / theta_3^4` at the new ratio equals the named
/// function of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModularConvention {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "1-x")]
    OneMinusX,
    #[serde(rename = "1/x")]
    InverseX,
    #[serde(rename = "x/(x-1)")]
    XOverXMinusOne,
    #[serde(rename = "1/(1-x)")]
    InverseOneMinusX,
    #[serde(rename = "(x-1)/x")]
    XMinusOneOverX,
}

impl ModularConvention {
    /// Order in which conventions are tried by the residual gate.
    pub const RETRY_ORDER: [ModularConvention; 6] = [
        ModularConvention::X,
        ModularConvention::OneMinusX,
        ModularConvention::InverseX,
        ModularConvention::XOverXMinusOne,
        ModularConvention::InverseOneMinusX,
        ModularConvention::XMinusOneOverX,
    ];

    /// `[[a, b], [c, d]]` acting as `mu -> (a mu + b) / (c mu + d)`.
    pub fn matrix(self) -> [[f64; 2]; 2] {
        match self {
            ModularConvention::X => [[1.0, 0.0], [0.0, 1.0]],
            ModularConvention::XOverXMinusOne => [[1.0, 1.0], [0.0, 1.0]],
            ModularConvention::OneMinusX => [[0.0, -1.0], [1.0, 0.0]],
            ModularConvention::XMinusOneOverX => [[1.0, -1.0], [1.0, 0.0]],
            ModularConvention::InverseOneMinusX => [[0.0, -1.0], [1.0, 1.0]],
            ModularConvention::InverseX => [[-1.0, 0.0], [1.0, -1.0]],
        }
    }

    /// The value of `theta_2^4 / theta_3^4` this convention produces.
    pub fn modulus(self, x: C) -> C {
        let one = C::new(1.0, 0.0);
        match self {
            ModularConvention::X => x,
            ModularConvention::OneMinusX => one - x,
            ModularConvention::InverseX => one / x,
            ModularConvention::XOverXMinusOne => x / (x - one),
            ModularConvention::InverseOneMinusX => one / (one - x),
            ModularConvention::XMinusOneOverX => (x - one) / x,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModularConvention::X => "x",
            ModularConvention::OneMinusX => "1-x",
            ModularConvention::InverseX => "1/x",
            ModularConvention::XOverXMinusOne => "x/(x-1)",
            ModularConvention::InverseOneMinusX => "1/(1-x)",
            ModularConvention::XMinusOneOverX => "(x-1)/x",
        }
    }
}

/// Period data of the Legendre curve `v^2 = u (u-1)(u-x)` at one `x`.
///
/// `w1, w2` are half-periods of `du/v` with `mu = w2 / w1`; under the
/// identity convention `w1 = 2K(x)` and `w2 = 2i K(1-x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularPoint {
    pub x: C,
    pub convention: ModularConvention,
    pub mu: C,
    pub w1: C,
    pub w2: C,
    /// Term cap for theta series evaluated at this point.
    pub theta_cap: usize,
}

impl ModularPoint {
    pub fn new(x: C, convention: ModularConvention) -> Result<Self> {
        Self::with_cap(x, convention, THETA_MAX_TERMS)
    }

    pub fn with_cap(x: C, convention: ModularConvention, theta_cap: usize) -> Result<Self> {
        let one = C::new(1.0, 0.0);
        if x.norm() < 1e-14 || (x - one).norm() < 1e-14 {
            return Err(Error::InvalidInput(format!("x = {x} is a fixed singularity")));
        }
        if x.im == 0.0 && !(x.re > 0.0 && x.re < 1.0) {
            return Err(Error::Domain(format!(
                "x = {x} lies on a real cut where the period ratio depends on the side of approach; move x off the axis"
            )));
        }
        let k = agm_ellipk(x)?;
        let kp = agm_ellipk(one - x)?;
        let (w1, w2) = (2.0 * k, 2.0 * I * kp);
        let [[a, b], [c, d]] = convention.matrix();
        let (w2, w1) = (a * w2 + b * w1, c * w2 + d * w1);
        let mu = w2 / w1;
        if !(mu.im > 0.0) {
            return Err(Error::Domain(format!(
                "period ratio {mu} at x = {x} is not in the upper half plane"
            )));
        }
        let back = x_from_mu_capped(mu, theta_cap)?;
        let want = convention.modulus(x);
        let gap = (back - want).norm() / want.norm().max(1.0);
        if gap > ROUND_TRIP_TOL {
            return Err(Error::Consistency(format!(
                "theta quartic ratio {back} at mu = {mu} misses {want} by {gap:e}"
            )));
        }
        Ok(Self {
            x,
            convention,
            mu,
            w1,
            w2,
            theta_cap,
        })
    }

    pub fn jacobi(&self, j: Jacobi, z: C) -> Result<[C; 4]> {
        j.jet_capped(z, self.mu, self.theta_cap)
    }
}

/// `mu(x) = i K(1-x) / K(x)` with its half-periods.
pub fn mu_from_x(x: C) -> Result<ModularPoint> {
    ModularPoint::new(x, ModularConvention::X)
}

/// Weierstrass function of the lattice `Z + mu Z` through `theta_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weierstrass {
    pub mu: C,
    /// `theta_1'''(0) / (3 theta_1'(0))`.
    pub shift: C,
    /// Values at the half-periods `1/2`, `(1+mu)/2`, `mu/2`.
    pub e: [C; 3],
    /// `theta_1'(0)`, the natural size of `theta_1` near the origin.
    pub slope: C,
    pub cap: usize,
}

impl Weierstrass {
    pub fn new(mu: C) -> Result<Self> {
        Self::with_cap(mu, THETA_MAX_TERMS)
    }

    pub fn with_cap(mu: C, cap: usize) -> Result<Self> {
        let zero = C::new(0.0, 0.0);
        let t1 = Jacobi::One.jet_capped(zero, mu, cap)?;
        let t2 = Jacobi::Two.jet_capped(zero, mu, cap)?[0].powu(4);
        let t3 = Jacobi::Three.jet_capped(zero, mu, cap)?[0].powu(4);
        let t4 = Jacobi::Four.jet_capped(zero, mu, cap)?[0].powu(4);
        let p2 = PI * PI / 3.0;
        Ok(Self {
            mu,
            shift: t1[3] / (3.0 * t1[1]),
            e: [p2 * (t3 + t4), p2 * (t2 - t4), -p2 * (t2 + t3)],
            slope: t1[1],
            cap,
        })
    }

    /// `(p(z), p'(z))`; a lattice point is a domain error.
    pub fn eval(&self, z: C) -> Result<(C, C)> {
        let [t, d1, d2, d3] = Jacobi::One.jet_capped(z, self.mu, self.cap)?;
        if t.norm() <= POLE_THRESHOLD * self.slope.norm() * z.norm().max(1.0) {
            return Err(Error::Domain(format!("z = {z} is a lattice point")));
        }
        let f = d1 / t;
        let second = d2 / t - f * f;
        let third = d3 / t - 3.0 * d2 * d1 / (t * t) + 2.0 * f * f * f;
        Ok((self.shift - second, -third))
    }
}

/// Picard's solution of PVI(0, 0, 0, 1/2): the Legendre-normalised
/// Weierstrass function `(p(nu) - e_3) / (e_1 - e_3)` at `nu = c1 + c2 mu`.
pub fn picard_y0(x: C, c1: C, c2: C) -> Result<C> {
    picard_at(&mu_from_x(x)?, c1, c2)
}

fn picard_at(m: &ModularPoint, c1: C, c2: C) -> Result<C> {
    let w = Weierstrass::with_cap(m.mu, m.theta_cap)?;
    let (p, _) = w.eval(c1 + c2 * m.mu)?;
    Ok((p - w.e[2]) / (w.e[0] - w.e[2]))
}

/// Numerical settings for reference evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub taylor: TaylorSpec,
    pub theta_cap: usize,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self {
            taylor: TaylorSpec::default(),
            theta_cap: THETA_MAX_TERMS,
        }
    }
}

impl ReferenceSpec {
    pub fn point(&self, x: C, convention: ModularConvention) -> Result<ModularPoint> {
        ModularPoint::with_cap(x, convention, self.theta_cap)
    }
}

/// How Hitchin's theta formula is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HitchinReading {
    /// As printed, with the bare theta read as `theta_1`.
    Display,
    /// Constant term with the opposite sign and a single
    /// `theta_1'' theta_1'` in the numerator.
    Corrected,
}

/// How `D^2` in the Kitaev-Korotkin formula is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SquareReading {
    /// `D(D(f))`.
    Nested,
    /// `D(f)^2`.
    Squared,
}

/// One complete choice of conventions for a reference family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Reading {
    pub convention: ModularConvention,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hitchin: Option<HitchinReading>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub square: Option<SquareReading>,
}

impl Reading {
    pub fn plain(convention: ModularConvention) -> Self {
        Self {
            convention,
            hitchin: None,
            square: None,
        }
    }

    pub fn describe(&self) -> String {
        let mut s = format!("convention theta2^4/theta3^4 = {}", self.convention.label());
        if let Some(h) = self.hitchin {
            s.push_str(match h {
                HitchinReading::Display => ", formula as displayed",
                HitchinReading::Corrected => ", corrected constant and theta1''theta1' coefficient",
            });
        }
        if let Some(q) = self.square {
            s.push_str(match q {
                SquareReading::Nested => ", D^2 = D(D(.))",
                SquareReading::Squared => ", D^2 = D(.)^2",
            });
        }
        s
    }
}

/// Hitchin's solution at one `x`, `nu = c1 mu + c2`.
pub fn hitchin_y(x: C, c1: C, c2: C, reading: &Reading) -> Result<C> {
    let m = ModularPoint::new(x, reading.convention)?;
    hitchin_at(&m, c1, c2, reading.hitchin.unwrap_or(HitchinReading::Display))
}

fn hitchin_at(m: &ModularPoint, c1: C, c2: C, reading: HitchinReading) -> Result<C> {
    let mu = m.mu;
    let zero = C::new(0.0, 0.0);
    let nu = c1 * mu + c2;
    let z = m.jacobi(Jacobi::One, zero)?;
    let t = m.jacobi(Jacobi::One, nu)?;
    let t3 = m.jacobi(Jacobi::Three, zero)?[0].powu(4);
    let t4 = m.jacobi(Jacobi::Four, zero)?[0].powu(4);
    let k = 2.0 * PI * I * c1;
    let shift = t[1] + k * t[0];
    let den = 2.0 * PI * PI * t4 * t[0] * shift;
    let size = z[1].norm() * z[1].norm() * (PI * PI * t4).norm();
    if den.norm() <= POLE_THRESHOLD * size {
        return Err(Error::Domain(format!("Hitchin denominator vanishes at x = {}", m.x)));
    }
    let (sign, cross) = match reading {
        HitchinReading::Display => (1.0, 2.0),
        HitchinReading::Corrected => (-1.0, 1.0),
    };
    let constant = sign * z[3] / (3.0 * PI * PI * t4 * z[1]) + (1.0 + t3 / t4) / 3.0;
    let num = t[3] * t[0] - cross * t[2] * t[1] + 2.0 * k * (t[2] * t[0] - t[1] * t[1]);
    Ok(constant + num / den)
}

/// `theta_{p,q}(0 | mu) w1^{-1/2}`, the Kitaev-Korotkin tau function with
/// the elementary factor `(x (x-1))^{-1/8}` removed.
fn kk_core(m: &ModularPoint, p: C, q: C) -> Result<C> {
    if p.im != 0.0 || q.im != 0.0 {
        return Err(Error::InvalidInput("characteristics (p, q) must be real".into()));
    }
    let th = theta_jet_capped(C::new(0.0, 0.0), m.mu, p.re, q.re, m.theta_cap)?[0];
    Ok(th / m.w1.sqrt())
}

/// `tau(x) = theta_{p,q}(0) (x (x-1))^{-1/8} (int_0^1 du/v)^{-1/2}`, the
/// integral read as the half-period `w1` paired with `mu`. Principal branches.
pub fn kk_tau(x: C, p: C, q: C, convention: ModularConvention) -> Result<C> {
    let m = ModularPoint::new(x, convention)?;
    let core = kk_core(&m, p, q)?;
    if core.norm() == 0.0 {
        return Err(Error::Domain(format!("tau vanishes at x = {x}")));
    }
    Ok(core * (x * (x - 1.0)).powf(-0.125))
}

/// `D(f) = x (x-1) f'/f` on jets.
pub fn log_operator(f: &Jet, xj: &Jet) -> Result<Jet> {
    let xx = xj * &(xj + C::new(-1.0, 0.0));
    Ok(&xx * &f.log_derivative()?)
}

fn kk_from_core(core: &Jet, xj: &Jet, square: SquareReading) -> Result<Jet> {
    let one = C::new(1.0, 0.0);
    let xx = xj * &(xj + -one);
    // D(tau) = D(core) - D((x(x-1))^{1/8}) = D(core) - (2x - 1)/8
    let t = log_operator(core, xj)?;
    let dt = &t - &(&(xj * C::new(0.25, 0.0)) + C::new(-0.125, 0.0));
    let ratio = dt.diff().div(&t.diff())?;
    let outer = log_operator(&ratio, xj)?;
    let d2 = match square {
        SquareReading::Nested => log_operator(&t, xj)?,
        SquareReading::Squared => &t * &t,
    };
    let inner = &outer + &xx.div(&d2)?;
    Ok(xj - &xx.div(&inner)?)
}

/// Kitaev-Korotkin solution with its first two derivatives.
pub fn kk_y(x: C, p: C, q: C, reading: &Reading, spec: &ReferenceSpec) -> Result<ReferencePoint> {
    ReferenceFamily::KitaevKorotkin { p, q }.evaluate(x, reading, spec)
}

/// Okamoto image of Picard's solution with `(y, y')`.
pub fn picard_okamoto_y(x: C, c1: C, c2: C, spec: &ReferenceSpec) -> Result<(C, C)> {
    let fam = ReferenceFamily::PicardOkamoto { c1, c2 };
    let pt = fam.evaluate(x, &Reading::plain(ModularConvention::X), spec)?;
    match pt.evaluation.point() {
        Some(p) => Ok((p.y, p.dy)),
        None => Err(Error::Domain(pt.evaluation.skip_note().unwrap_or_default())),
    }
}

/// `y0 + y0 (y0-1)(y0-x) / (x (x-1) y0' - y0 (y0-1))` on jets, or `None`
/// when the denominator vanishes at the centre.
pub fn okamoto(y0: &Jet, xj: &Jet) -> Result<Option<Jet>> {
    let one = C::new(1.0, 0.0);
    let y0m1 = y0 + -one;
    let xx = xj * &(xj + -one);
    let den = &(&xx * &y0.diff()) - &(y0 * &y0m1);
    let size = (y0.value() * y0m1.value()).norm().max(1.0);
    if den.value().norm() <= POLE_THRESHOLD * size {
        return Ok(None);
    }
    let num = &(y0 * &y0m1) * &(y0 - xj);
    Ok(Some(y0 + &num.div(&den)?))
}

/// The reference families with their free parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ReferenceFamily {
    Picard { c1: C, c2: C },
    PicardOkamoto { c1: C, c2: C },
    Hitchin { c1: C, c2: C },
    KitaevKorotkin { p: C, q: C },
}

/// A reference evaluation with the jet error estimate behind its derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub evaluation: Evaluation,
    pub derivative_error: f64,
}

impl ReferenceFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceFamily::Picard { .. } => "picard",
            ReferenceFamily::PicardOkamoto { .. } => "picard-okamoto",
            ReferenceFamily::Hitchin { .. } => "hitchin",
            ReferenceFamily::KitaevKorotkin { .. } => "kk",
        }
    }

    pub fn params(&self) -> RationalPviParams {
        match self {
            ReferenceFamily::Picard { .. } => RationalPviParams::picard(),
            _ => RationalPviParams::eighths(),
        }
    }

    /// Readings in the order the residual gate tries them.
    pub fn readings(&self) -> Vec<Reading> {
        match self {
            ReferenceFamily::Picard { .. } | ReferenceFamily::PicardOkamoto { .. } => {
                vec![Reading::plain(ModularConvention::X)]
            }
            ReferenceFamily::Hitchin { .. } => [HitchinReading::Display, HitchinReading::Corrected]
                .into_iter()
                .flat_map(|h| {
                    ModularConvention::RETRY_ORDER.into_iter().map(move |c| Reading {
                        convention: c,
                        hitchin: Some(h),
                        square: None,
                    })
                })
                .collect(),
            ReferenceFamily::KitaevKorotkin { .. } => [SquareReading::Nested, SquareReading::Squared]
                .into_iter()
                .flat_map(|s| {
                    ModularConvention::RETRY_ORDER.into_iter().map(move |c| Reading {
                        convention: c,
                        hitchin: None,
                        square: Some(s),
                    })
                })
                .collect(),
        }
    }

    /// Value, slope and curvature in `x` under one reading.
    pub fn evaluate(&self, x: C, reading: &Reading, spec: &ReferenceSpec) -> Result<ReferencePoint> {
        let singular = [C::new(0.0, 0.0), C::new(1.0, 0.0)];
        let conv = reading.convention;
        let taylor = &spec.taylor;
        let (jet, error) = match *self {
            ReferenceFamily::Picard { c1, c2 } => {
                if let Some(pole) = self.centre_pole(x, reading, spec)? {
                    return Ok(pole);
                }
                let tj = taylor_jet(|s| picard_at(&spec.point(s, conv)?, c1, c2), x, 3, taylor, &singular)?;
                (tj.jet.clone(), tj.derivative_error(2))
            }
            ReferenceFamily::PicardOkamoto { c1, c2 } => {
                if let Some(pole) = self.centre_pole(x, reading, spec)? {
                    return Ok(pole);
                }
                let tj = taylor_jet(|s| picard_at(&spec.point(s, conv)?, c1, c2), x, 4, taylor, &singular)?;
                match okamoto(&tj.jet, &Jet::variable(x, 4))? {
                    Some(y) => (y, tj.derivative_error(3)),
                    None => {
                        return Ok(ReferencePoint {
                            evaluation: Evaluation::Pole { x, denominator: 0.0 },
                            derivative_error: 0.0,
                        })
                    }
                }
            }
            ReferenceFamily::Hitchin { c1, c2 } => {
                if let Some(pole) = self.centre_pole(x, reading, spec)? {
                    return Ok(pole);
                }
                let h = reading.hitchin.unwrap_or(HitchinReading::Display);
                let tj: TaylorJet = taylor_jet(
                    |s| hitchin_at(&spec.point(s, conv)?, c1, c2, h),
                    x,
                    3,
                    taylor,
                    &singular,
                )?;
                (tj.jet.clone(), tj.derivative_error(2))
            }
            ReferenceFamily::KitaevKorotkin { p, q } => {
                let sq = reading.square.unwrap_or(SquareReading::Nested);
                let tj = taylor_jet(|s| kk_core(&spec.point(s, conv)?, p, q), x, 6, taylor, &singular)?;
                if tj.jet.value().norm() == 0.0 {
                    return Err(Error::Domain(format!("tau vanishes at x = {x}")));
                }
                let y = kk_from_core(&tj.jet, &Jet::variable(x, 6), sq)?;
                let rel = tj.derivative_error(5) / tj.jet.value().norm();
                (y, rel)
            }
        };
        let y = jet.value();
        let one = C::new(1.0, 0.0);
        let near = |a: C, b: C| (a - b).norm() <= 1e-10 * b.norm().max(1.0);
        let evaluation = if near(y, C::new(0.0, 0.0)) || near(y, one) || near(y, x) {
            Evaluation::SingularValue { x, y }
        } else {
            Evaluation::Regular(PviPoint {
                x,
                y,
                dy: jet.derivative(1),
                d2y: jet.derivative(2),
            })
        };
        Ok(ReferencePoint {
            evaluation,
            derivative_error: error,
        })
    }

    /// Detects a pole exactly at the expansion point.
    fn centre_pole(&self, x: C, reading: &Reading, spec: &ReferenceSpec) -> Result<Option<ReferencePoint>> {
        let m = spec.point(x, reading.convention)?;
        let value = match *self {
            ReferenceFamily::Picard { c1, c2 } | ReferenceFamily::PicardOkamoto { c1, c2 } => picard_at(&m, c1, c2),
            ReferenceFamily::Hitchin { c1, c2 } => {
                hitchin_at(&m, c1, c2, reading.hitchin.unwrap_or(HitchinReading::Display))
            }
            ReferenceFamily::KitaevKorotkin { .. } => return Ok(None),
        };
        match value {
            Ok(_) => Ok(None),
            Err(Error::Domain(_)) => Ok(Some(ReferencePoint {
                evaluation: Evaluation::Pole { x, denominator: 0.0 },
                derivative_error: 0.0,
            })),
            Err(e) => Err(e),
        }
    }
}

/// One `x` of a gate run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GatePoint {
    pub x: C,
    pub evaluation: Evaluation,
    pub residual: Option<f64>,
    pub derivative_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Outcome of one reading.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateAttempt {
    pub reading: Reading,
    /// Worst residual over regular points; infinite when evaluation failed.
    pub max_residual: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Residual gate over a grid: the first passing reading wins; otherwise
/// the attempt with the smallest residual is kept.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateReport {
    pub family: ReferenceFamily,
    pub reading: Reading,
    pub points: Vec<GatePoint>,
    pub attempts: Vec<GateAttempt>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

fn run_reading(
    family: &ReferenceFamily,
    reading: &Reading,
    xs: &[C],
    tol: f64,
    spec: &ReferenceSpec,
) -> Result<(Vec<GatePoint>, f64)> {
    let params = family.params().to_complex();
    let mut points = Vec::with_capacity(xs.len());
    let mut worst: f64 = 0.0;
    let mut regular = 0;
    for &x in xs {
        let rp = family.evaluate(x, reading, spec)?;
        let residual = match rp.evaluation.point() {
            Some(p) => {
                let r = p.residual(&params)?;
                worst = worst.max(r);
                regular += 1;
                Some(r)
            }
            None => None,
        };
        let note = rp.evaluation.skip_note().or_else(|| {
            (rp.derivative_error > tol).then(|| {
                format!(
                    "precision warning: jet error estimate {:e} exceeds the tolerance",
                    rp.derivative_error
                )
            })
        });
        points.push(GatePoint {
            x,
            evaluation: rp.evaluation,
            residual,
            derivative_error: rp.derivative_error,
            note,
        });
    }
    if regular == 0 {
        worst = f64::INFINITY;
    }
    Ok((points, worst))
}

/// Tries each reading of `family` on `xs` until one passes `tol`.
pub fn gate(family: &ReferenceFamily, xs: &[C], tol: f64, spec: &ReferenceSpec) -> Result<GateReport> {
    if xs.is_empty() {
        return Err(Error::InvalidInput("gate needs at least one x".into()));
    }
    let mut attempts = Vec::new();
    let mut best: Option<(Reading, Vec<GatePoint>, f64)> = None;
    for reading in family.readings() {
        match run_reading(family, &reading, xs, tol, spec) {
            Ok((points, worst)) => {
                let pass = worst < tol;
                attempts.push(GateAttempt {
                    reading,
                    max_residual: worst,
                    pass,
                    note: None,
                });
                if best.as_ref().is_none_or(|b| worst < b.2) {
                    best = Some((reading, points, worst));
                }
                if pass {
                    break;
                }
            }
            Err(e) if e.is_non_convergence() => return Err(e),
            Err(e) => attempts.push(GateAttempt {
                reading,
                max_residual: f64::INFINITY,
                pass: false,
                note: Some(e.to_string()),
            }),
        }
    }
    let Some((reading, points, worst)) = best else {
        return Err(Error::Domain(format!(
            "no reading of {} could be evaluated: {}",
            family.name(),
            attempts.last().and_then(|a| a.note.clone()).unwrap_or_default()
        )));
    };
    Ok(GateReport {
        family: *family,
        reading,
        points,
        attempts,
        max_residual: worst,
        tol,
        pass: worst < tol,
    })
}

/// Half-periods of `du/v` on the Legendre curve from the contour engine
/// next to `2K(x)` and `2i K(1-x)` from the AGM. Their sum is the integral
/// from 0 to 1 along one bank of the cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPeriodCheck {
    pub x: C,
    pub engine: [C; 2],
    pub agm: [C; 2],
    /// Relative gap, up to the orientation sign of each cycle.
    pub discrepancy: f64,
}

pub fn half_period_check(x: C, quad: &QuadratureSpec) -> Result<HalfPeriodCheck> {
    let curve = HyperCurve::legendre(x)?;
    let spec = IntegrandSpec::holomorphic();
    let engine = [
        0.5 * period(&curve, &Cycle::basis(1, 0), &spec, quad)?,
        0.5 * period(&curve, &Cycle::basis(1, 1), &spec, quad)?,
    ];
    let one = C::new(1.0, 0.0);
    let agm = [2.0 * agm_ellipk(x)?, 2.0 * I * agm_ellipk(one - x)?];
    let discrepancy = engine
        .iter()
        .zip(&agm)
        .map(|(e, a)| ((e - a).norm().min((e + a).norm())) / a.norm())
        .fold(0.0, f64::max);
    Ok(HalfPeriodCheck {
        x,
        engine,
        agm,
        discrepancy,
    })
}
