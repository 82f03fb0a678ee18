use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;
use trischl::numerics::{DiffSpec, QuadratureSpec};
use trischl::painleve6::{
    hypergeometric_residual, hypergeometric_standard_residual, p_equation_residual, pq_system_residual,
    pvi_params_from_alphas, pvi_residual, pvi_rhs, q_equation_residual, y_case1, y_case2, y_case2_unsimplified,
    Evaluation, GenusOneFamily, HyperOde, PqParams, RationalPviParams,
};
use trischl::schlesinger::SolutionCase;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn grid() -> Vec<Complex64> {
    let mut xs: Vec<Complex64> = (1..=19).map(|k| c(0.05 * k as f64)).collect();
    xs.push(Complex64::new(0.3, 0.2));
    xs.push(Complex64::new(0.6, -0.25));
    xs
}

const CYCLES: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, -1.0)];

fn worst_residual(case: SolutionCase) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut poles = 0;
    for (c1, c2) in CYCLES {
        let fam = GenusOneFamily::new(case, c(c1), c(c2)).unwrap();
        let params = fam.params().to_complex();
        for x in grid() {
            match fam.evaluate(x, &q()).unwrap() {
                Evaluation::Regular(p) => worst = worst.max(p.residual(&params).unwrap()),
                _ => poles += 1,
            }
        }
    }
    (worst, poles)
}

#[test]
fn rational_residual_example() {
    let p = RationalPviParams::eighths().to_complex();
    let r = pvi_residual(c(2.0), c(3.0), c(0.0), c(0.0), &p).unwrap();
    let exact = Rational64::new(-253, 192);
    assert!(
        (r - c(*exact.numer() as f64 / *exact.denom() as f64)).norm() < 1e-12,
        "{r}"
    );
    let rhs = pvi_rhs(c(0.7), Complex64::new(0.2, 0.1), c(1.3), &p).unwrap();
    assert_eq!(
        pvi_residual(c(0.7), Complex64::new(0.2, 0.1), c(1.3), rhs, &p).unwrap(),
        c(0.0)
    );
}

#[test]
fn family_parameters_follow_the_eigenvalue_map() {
    let eighths = RationalPviParams::eighths();
    assert_eq!(
        GenusOneFamily::new(SolutionCase::Case1 { n: -1 }, c(1.0), c(0.0))
            .unwrap()
            .params(),
        eighths
    );
    assert_eq!(
        GenusOneFamily::new(SolutionCase::Case2, c(1.0), c(0.0))
            .unwrap()
            .params(),
        eighths
    );
    for n in [1i32, 2, 3, -2, -3] {
        let fam = GenusOneFamily::new(SolutionCase::Case1 { n }, c(1.0), c(1.0)).unwrap();
        let n = i64::from(n);
        let want = RationalPviParams::new(
            Rational64::new(9 * n * n + 12 * n + 4, 8),
            Rational64::new(-n * n, 8),
            Rational64::new(n * n, 8),
            Rational64::new(4 - n * n, 8),
        );
        assert_eq!(fam.params(), want);
        let [a1, a2, a3, ai] = fam.eigenvalues();
        assert_eq!(pvi_params_from_alphas(a1, a2, a3, ai), want);
    }
}

#[test]
fn minus_one_family_solves_pvi_on_grid() {
    let (worst, _) = worst_residual(SolutionCase::Case1 { n: -1 });
    assert!(worst < 1e-6, "{worst}");
    let p = y_case1(c(0.4), c(1.0), c(1.0), -1, &q()).unwrap();
    assert!(
        p.point()
            .unwrap()
            .residual(&RationalPviParams::eighths().to_complex())
            .unwrap()
            < 1e-6
    );
}

#[test]
fn second_family_solves_pvi_on_grid() {
    let (worst, _) = worst_residual(SolutionCase::Case2);
    assert!(worst < 1e-6, "{worst}");
    let p = y_case2(c(0.3), c(1.0), c(0.0), &q()).unwrap();
    assert!(
        p.point()
            .unwrap()
            .residual(&RationalPviParams::eighths().to_complex())
            .unwrap()
            < 1e-6
    );
}

#[test]
fn general_power_families_solve_pvi_on_grid() {
    for n in [1, 3, -2, -3] {
        let (worst, _) = worst_residual(SolutionCase::Case1 { n });
        assert!(worst < 1e-6, "n={n}: {worst}");
    }
    // n = 2 has a_i = 0 identically, so there is no solution to test
    let fam = GenusOneFamily::new(SolutionCase::Case1 { n: 2 }, c(1.0), c(1.0)).unwrap();
    assert!(matches!(
        fam.evaluate(c(0.5), &q()).unwrap(),
        Evaluation::Degenerate { .. }
    ));
}

#[test]
fn two_forms_of_y_agree() {
    for x in [c(0.3), c(0.77), Complex64::new(0.3, 0.2)] {
        for (c1, c2) in CYCLES {
            // the first-set family written with a_3 in the denominator
            let fam = GenusOneFamily::new(SolutionCase::Case1 { n: -1 }, c(c1), c(c2)).unwrap();
            let (_, contours) = GenusOneFamily::contours(x).unwrap();
            let [a1, a2, a3] = fam.coefficients_on(&contours, x, &q()).unwrap();
            let y1 = x * a1 / (x * a1 + (x - 1.0) * a2);
            let y2 = -x * a1 / (x * a3 + a2);
            assert!((y1 - y2).norm() < 1e-9 * y1.norm().max(1.0));
            // original and simplified coefficients of the second set
            let simple = y_case2(x, c(c1), c(c2), &q()).unwrap().point().unwrap().y;
            let original = y_case2_unsimplified(x, c(c1), c(c2), &q()).unwrap();
            assert!((simple - original).norm() < 1e-9 * simple.norm().max(1.0));
        }
    }
}

#[test]
fn closed_form_derivatives_match_differences() {
    let d1 = DiffSpec::default();
    let d2 = DiffSpec::second_order();
    for case in [
        SolutionCase::Case1 { n: -1 },
        SolutionCase::Case2,
        SolutionCase::Case1 { n: 1 },
        SolutionCase::Case1 { n: 3 },
        SolutionCase::Case1 { n: -2 },
    ] {
        let mut worst: (f64, f64) = (0.0, 0.0);
        for (c1, c2) in CYCLES {
            let fam = GenusOneFamily::new(case, c(c1), c(c2)).unwrap();
            for x in grid() {
                if let Some((e1, e2)) = fam.derivative_check(x, &q(), &d1, &d2).unwrap() {
                    worst = (worst.0.max(e1), worst.1.max(e2));
                }
            }
        }
        assert!(worst.0 < 1e-6 && worst.1 < 1e-6, "{case:?}: {worst:?}");
    }
}

#[test]
fn general_second_derivative_matches_minus_one_display() {
    // chain rule with n = -1 must agree with -a1 a2 a3 / (2 D^3)
    let x = Complex64::new(0.35, 0.1);
    let fam = GenusOneFamily::new(SolutionCase::Case1 { n: -1 }, c(1.0), c(2.0)).unwrap();
    let (_, contours) = GenusOneFamily::contours(x).unwrap();
    let [a1, a2, a3] = fam.coefficients_on(&contours, x, &q()).unwrap();
    let d = x * a1 + (x - 1.0) * a2;
    let n = -1.0;
    let p = n * (x - 1.0) * a2 * a2 - n * x * a1 * a1 - 2.0 * (n + 1.0) * a1 * a2;
    let da1 = 0.5 * n * (2.0 * a1 + a2) / x;
    let da2 = 0.5 * n * (a1 + 2.0 * a2) / (x - 1.0);
    let dd = (1.0 + 1.5 * n) * (a1 + a2);
    let dp = n * a2 * a2 + 2.0 * n * (x - 1.0) * a2 * da2
        - n * a1 * a1
        - 2.0 * n * x * a1 * da1
        - 2.0 * (n + 1.0) * (da1 * a2 + a1 * da2);
    let chain = dp / (2.0 * d * d) - p * dd / (d * d * d);
    let display = -a1 * a2 * a3 / (2.0 * d * d * d);
    assert!((chain - display).norm() < 1e-10 * display.norm().max(1.0));
}

#[test]
fn projective_invariance() {
    let x = Complex64::new(0.45, 0.05);
    for case in [
        SolutionCase::Case1 { n: -1 },
        SolutionCase::Case2,
        SolutionCase::Case1 { n: 3 },
    ] {
        let base = GenusOneFamily::new(case, c(1.0), c(-0.5))
            .unwrap()
            .evaluate(x, &q())
            .unwrap();
        let lambda = Complex64::new(-2.5, 1.5);
        let scaled = GenusOneFamily::new(case, lambda, -0.5 * lambda)
            .unwrap()
            .evaluate(x, &q())
            .unwrap();
        let (a, b) = (base.point().unwrap().y, scaled.point().unwrap().y);
        assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
    }
}

#[test]
fn zero_cycle_and_zero_power_rejected() {
    assert!(GenusOneFamily::new(SolutionCase::Case2, c(0.0), c(0.0)).is_err());
    assert!(y_case1(c(0.3), c(1.0), c(0.0), 0, &q()).is_err());
}

#[test]
fn picard_fuchs_equations() {
    let d1 = DiffSpec::default();
    let d2 = DiffSpec::second_order();
    let r = hypergeometric_residual(HyperOde::P, c(0.3), c(1.0), c(0.0), &q(), &d1, &d2).unwrap();
    assert!(r.ode < 1e-6 && r.system < 1e-6, "{r:?}");
    let r = hypergeometric_residual(HyperOde::P, c(0.6), c(0.0), c(1.0), &q(), &d1, &d2).unwrap();
    assert!(r.relation < 1e-6, "{r:?}");
    let r = hypergeometric_residual(HyperOde::Q, c(0.3), c(1.0), c(1.0), &q(), &d1, &d2).unwrap();
    assert!(r.ode < 1e-6 && r.relation < 1e-6, "{r:?}");
    for x in grid() {
        for which in [HyperOde::P, HyperOde::Q] {
            let r = hypergeometric_residual(which, x, c(2.0), c(-1.0), &q(), &d1, &d2).unwrap();
            assert!(r.ode < 1e-6 && r.relation < 1e-6 && r.system < 1e-6, "{x}: {r:?}");
        }
    }
}

#[test]
fn pq_system_zero_solution() {
    let (a, b) = pq_system_residual(&PqParams::picard_fuchs(), c(0.3), c(0.0), c(0.0), c(0.0), c(0.0));
    assert_eq!((a, b), (c(0.0), c(0.0)));
}

/// Classical RK4 for the first-order pq system from `(x0, p0, q0)` to `x1`.
fn rk4(params: &PqParams, x0: f64, p0: f64, q0: f64, x1: f64, steps: usize) -> (f64, f64) {
    let [a, b, g] = [params.alpha, params.beta, params.gamma].map(|r| *r.numer() as f64 / *r.denom() as f64);
    let f = |x: f64, p: f64, q: f64| (2.0 / x * (g * p + a * (p + q)), 2.0 / (x - 1.0) * (g * q + b * (p + q)));
    let h = (x1 - x0) / steps as f64;
    let (mut x, mut p, mut q) = (x0, p0, q0);
    for _ in 0..steps {
        let k1 = f(x, p, q);
        let k2 = f(x + h / 2.0, p + h / 2.0 * k1.0, q + h / 2.0 * k1.1);
        let k3 = f(x + h / 2.0, p + h / 2.0 * k2.0, q + h / 2.0 * k2.1);
        let k4 = f(x + h, p + h * k3.0, q + h * k3.1);
        p += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        q += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        x += h;
    }
    (p, q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Integrate the first-order system numerically and difference the
    /// result: both second-order equations and their hypergeometric forms
    /// must hold for arbitrary eigenvalues.
    #[test]
    fn elimination_reproduces_second_order_equations(
        an in -12i64..12, bn in -12i64..12, gn in -12i64..12,
        p0 in -2.0f64..2.0, q0 in -2.0f64..2.0,
    ) {
        let params = PqParams::new(Rational64::new(an, 8), Rational64::new(bn, 8), Rational64::new(gn, 8));
        let (x0, x) = (0.3, 0.45);
        let at = |t: f64| rk4(&params, x0, p0, q0, t, 4000);
        let (pc, qc) = at(x);
        // central differences at h and h/2 combined to cancel the h^2 error
        let diffs = |h: f64| {
            let (pm, qm) = at(x - h);
            let (pp, qp) = at(x + h);
            [(pp - pm) / (2.0 * h), (qp - qm) / (2.0 * h), (pp - 2.0 * pc + pm) / (h * h), (qp - 2.0 * qc + qm) / (h * h)]
        };
        let (coarse, fine) = (diffs(4e-3), diffs(2e-3));
        let [dp, dq, d2p, d2q] = [0, 1, 2, 3].map(|k| (4.0 * fine[k] - coarse[k]) / 3.0);
        let size = |f: f64, df: f64, d2f: f64| f.abs() + df.abs() + d2f.abs();
        let tol_p = 1e-6 * size(pc, dp, d2p).max(1.0);
        let tol_q = 1e-6 * size(qc, dq, d2q).max(1.0);
        let xc = c(x);
        prop_assert!(p_equation_residual(&params, xc, c(pc), c(dp), c(d2p)).norm() < tol_p);
        prop_assert!(q_equation_residual(&params, xc, c(qc), c(dq), c(d2q)).norm() < tol_q);
        // standard form differs from ours by an overall sign
        prop_assert!(hypergeometric_standard_residual(params.hypergeometric_p(), xc, c(pc), c(dp), c(d2p)).norm() < tol_p);
        prop_assert!(hypergeometric_standard_residual(params.hypergeometric_q(), xc, c(qc), c(dq), c(d2q)).norm() < tol_q);
    }
}
