use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};
use walkmax::contours::{choose_step_from_bound, Plane, SinhMap, TrapezoidGrid};
use walkmax::zinv::*;
use walkmax::Error;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn geometric() -> TildeFunction<impl Fn(Complex64) -> Complex64> {
    TildeFunction { eval: |z: Complex64| ONE / (ONE - z), growth: Growth::default() }
}

fn binomial() -> TildeFunction<impl Fn(Complex64) -> Complex64> {
    TildeFunction { eval: |z: Complex64| ONE / ((ONE - z) * (ONE - z)), growth: Growth::default() }
}

fn exponential() -> TildeFunction<impl Fn(Complex64) -> Complex64> {
    TildeFunction { eval: |z: Complex64| z.exp(), growth: Growth::default() }
}

fn circle(n: usize, radius: f64, m0: usize) -> ZInversionPlan {
    let mut p = build_trapezoid_plan(n.max(1), 1e-10, 1.0, Growth::default(), 1.0).unwrap();
    p.radius = radius;
    p.m_total = 2 * m0 + 1;
    p
}

#[test]
fn constant_transform_at_zero() {
    let tv = TildeFunction { eval: |_z: Complex64| ONE, growth: Growth::default() };
    let p = build_trapezoid_plan(0, 1e-12, 1.0, Growth::default(), 1.0).unwrap();
    assert!((invert_trapezoid(&tv, 0, &p).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn trapezoid_examples() {
    let p = build_trapezoid_plan(5, 1e-12, 1.0, Growth::default(), 1.0).unwrap();
    assert!(p.radius < 1.0 && p.m_total % 2 == 1 && p.m_total >= 3);
    assert!((invert_trapezoid(&geometric(), 5, &p).unwrap() - 1.0).abs() < 1e-11);
    let p = build_trapezoid_plan(3, 1e-13, 2.0, Growth { c: 8.0, a: 0.0 }, 1.0).unwrap();
    assert!((invert_trapezoid(&exponential(), 3, &p).unwrap() - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn mode_mismatch_is_rejected() {
    let t = build_trapezoid_plan(5, 1e-12, 1.0, Growth::default(), 1.0).unwrap();
    assert!(invert_sinh(&geometric(), 5, &t).is_err());
    let s = build_plan(3.0 * PI / 4.0, 1.0, 20, 1e-12, 1.0, 0.0).unwrap();
    assert!(invert_trapezoid(&geometric(), 20, &s).is_err());
}

#[test]
fn sinh_examples() {
    let p = build_plan(FRAC_PI_2, 1.0, 10, 1e-12, 1.0, 0.0).unwrap();
    assert_eq!(p.case, Some(PlanCase::OneNarrow));
    assert!((invert_sinh(&geometric(), 10, &p).unwrap() - 1.0).abs() < 1e-12);

    let p = build_plan(FRAC_PI_2, 2.0, 6, 1e-13, 1.0, 0.0).unwrap();
    assert!((invert_sinh(&exponential(), 6, &p).unwrap() - 1.0 / 720.0).abs() < 1e-12);

    let p = build_plan(3.0 * PI / 4.0, 1.0, 7, 1e-13, 1.0, 0.0).unwrap();
    assert!((invert_sinh(&binomial(), 7, &p).unwrap() - 8.0).abs() < 1e-11);
}

#[test]
fn families_up_to_ten_thousand() {
    for n in [2usize, 10, 100, 1000, 10_000] {
        let p = build_plan(3.0 * PI / 4.0, 1.0, n, 1e-13, 1.0, 0.0).unwrap();
        assert!((invert_sinh(&geometric(), n, &p).unwrap() - 1.0).abs() < 1e-12, "geometric n={n}");
        let linear = build_plan(3.0 * PI / 4.0, 1.0, n, 1e-13, 2.0, 1.0).unwrap();
        let b = invert_sinh(&binomial(), n, &linear).unwrap();
        assert!((b / (n as f64 + 1.0) - 1.0).abs() < 1e-12, "binomial n={n}");
        let p = build_plan(FRAC_PI_2, 2.0, n, 1e-13, 1.0, 0.0).unwrap();
        let truth = if n < 171 { 1.0 / factorial(n) } else { 0.0 };
        assert!((invert_sinh(&exponential(), n, &p).unwrap() - truth).abs() < 1e-12, "exponential n={n}");
    }
}

#[test]
fn plan_cases() {
    let p = build_plan(FRAC_PI_2, 1.5, 63, 1e-12, 1.0, 0.0).unwrap();
    assert_eq!(p.case, Some(PlanCase::OneWide));
    assert!((p.contour.unwrap().omega - PI / 8.0).abs() < 1e-15);

    let p = build_plan(3.0 * PI / 4.0, 1.0, 100, 1e-12, 1.0, 0.0).unwrap();
    assert_eq!(p.case, Some(PlanCase::TwoNarrow));
    assert!((p.contour.unwrap().omega + PI / 8.0).abs() < 1e-15);
    assert!((p.radius - 0.95).abs() < 1e-15);
    // the innermost curve of the strip crosses the real axis at R
    let map = p.contour.unwrap().tilted(p.d_strip);
    assert!((map.eval(Complex64::new(0.0, 0.0)).re - 0.95).abs() < 1e-12);

    let p = build_plan(3.0 * PI / 4.0, 2.0, 100, 1e-12, 1.0, 0.0).unwrap();
    assert_eq!(p.case, Some(PlanCase::TwoWide));

    assert!(matches!(build_plan(PI / 5.0, 1.0, 10, 1e-12, 1.0, 0.0), Err(Error::GammaTooSmall { .. })));
    assert!(matches!(build_plan(PI, 1.0, 10, 1e-12, 1.0, 0.0), Err(Error::GammaTooSmall { .. })));
}

#[test]
fn case_iii_tolerance_formula() {
    assert_eq!(case_iii_tolerance(1e-10, 1.0, 10, 0.0), 1e-10);
    let t = case_iii_tolerance(1e-10, 0.9, 10, 0.0);
    assert!((t / (1e-10 * 0.9f64.powi(-11)) - 1.0).abs() < 1e-14);
    let t = case_iii_tolerance(1e-10, 0.5, 5, 0.5);
    assert!((t / (1e-10 * 64.0 * 0.5f64.sqrt()) - 1.0).abs() < 1e-14);
}

#[test]
fn rescaled_plan_inverts_smaller_disc() {
    // 1/(1 - z/0.5): V_n = 2^n, analytic in |z| < 0.5
    let tv = TildeFunction { eval: |z: Complex64| ONE / (ONE - z * 2.0), growth: Growth::default() };
    let p = rescale_case_iii(3.0 * PI / 4.0, 0.5, 40, 1e-12, 1.0, 0.0).unwrap();
    assert_eq!(p.scale, 0.5);
    let v = invert_sinh(&tv, 40, &p).unwrap();
    assert!((v / 2f64.powi(40) - 1.0).abs() < 1e-10, "{v} {p:?}");
    let id = rescale_case_iii(3.0 * PI / 4.0, 1.0, 40, 1e-12, 1.0, 0.0).unwrap();
    assert_eq!(id, build_plan(3.0 * PI / 4.0, 1.0, 40, 1e-12, 1.0, 0.0).unwrap());
}

#[test]
fn truncation_scan() {
    let map = SinhMap::new(Complex64::new(1.0, 0.0), 2.0, -PI / 8.0, Plane::Z).unwrap();
    assert!(matches!(truncation_by_scan(&map, 0.1, 0, 0.0, 1.0, 1e-12), Err(Error::InvalidOrder { .. })));
    let l = truncation_by_scan(&map, 0.05, 63, 0.0, 1.0, 1e-12).unwrap();
    assert!(l > 0.0 && l < 2.0, "{l}");
}

#[test]
fn longer_truncation_changes_nothing() {
    let p = build_plan(3.0 * PI / 4.0, 1.0, 63, 1e-12, 1.0, 0.0).unwrap();
    let a = invert_sinh(&binomial(), 63, &p).unwrap();
    let mut q = p.clone();
    let g = q.grid.unwrap();
    q.grid = Some(TrapezoidGrid::new(g.step, g.half_count * 3 / 2 + 1, true).unwrap());
    let b = invert_sinh(&binomial(), 63, &q).unwrap();
    assert!((a - b).abs() < 1e-12 * 64.0);
}

fn with_strip(p: &ZInversionPlan, d: f64) -> ZInversionPlan {
    let map = p.contour.unwrap();
    let w = map.omega;
    let (inner, outer) = (p.radius, 1.0);
    let b = (outer - inner) / ((w + d).sin() - (w - d).sin());
    let sigma = inner + b * (w + d).sin();
    let map = SinhMap::new(Complex64::new(sigma, 0.0), b, w, Plane::Z).unwrap();
    let step = choose_step_from_bound(d, p.hardy, p.tol).unwrap();
    let lam = truncation_by_scan(&map, step, p.n, 0.0, 1.0, p.tol).unwrap();
    let m0 = (lam / step).ceil() as usize;
    ZInversionPlan { contour: Some(map), grid: Some(TrapezoidGrid::new(step, m0, true).unwrap()), d_strip: d, ..p.clone() }
}

#[test]
fn strip_width_perturbation() {
    let n = 200;
    let p = build_plan(3.0 * PI / 4.0, 1.0, n, 1e-12, 1.0, 0.0).unwrap();
    let base = invert_sinh(&binomial(), n, &p).unwrap();
    for f in [0.8, 1.2] {
        let q = with_strip(&p, p.d_strip * f);
        let v = invert_sinh(&binomial(), n, &q).unwrap();
        assert!((v / base - 1.0).abs() < 1e-10, "factor {f}: {v} vs {base}");
    }
}

#[test]
fn trapezoid_error_tracks_rate() {
    // V_n = rho0^{-n}; on |z| = R the aliasing error is exactly rho0^{-n} r^M/(1 - r^M), r = R/rho0
    let rho0 = 1.5;
    let tv = TildeFunction { eval: move |z: Complex64| ONE / (ONE - z / rho0), growth: Growth::default() };
    let n = 3;
    for m0 in [5usize, 10, 20, 30] {
        let p = circle(n, 1.0, m0);
        let m = p.m_total as i32;
        let err = (invert_trapezoid(&tv, n, &p).unwrap() - rho0.powi(-(n as i32))).abs();
        let r = 1.0 / rho0;
        let bound = rho0.powi(-(n as i32)) * r.powi(m) / (1.0 - r.powi(m));
        let ratio = err / bound;
        assert!(ratio > 0.1 && ratio < 10.0, "M0={m0}: ratio {ratio}");
    }
}

#[test]
fn sinh_and_trapezoid_agree() {
    for n in [20usize, 300] {
        let s = build_plan(3.0 * PI / 4.0, 1.0, n, 1e-12, 1.0, 0.0).unwrap();
        let t = build_trapezoid_plan(n, 1e-12, 1.0, Growth { c: 1.0, a: 0.0 }, 1.0).unwrap();
        let tv = TildeFunction { eval: |z: Complex64| ONE / (ONE - z * 0.5), growth: Growth::default() };
        let a = invert_sinh(&tv, n, &s).unwrap();
        let b = invert_trapezoid(&tv, n, &t).unwrap();
        assert!((a - b).abs() < 2e-12, "n={n}: {a} {b}");
    }
}

#[test]
fn symmetric_and_full_sums_agree() {
    let p = build_plan(3.0 * PI / 4.0, 1.0, 50, 1e-12, 1.0, 0.0).unwrap();
    let full = ZInversionPlan { full: true, ..p.clone() };
    let (a, _) = invert(&binomial(), &p);
    let (b, im) = invert(&binomial(), &full);
    assert!((a - b).abs() < 1e-10 && im.abs() < 1e-10);
}

proptest! {
    #[test]
    fn trapezoid_exact_on_polynomials(coef in prop::collection::vec(-1.0f64..1.0, 1..12), n in 0usize..12, radius in 0.7f64..1.3) {
        let c = coef.clone();
        let tv = TildeFunction {
            eval: move |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a),
            growth: Growth::default(),
        };
        let p = circle(n, radius, 6);
        let want = coef.get(n).copied().unwrap_or(0.0);
        let got = invert_trapezoid(&tv, n, &p).unwrap();
        prop_assert!((got - want).abs() < 1e-13 * radius.powi(-(n as i32)).max(1.0) * 10.0);
    }
}
