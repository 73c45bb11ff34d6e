use num_complex::Complex64;
use proptest::prelude::*;
use walkmax::models::*;
use walkmax::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn kobol(nu: f64) -> KoBoLModel {
    KoBoLModel::with_m2(nu, 1.0, -2.0, 0.1, 1.0 / 252.0).unwrap()
}

#[test]
fn exponent_vanishes_at_origin() {
    for nu in [0.2, 1.2, 1.9] {
        let m = kobol(nu);
        assert_eq!(m.psi(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(m.phi(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }
}

#[test]
fn calibration_by_finite_difference() {
    for nu in [0.2, 1.2] {
        let m = kobol(nu);
        assert!((m.m2() - 0.1).abs() < 1e-15);
        let d = |h: f64| (m.psi(c(h, 0.0)).unwrap() + m.psi(c(-h, 0.0)).unwrap()).re / (h * h);
        let d2 = (4.0 * d(5e-5) - d(1e-4)) / 3.0;
        assert!((d2 - 0.1).abs() < 1e-9, "nu={nu}: {d2}");
    }
}

#[test]
fn mean_by_finite_difference() {
    for nu in [0.2, 1.2] {
        let m = kobol(nu);
        let h = 1e-5;
        // E Y = -i Phi'(0)
        let d = (m.phi(c(h, 0.0)).unwrap() - m.phi(c(-h, 0.0)).unwrap()) / (2.0 * h);
        let mean = (-Complex64::i() * d).re;
        assert!((mean - m.step_mean()).abs() < 1e-12, "nu={nu}: {mean} vs {}", m.step_mean());
    }
}

#[test]
fn doubling_intensity_doubles_exponent() {
    let a = KoBoLModel::new(0.7, 1.5, -2.5, 0.3, 0.01).unwrap();
    let b = KoBoLModel::new(0.7, 1.5, -2.5, 0.6, 0.01).unwrap();
    for xi in [c(3.0, 0.2), c(-40.0, -0.5), c(0.01, 0.0)] {
        let (pa, pb) = (a.psi(xi).unwrap(), b.psi(xi).unwrap());
        assert!((pb - pa * 2.0).norm() <= 1e-13 * pb.norm());
    }
}

#[test]
fn decay_along_real_axis() {
    for (nu, xi, rel) in [(0.2, 1e10, 0.02), (1.2, 1e4, 0.01)] {
        let m = kobol(nu);
        let info = m.analyticity();
        let lhs = -m.phi(c(xi, 0.0)).unwrap().norm().ln();
        let rhs = info.decay_coeff * xi.powf(info.decay_order);
        assert!((lhs / rhs - 1.0).abs() < rel, "nu={nu}: {lhs} vs {rhs}");
    }
}

#[test]
fn decay_inside_cone() {
    let m = kobol(1.2);
    let info = m.analyticity();
    let theta = 0.5 * info.gamma_plus;
    let mut last = f64::INFINITY;
    for r in [10.0, 100.0, 1000.0, 1e4] {
        let v = m.phi(Complex64::from_polar(r, theta)).unwrap().norm();
        assert!(v < last);
        last = v;
    }
    assert!(last < 1e-10);
}

#[test]
fn analyticity_metadata() {
    let m = kobol(0.2);
    let info = m.analyticity();
    assert_eq!((info.mu_minus, info.mu_plus), (-2.0, 1.0));
    assert!(info.gamma_minus < 0.0 && info.gamma_plus > 0.0);
    assert!(!info.one_sided());
    assert_eq!(info.drift, 0.0);
    let k = kobol(1.2);
    assert!((k.cone_half_angle() - std::f64::consts::PI / 2.4).abs() < 1e-15);
}

#[test]
fn strip_bounds_examples() {
    let m = kobol(0.2);
    let (lo, hi, margin) = strip_bounds(&m, 1e-9).unwrap();
    assert!((lo + 2.0).abs() < 1e-5 && (hi - 1.0).abs() < 1e-5);
    assert!((margin - 1.0).abs() < 1e-8);
    assert!(matches!(strip_bounds(&m, 1.0), Err(Error::StripNotFound { .. })));
    let (lo, hi, margin) = strip_bounds(&m, 0.99).unwrap();
    assert!(lo < 0.0 && hi > 0.0 && margin > 0.0);
}

#[test]
fn parameter_validation() {
    assert!(matches!(KoBoLModel::new(1.0, 1.0, -2.0, 1.0, 0.1), Err(Error::InvalidModel(_))));
    assert!(KoBoLModel::new(2.5, 1.0, -2.0, 1.0, 0.1).is_err());
    assert!(KoBoLModel::new(0.5, -1.0, -2.0, 1.0, 0.1).is_err());
    assert!(KoBoLModel::new(0.5, 1.0, 2.0, 1.0, 0.1).is_err());
    assert!(KoBoLModel::new(0.5, 1.0, -2.0, 0.0, 0.1).is_err());
    assert!(KoBoLModel::new(0.5, 1.0, -2.0, 1.0, 0.0).is_err());
    assert!(calibrate_c(0.5, 1.0, -2.0, -0.1).is_err());
}

#[test]
fn branch_cuts_are_reported() {
    let m = kobol(0.2);
    assert!(matches!(m.psi(c(0.0, 1.5)), Err(Error::BranchCut { .. })));
    assert!(matches!(m.psi(c(0.0, -3.0)), Err(Error::BranchCut { .. })));
    assert!(m.psi(c(0.0, 0.99)).is_ok());
}

#[test]
fn small_argument_helpers() {
    let z = c(1e-12, -3e-13);
    assert!((clog1p(z) - z).norm() < 1e-24);
    assert!((cexpm1(z) - z).norm() < 1e-24);
    let w = c(0.3, 1.1);
    assert!((cexpm1(w) - (w.exp() - 1.0)).norm() < 1e-15);
    assert!((clog1p(w) - (w + 1.0).ln()).norm() < 1e-15);
    assert!((gamma_fn(5.0) - 24.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn conjugate_symmetry(x in -500.0f64..500.0, y in -1.9f64..0.9, nu in prop::sample::select(vec![0.2, 0.6, 1.2, 1.7])) {
        let m = kobol(nu);
        let a = m.psi(c(x, y)).unwrap();
        let b = m.psi(c(-x, y)).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn characteristic_function_is_bounded(x in -1e6f64..1e6, nu in prop::sample::select(vec![0.2, 1.2])) {
        let m = kobol(nu);
        prop_assert!(m.phi(c(x, 0.0)).unwrap().norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn one_minus_phi_consistent(x in -50.0f64..50.0, y in -1.5f64..0.5) {
        let m = kobol(0.2);
        let xi = c(x, y);
        let d = m.one_minus_phi(xi).unwrap() - (1.0 - m.phi(xi).unwrap());
        prop_assert!(d.norm() < 1e-14);
    }
}
