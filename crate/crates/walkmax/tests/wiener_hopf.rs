use num_complex::Complex64;
use proptest::prelude::*;
use walkmax::contours::ContourSamples;
use walkmax::engine::{MethodConfig, RunPlan};
use walkmax::golden::scenario;
use walkmax::models::{KoBoLModel, StepModel};
use walkmax::wiener_hopf::*;
use walkmax::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn kobol(nu: f64) -> KoBoLModel {
    KoBoLModel::with_m2(nu, 1.0, -2.0, 0.1, 1.0 / 252.0).unwrap()
}

fn setup(m: &KoBoLModel) -> (ContourPair, CauchyKernels) {
    let pair = ContourPair::build(m, ContourPairConfig::cpdf(m, 1e-15).unwrap()).unwrap();
    let k = CauchyKernels::new(&pair).unwrap();
    (pair, k)
}

#[test]
fn factors_at_zero_are_one() {
    let m = kobol(0.2);
    let (pair, k) = setup(&m);
    let f = factors(c(0.0, 0.0), &pair, &k).unwrap();
    let one = c(1.0, 0.0);
    for v in f.phi_plus_on_plus.iter().chain(&f.phi_minus_on_minus).chain(&f.phi_plus_on_minus).chain(&f.phi_minus_on_plus) {
        assert_eq!(*v, one);
    }
    assert_eq!((f.c_plus, f.c_minus), (one, one));
    assert_eq!(constant_cpm(c(0.0, 0.0), &pair, Side::Plus).unwrap(), one);
    let known = vec![one; 5];
    let vals = vec![c(0.3, 0.1); 5];
    assert!(factor_via_identity(c(0.0, 0.0), &known, &vals).unwrap().iter().all(|v| *v == one));
}

#[test]
fn identity_holds_off_the_contours() {
    for nu in [0.2, 1.2] {
        let m = kobol(nu);
        let (pair, k) = setup(&m);
        let check = IdentityCheck::new(&m, &pair).unwrap();
        for q in [c(0.5, 0.0), c(0.9, 0.3), c(-0.7, 0.2), c(0.999, 0.0)] {
            let f = factors(q, &pair, &k).unwrap();
            let r = check.residual(&pair, &f).unwrap();
            assert!(r < 1e-12, "nu={nu} q={q}: {r}");
        }
    }
}

#[test]
fn constants_match_factors() {
    let m = kobol(1.2);
    let (pair, k) = setup(&m);
    let q = c(0.8, -0.2);
    let f = factors(q, &pair, &k).unwrap();
    assert_eq!(f.c_plus, constant_cpm(q, &pair, Side::Plus).unwrap());
    assert_eq!(f.c_minus, constant_cpm(q, &pair, Side::Minus).unwrap());
    // phi+ flattens to c+ far out on L+
    let n = f.phi_plus_on_plus.len();
    let far = (f.phi_plus_on_plus[n - 1] - f.c_plus).norm();
    let mid = (f.phi_plus_on_plus[3 * n / 4] - f.c_plus).norm();
    assert!(far < mid && far < 1e-6, "{far} {mid}");
    assert!((f.phi_minus_on_minus[0] - f.c_minus).norm() < 1e-6);
}

#[test]
fn direct_factor_matches_grid_factor() {
    let m = kobol(0.2);
    let (pair, k) = setup(&m);
    let q = c(0.7, 0.1);
    let f = factors(q, &pair, &k).unwrap();
    let direct = factor_plus(q, &pair.plus.xi, &m, &pair.minus).unwrap();
    for (a, b) in direct.iter().zip(&f.phi_plus_on_plus) {
        assert!((a - b).norm() < 1e-13);
    }
    let direct = factor_minus(q, &pair.minus.xi, &m, &pair.plus).unwrap();
    for (a, b) in direct.iter().zip(&f.phi_minus_on_minus) {
        assert!((a - b).norm() < 1e-13);
    }
    assert!(matches!(factor_plus(q, &pair.minus.xi[..1], &m, &pair.minus), Err(Error::DeformationInvalid { .. })));
}

#[test]
fn identity_side_matches_lower_copy() {
    // phi+ on L- from a copy of L- pushed further down
    let m = kobol(0.2);
    let (pair, k) = setup(&m);
    let q = c(0.6, 0.0);
    let f = factors(q, &pair, &k).unwrap();
    let map = pair.minus.map.tilted(-0.2);
    let step = pair.minus.step / 4.0;
    let copy = ContourSamples::new(map, step, pair.minus.half * 5);
    let pts: Vec<Complex64> = (0..pair.minus.len()).step_by(7).map(|i| pair.minus.xi[i]).collect();
    let direct = factor_plus(q, &pts, &m, &copy).unwrap();
    for (i, d) in (0..pair.minus.len()).step_by(7).zip(&direct) {
        assert!((d - f.phi_plus_on_minus[i]).norm() < 1e-11, "{i}: {d} {}", f.phi_plus_on_minus[i]);
    }
}

#[test]
fn refinement_changes_nothing() {
    let m = kobol(0.2);
    let cfg = ContourPairConfig::cpdf(&m, 1e-15).unwrap();
    let a = ContourPair::build(&m, cfg).unwrap();
    let b = ContourPair::build(&m, cfg.refined(2)).unwrap();
    let q = c(0.95, 0.05);
    let fa = factors(q, &a, &CauchyKernels::new(&a).unwrap()).unwrap();
    let fb = factors(q, &b, &CauchyKernels::new(&b).unwrap()).unwrap();
    assert!((fa.c_plus - fb.c_plus).norm() < 1e-12);
    assert!((fa.c_minus - fb.c_minus).norm() < 1e-12);
    for j in (0..a.plus.len()).step_by(11) {
        assert!((fa.phi_plus_on_plus[j] - fb.phi_plus_on_plus[2 * j]).norm() < 1e-12);
    }
}

#[test]
fn kernel_products() {
    let m = kobol(1.2);
    let (pair, k) = setup(&m);
    let u: Vec<Complex64> = (0..k.n_minus).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
    let v: Vec<Complex64> = (0..k.n_plus).map(|i| c((i as f64 * 0.7).cos(), -(i as f64).sin())).collect();
    let du = k.apply(&u);
    let dtv = k.apply_transpose(&v);
    for j in (0..k.n_plus).step_by(13) {
        let s: Complex64 = (0..k.n_minus).map(|i| k.d_plus_at(j, i) * u[i]).sum();
        assert!((s - du[j]).norm() < 1e-11);
    }
    for i in (0..k.n_minus).step_by(13) {
        let s: Complex64 = (0..k.n_plus).map(|j| k.d_plus_at(j, i) * v[j]).sum();
        assert!((s - dtv[i]).norm() < 1e-11);
        assert_eq!(k.d_minus_at(i, 0), -k.d_plus_at(0, i));
    }
    let (a, b) = k.apply_both(&u, &v);
    assert_eq!(a, du);
    assert_eq!(b, dtv);
    assert_eq!(k.d_plus_at(2, 3), 1.0 / (pair.plus.xi[2] - pair.minus.xi[3]));
}

#[test]
fn scenario_grid_is_certified() {
    let s = scenario("t15_nu12").unwrap();
    let m = s.model().unwrap();
    let plan = RunPlan::build(&m, s.n_steps(), &MethodConfig::default(), vec![]).unwrap();
    let qs: Vec<Complex64> = plan.z_plan.nodes().iter().map(|n| n.q).collect();
    let (pair, _) = setup(&m);
    let rep = certify_deformation(&qs, &pair, &m, DEFAULT_CUT_MARGIN).unwrap();
    assert!(rep.min_distance > DEFAULT_CUT_MARGIN && rep.samples > 0);
    assert!(certify_deformation(&[c(0.0, 0.0)], &pair, &m, DEFAULT_CUT_MARGIN).unwrap().min_distance >= 1.0 - 1e-15);
}

#[test]
fn certification_catches_a_zero() {
    // E exp(0.5 Y) > 1 at the apex of L-, so q = 1/Phi there puts a zero on the contour
    let m = kobol(0.2);
    let (pair, _) = setup(&m);
    let apex = pair.minus.xi[pair.minus.half];
    let q = 1.0 / m.phi(apex).unwrap();
    assert!(q.im.abs() < 1e-12);
    assert!(matches!(certify_deformation(&[q], &pair, &m, DEFAULT_CUT_MARGIN), Err(Error::DeformationInvalid { .. })));
}

#[test]
fn cut_distance_examples() {
    assert_eq!(cut_distance(c(3.0, 4.0)), 5.0);
    assert_eq!(cut_distance(c(-3.0, 4.0)), 4.0);
    assert_eq!(cut_distance(c(-3.0, 0.0)), 0.0);
}

#[test]
fn exchange_contours_need_room_below_minus_beta() {
    let m = KoBoLModel::with_m2(0.2, 1.0, -1.2, 0.1, 1.0 / 252.0).unwrap();
    assert!(matches!(ContourPairConfig::exchange(&m, 1.5, 1e-15), Err(Error::StripViolation(_))));
    let m = kobol(0.2);
    let cfg = ContourPairConfig::exchange(&m, 1.5, 1e-15).unwrap();
    assert!(cfg.apex_minus < -1.5 && cfg.apex_minus > -2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn identity_substitution_is_an_involution(re in -0.95f64..0.95, im in -0.3f64..0.3, x in -5.0f64..5.0) {
        let m = kobol(1.2);
        let q = c(re, im);
        let xi = c(x, 0.1);
        let p = m.phi(xi).unwrap();
        let f = c(0.9, 0.2);
        let once = factor_via_identity(q, &[f], &[p]).unwrap();
        let twice = factor_via_identity(q, &once, &[p]).unwrap();
        prop_assert!((twice[0] - f).norm() < 1e-13);
    }
}
