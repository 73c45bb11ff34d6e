//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs as a plain binary. The exit status is non-zero only when a check
//! cannot run at all, or when `WALKMAX_ACCEPTANCE_STRICT` is set and some
//! criterion fails.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use walkmax::engine::{identity_residuals, run, MethodConfig, ModeChoice, Request, RequestResult, RunPlan};
use walkmax::golden::{scenario, Scenario, A1_GRID, A2_GRID, SCENARIO_IDS};
use walkmax::models::KoBoLModel;
use walkmax::oracle::{exchange_two_steps, killed_cpdf, step_kernel, StepLaw};
use walkmax::valuation::{CpdfRequest, ExchangeRequest};
use walkmax::zinv::{build_plan, build_trapezoid_plan, invert_sinh, invert_trapezoid, Growth, TildeFunction};

type Check = std::result::Result<(bool, String), String>;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn cpdf(a1: f64, a2: f64) -> Request {
    Request::Cpdf(CpdfRequest::new(a1, a2, 0.0, 0.0).expect("grid point"))
}

fn values(res: &[RequestResult]) -> std::result::Result<Vec<f64>, String> {
    res.iter().map(|r| r.value.clone().map_err(|e| e.to_string())).collect()
}

struct TableRun {
    values: Vec<f64>,
    max_dev: f64,
    max_imag: f64,
    m0: usize,
    seconds: f64,
}

fn table_run(s: &Scenario, mode: ModeChoice) -> std::result::Result<TableRun, String> {
    let m = s.model().map_err(|e| e.to_string())?;
    let pts = s.points();
    let t = Instant::now();
    let method = MethodConfig { mode, ..Default::default() };
    let plan = RunPlan::build(&m, s.n_steps(), &method, pts.iter().map(|&(a1, a2, _)| cpdf(a1, a2)).collect())
        .map_err(|e| e.to_string())?;
    let res = run(&m, &plan, None);
    let seconds = t.elapsed().as_secs_f64();
    let vals = values(&res)?;
    let max_dev = vals.iter().zip(&pts).map(|(v, p)| (v - p.2).abs()).fold(0.0, f64::max);
    let max_imag = res.iter().map(|r| r.diagnostics.imag_residual).fold(0.0, f64::max);
    Ok(TableRun { values: vals, max_dev, max_imag, m0: plan.z_plan.m0(), seconds })
}

fn table_criterion(id: &str, budget: f64, m0_range: (usize, usize), runs: &mut Vec<(String, TableRun)>) -> Check {
    let s = scenario(id).map_err(|e| e.to_string())?;
    let r = table_run(&s, ModeChoice::Auto)?;
    let pass = r.max_dev <= 1e-8 && r.seconds < budget && r.m0 >= m0_range.0 && r.m0 <= m0_range.1;
    let msg = format!(
        "{id}: max |dev| {:.2e} over 25 points (<= 1e-8), sinh M0 {} (allowed {}..={}, reported {}), {:.2} s (< {budget} s)",
        r.max_dev, r.m0, m0_range.0, m0_range.1, s.reported_sinh_m0, r.seconds
    );
    runs.push((id.to_string(), r));
    Ok((pass, msg))
}

fn criterion_5(runs: &[(String, TableRun)]) -> Check {
    let mut pass = true;
    let mut parts = Vec::new();
    for id in SCENARIO_IDS {
        let s = scenario(id).map_err(|e| e.to_string())?;
        let sinh = &runs.iter().find(|(k, _)| k == id).ok_or("missing sinh run")?.1;
        let trap = table_run(&s, ModeChoice::Trapezoid)?;
        let diff = sinh.values.iter().zip(&trap.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let reported = s.reported_trapezoid_m0 as f64;
        let ratio = trap.m0 as f64 / reported;
        let ok = diff <= 1e-9 && (0.5..=2.0).contains(&ratio);
        pass &= ok;
        parts.push(format!("{id}: |sinh-trap| {diff:.1e}, trap M0 {} vs {} ({:.0} s)", trap.m0, s.reported_trapezoid_m0, trap.seconds));
    }
    Ok((pass, parts.join("; ")))
}

fn criterion_6() -> Check {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for id in SCENARIO_IDS {
        let s = scenario(id).map_err(|e| e.to_string())?;
        let m = s.model().map_err(|e| e.to_string())?;
        let plan = RunPlan::build(&m, s.n_steps(), &MethodConfig::default(), vec![cpdf(0.0, 0.1)]).map_err(|e| e.to_string())?;
        let r = identity_residuals(&m, &plan).map_err(|e| e.to_string())?;
        count += r.len();
        worst = r.iter().cloned().fold(worst, f64::max);
    }
    Ok((worst <= 1e-12, format!("max relative residual {worst:.2e} over {count} q-nodes (<= 1e-12)")))
}

fn criterion_7() -> Check {
    let s = scenario("t025_nu02").map_err(|e| e.to_string())?;
    let m = s.model().map_err(|e| e.to_string())?;
    let law = StepLaw::new(&m).map_err(|e| e.to_string())?;
    let ns = [1usize, 2, 5, 10];
    let a2s = [0.05, 0.1, 0.175];
    let a1s = [-0.05, 0.0, 0.025];
    let mut engine = Vec::new();
    for &n in &ns {
        let reqs = a2s.iter().flat_map(|&a2| a1s.iter().map(move |&a1| cpdf(a1, a2))).collect();
        let plan = RunPlan::build(&m, n, &MethodConfig::default(), reqs).map_err(|e| e.to_string())?;
        engine.push(values(&run(&m, &plan, None))?);
    }
    // errs[h][n][point]
    let mut errs = Vec::new();
    for h in [1e-4, 5e-5] {
        let k = step_kernel(&law, h).map_err(|e| e.to_string())?;
        let mut e = vec![vec![0.0; 9]; ns.len()];
        for (ia2, &a2) in a2s.iter().enumerate() {
            let rows = killed_cpdf(&k, 1.5, a2, &a1s, &ns).map_err(|e| e.to_string())?;
            for (r, row) in rows.iter().enumerate() {
                for (ia1, v) in row.iter().enumerate() {
                    e[r][ia2 * 3 + ia1] = (v - engine[r][ia2 * 3 + ia1]).abs();
                }
            }
        }
        errs.push(e);
    }
    let max_of = |e: &Vec<Vec<f64>>| e.iter().flatten().cloned().fold(0.0, f64::max);
    let (coarse, fine) = (max_of(&errs[0]), max_of(&errs[1]));
    let within = coarse <= 5e-4;
    let ratios: Vec<f64> = (0..ns.len())
        .map(|r| {
            let c = errs[0][r].iter().cloned().fold(0.0, f64::max);
            let f = errs[1][r].iter().cloned().fold(0.0, f64::max);
            c / f
        })
        .collect();
    let improves = ratios.iter().all(|&r| r >= 2.0);

    let t = Instant::now();
    let (_, v2) = exchange_two_steps(&law, 1.5, 1e-4).map_err(|e| e.to_string())?;
    let ex = Request::Exchange(ExchangeRequest::new(1.5, 0.0, 0.0).map_err(|e| e.to_string())?);
    let plan = RunPlan::build(&m, 2, &MethodConfig::default(), vec![ex]).map_err(|e| e.to_string())?;
    let e2 = values(&run(&m, &plan, None))?[0];
    let rel = (v2 / e2 - 1.0).abs();
    let ex_ok = rel <= 1e-3;

    let msg = format!(
        "cpdf max |dev| {coarse:.2e} at h=1e-4, {fine:.2e} at h=5e-5 (<= 5e-4: {}); max-error ratio per n {:?} (>= 2: {}); \
         exchange n=2 oracle {v2:.6e} vs {e2:.6e}, rel {rel:.1e} (<= 1e-3: {}, {:.1} s)",
        yes(within),
        ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>(),
        yes(improves),
        yes(ex_ok),
        t.elapsed().as_secs_f64()
    );
    Ok((within && improves && ex_ok, msg))
}

fn yes(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "NOT MET"
    }
}

fn criterion_8() -> Check {
    let mut worst: f64 = 0.0;
    for n in [2usize, 7, 10, 100, 1000, 10_000] {
        let plan = build_plan(3.0 * PI / 4.0, 1.0, n, 1e-13, 1.0, 0.0).map_err(|e| e.to_string())?;
        let linear = build_plan(3.0 * PI / 4.0, 1.0, n, 1e-13, 2.0, 1.0).map_err(|e| e.to_string())?;
        let geo = TildeFunction { eval: |z: Complex64| ONE / (ONE - z), growth: Growth::default() };
        let bin = TildeFunction { eval: |z: Complex64| ONE / ((ONE - z) * (ONE - z)), growth: Growth::default() };
        let g = invert_sinh(&geo, n, &plan).map_err(|e| e.to_string())?;
        let b = invert_sinh(&bin, n, &linear).map_err(|e| e.to_string())?;
        worst = worst.max((g - 1.0).abs()).max((b / (n as f64 + 1.0) - 1.0).abs());
        let plan = build_plan(FRAC_PI_2, 2.0, n, 1e-13, 1.0, 0.0).map_err(|e| e.to_string())?;
        let exp = TildeFunction { eval: |z: Complex64| z.exp(), growth: Growth::default() };
        let truth = if n < 171 { 1.0 / (1..=n).map(|k| k as f64).product::<f64>() } else { 0.0 };
        worst = worst.max((invert_sinh(&exp, n, &plan).map_err(|e| e.to_string())? - truth).abs());
    }
    let rho0: f64 = 1.5;
    let n = 3;
    let tv = TildeFunction { eval: move |z: Complex64| ONE / (ONE - z / rho0), growth: Growth::default() };
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for m0 in [5usize, 10, 20, 30] {
        let mut p = build_trapezoid_plan(n, 1e-10, 1.0, Growth::default(), 1.0).map_err(|e| e.to_string())?;
        p.radius = 1.0;
        p.m_total = 2 * m0 + 1;
        let m = p.m_total as i32;
        let err = (invert_trapezoid(&tv, n, &p).map_err(|e| e.to_string())? - rho0.powi(-(n as i32))).abs();
        let r = 1.0 / rho0;
        let bound = rho0.powi(-(n as i32)) * r.powi(m) / (1.0 - r.powi(m));
        lo = lo.min(err / bound);
        hi = hi.max(err / bound);
    }
    let pass = worst <= 1e-12 && lo >= 0.1 && hi <= 10.0;
    Ok((
        pass,
        format!("sinh families n in 2..=1e4 max error {worst:.1e}, relative for the binomial (<= 1e-12); trapezoid error / rate bound in [{lo:.3}, {hi:.3}] (within 10x)"),
    ))
}

fn criterion_9(runs: &[(String, TableRun)]) -> Check {
    let mut notes = Vec::new();
    let mut pass = true;
    for (id, r) in runs {
        let v = &r.values;
        let in_range = v.iter().all(|&x| (0.0..=1.0 + 1e-10).contains(&x));
        let at = |ia2: usize, ia1: usize| v[ia2 * A1_GRID.len() + ia1];
        let mut mono = true;
        for ia2 in 0..A2_GRID.len() {
            for ia1 in 0..A1_GRID.len() {
                if ia1 > 0 && at(ia2, ia1) < at(ia2, ia1 - 1) {
                    mono = false;
                }
                if ia2 > 0 && at(ia2, ia1) < at(ia2 - 1, ia1) {
                    mono = false;
                }
            }
        }
        let imag_ok = r.max_imag <= 1e-10;
        if !(in_range && mono && imag_ok) {
            notes.push(format!("{id}: range {in_range} monotone {mono} imag {:.1e}", r.max_imag));
            pass = false;
        }
    }
    let s = scenario("t15_nu12").map_err(|e| e.to_string())?;
    let m: KoBoLModel = s.model().map_err(|e| e.to_string())?;
    let reqs = vec![
        Request::Cpdf(CpdfRequest::new(-0.05, 0.05, 0.0, 0.1).map_err(|e| e.to_string())?),
        Request::Cpdf(CpdfRequest::new(0.05, 0.05, -0.02, -0.02).map_err(|e| e.to_string())?),
        Request::NoTouch { a2: 0.05, x1: -0.02 },
        cpdf(-0.025, 0.075),
    ];
    let plan = RunPlan::build(&m, s.n_steps(), &MethodConfig::default(), reqs).map_err(|e| e.to_string())?;
    let one = run(&m, &plan, Some(1));
    let two = run(&m, &plan, Some(2));
    let a = values(&one)?;
    let b = values(&two)?;
    let zero_ok = a[0] == 0.0;
    let diag = (a[1] - a[2]).abs();
    let workers_ok = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
    let imag = one.iter().map(|r| r.diagnostics.imag_residual).fold(0.0, f64::max);
    pass &= zero_ok && diag <= 1e-10 && workers_ok && imag <= 1e-10;
    notes.push(format!(
        "tables in [0, 1+1e-10] and monotone in a1, a2; x2>a2 gives {}; |no-touch - diagonal| {diag:.1e}; 1 vs 2 workers bit-identical: {workers_ok}; imag {imag:.1e}",
        a[0]
    ));
    Ok((pass, notes.join("; ")))
}

fn report(n: usize, c: Check, failures: &mut usize, broken: &mut usize) {
    match c {
        Ok((true, msg)) => println!("criterion {n}: PASS  {msg}"),
        Ok((false, msg)) => {
            *failures += 1;
            println!("criterion {n}: FAIL  {msg}");
        }
        Err(e) => {
            *broken += 1;
            println!("criterion {n}: FAIL  could not run: {e}");
        }
    }
}

fn main() {
    let mut runs = Vec::new();
    let (mut failures, mut broken) = (0, 0);
    report(1, table_criterion("t025_nu02", 5.0, (8, 64), &mut runs), &mut failures, &mut broken);
    report(2, table_criterion("t5_nu02", 10.0, (10, 100), &mut runs), &mut failures, &mut broken);
    report(3, table_criterion("t15_nu02", 20.0, (1, 200), &mut runs), &mut failures, &mut broken);
    report(4, table_criterion("t15_nu12", 30.0, (1, 200), &mut runs), &mut failures, &mut broken);
    report(5, criterion_5(&runs), &mut failures, &mut broken);
    report(6, criterion_6(), &mut failures, &mut broken);
    report(7, criterion_7(), &mut failures, &mut broken);
    report(8, criterion_8(), &mut failures, &mut broken);
    report(9, criterion_9(&runs), &mut failures, &mut broken);
    println!("acceptance: {} of 9 criteria pass", 9 - failures - broken);
    let strict = std::env::var_os("WALKMAX_ACCEPTANCE_STRICT").is_some();
    if broken > 0 || (strict && failures > 0) {
        std::process::exit(1);
    }
}
