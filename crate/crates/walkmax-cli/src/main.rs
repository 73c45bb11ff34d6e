//! `walkmax`: price from a config file, reproduce the golden tables, invert test transforms.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use walkmax::engine::{run, worker_count, MethodConfig, ModeChoice, Request, RunPlan, THREADS_ENV};
use walkmax::golden::{scenario, SCENARIO_IDS};
use walkmax::valuation::CpdfRequest;
use walkmax::zinv::{build_plan, build_trapezoid_plan, invert_sinh, invert_trapezoid, Growth, TildeFunction};
use walkmax_cli::config::{Format, RunConfig};
use walkmax_cli::report::{self, Failure, RequestFailure, Row, EXIT_CONFIG, EXIT_FAIL};

#[derive(Parser)]
#[command(name = "walkmax", version, about = "Joint law of a random walk and its running maximum")]
struct Cli {
    /// Structured (JSON) report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for the q-grid.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the requests of a config file.
    Price {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.path`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fill the millis column (output is then no longer reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Reproduce a golden table.
    Bench {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SCENARIO_IDS))]
        scenario: String,
        #[arg(long, value_enum, default_value_t = BenchMode::Both)]
        mode: BenchMode,
        /// Require 1e-11 instead of 1e-8.
        #[arg(long)]
        strict: bool,
    },
    /// Invert a test transform with known coefficients.
    Invz {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = InvMode::Sinh)]
        mode: InvMode,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchMode {
    Sinh,
    Trapezoid,
    Both,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Family {
    /// 1/(1-z), V_n = 1
    Geometric,
    /// exp(z), V_n = 1/n!
    Exponential,
    /// (1-z)^-2, V_n = n+1
    Binomial,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum InvMode {
    Sinh,
    Trapezoid,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = worker_count(cli.threads);
    let result = match cli.command {
        Command::Price { ref config, ref out, timings } => price(config, out.as_ref(), timings, workers, cli.json),
        Command::Bench { ref scenario, mode, strict } => bench(scenario, mode, strict, workers, cli.json),
        Command::Invz { family, n, mode, tol } => invz(family, n, mode, tol, cli.json),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("{}", serde_json::to_string(&f).expect("failure record serializes"));
            ExitCode::from(f.exit_code as u8)
        }
    }
}

fn io_failure(code: i32, what: &str, e: impl std::fmt::Display) -> Failure {
    Failure::new(code, format!("{what}: {e}"))
}

fn price(path: &PathBuf, out: Option<&PathBuf>, timings: bool, workers: Option<usize>, json: bool) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(EXIT_CONFIG, &format!("cannot read {}", path.display()), e))?;
    let cfg = RunConfig::parse(&text)?;
    let requests = cfg.requests()?;
    let timings = timings || cfg.output.timings;

    let results = if requests.is_empty() {
        Vec::new()
    } else {
        let model = cfg.model()?;
        let plan = RunPlan::build(&model, cfg.n_steps()?, &cfg.method(), requests)?;
        run(&model, &plan, workers)
    };
    let rows: Vec<Row> = results.iter().map(|r| Row::new(r, timings)).collect();

    let target = out.cloned().or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    let mut buf = Vec::new();
    match cfg.output.format {
        Format::Csv => report::write_csv(&mut buf, &rows).map_err(|e| io_failure(report::EXIT_NUMERICAL, "csv", e))?,
        Format::Json => report::write_json(&mut buf, &rows).map_err(|e| io_failure(report::EXIT_NUMERICAL, "json", e))?,
    }
    match &target {
        Some(p) => std::fs::write(p, &buf).map_err(|e| io_failure(EXIT_FAIL, &format!("cannot write {}", p.display()), e))?,
        None => std::io::stdout().write_all(&buf).map_err(|e| io_failure(EXIT_FAIL, "stdout", e))?,
    }

    let failed: Vec<RequestFailure> = results
        .iter()
        .enumerate()
        .filter_map(|(index, r)| {
            r.value.as_ref().err().map(|e| RequestFailure { index, error: report::kind(report::exit_code(e)), message: e.to_string() })
        })
        .collect();

    if let Some(p) = &target {
        if json {
            let summary = serde_json::json!({ "path": p, "rows": rows.len(), "failed": failed.len() });
            println!("{summary}");
        } else {
            println!("wrote {} rows to {} ({} failed)", rows.len(), p.display(), failed.len());
        }
    }

    if failed.is_empty() {
        return Ok(0);
    }
    let code = results
        .iter()
        .filter_map(|r| r.value.as_ref().err().map(report::exit_code))
        .max_by_key(|&c| match c {
            report::EXIT_CERTIFICATION => 2,
            report::EXIT_NUMERICAL => 1,
            _ => 0,
        })
        .unwrap_or(EXIT_FAIL);
    let mut f = Failure::new(code, format!("{} of {} requests failed", failed.len(), rows.len()));
    f.requests = failed;
    Err(f)
}

#[derive(Serialize)]
struct BenchRun {
    mode: String,
    max_abs_dev: f64,
    worst_a1: f64,
    worst_a2: f64,
    #[serde(rename = "M0")]
    m0: usize,
    q_points: usize,
    #[serde(rename = "N_plus")]
    n_plus: usize,
    #[serde(rename = "N_minus")]
    n_minus: usize,
    reported_m0: usize,
    millis_total: f64,
    millis_per_point: f64,
    pass: bool,
}

#[derive(Serialize)]
struct BenchReport {
    scenario: String,
    nu: f64,
    maturity_years: f64,
    n_steps: usize,
    points: usize,
    reported_n: usize,
    threshold: f64,
    runs: Vec<BenchRun>,
    pass: bool,
}

fn bench(id: &str, mode: BenchMode, strict: bool, workers: Option<usize>, json: bool) -> Result<i32, Failure> {
    let s = scenario(id)?;
    let model = s.model()?;
    let pts = s.points();
    let threshold = if strict { 1e-11 } else { 1e-8 };
    let modes: &[ModeChoice] = match mode {
        BenchMode::Sinh => &[ModeChoice::Sinh],
        BenchMode::Trapezoid => &[ModeChoice::Trapezoid],
        BenchMode::Both => &[ModeChoice::Sinh, ModeChoice::Trapezoid],
    };
    let mut runs = Vec::new();
    for &m in modes {
        let start = Instant::now();
        let reqs = pts.iter().map(|&(a1, a2, _)| CpdfRequest::new(a1, a2, 0.0, 0.0).map(Request::Cpdf)).collect::<Result<_, _>>()?;
        let method = MethodConfig { mode: m, ..MethodConfig::default() };
        let plan = RunPlan::build(&model, s.n_steps(), &method, reqs)?;
        let res = run(&model, &plan, workers);
        let millis = start.elapsed().as_secs_f64() * 1e3;
        let mut worst = (0.0, 0.0, 0.0);
        for (r, &(a1, a2, reference)) in res.iter().zip(&pts) {
            let v = r.value.clone()?;
            let dev = (v - reference).abs();
            if dev.is_nan() || dev > worst.0 {
                worst = (dev, a1, a2);
            }
        }
        let (n_plus, n_minus) = plan.grid_sizes();
        let mode_name = plan.z_plan.mode.to_string();
        let reported_m0 = if m == ModeChoice::Trapezoid { s.reported_trapezoid_m0 } else { s.reported_sinh_m0 };
        runs.push(BenchRun {
            mode: mode_name,
            max_abs_dev: worst.0,
            worst_a1: worst.1,
            worst_a2: worst.2,
            m0: plan.z_plan.m0(),
            q_points: plan.z_plan.nodes().len(),
            n_plus,
            n_minus,
            reported_m0,
            millis_total: millis,
            millis_per_point: millis / pts.len() as f64,
            pass: worst.0 <= threshold,
        });
    }
    let pass = runs.iter().all(|r| r.pass);
    let rep = BenchReport {
        scenario: s.id.to_string(),
        nu: s.nu,
        maturity_years: s.maturity,
        n_steps: s.n_steps(),
        points: pts.len(),
        reported_n: s.reported_n,
        threshold,
        runs,
        pass,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
    } else {
        println!(
            "scenario {} (nu {}, T {}, n {}), {} points, threshold {:e}",
            rep.scenario, rep.nu, rep.maturity_years, rep.n_steps, rep.points, rep.threshold
        );
        println!("{:<10} {:>10} {:>16} {:>6} {:>9} {:>6} {:>6} {:>10} {:>10}", "mode", "max|dev|", "at (a1, a2)", "M0", "reported", "N+", "N-", "ms total", "ms/point");
        for r in &rep.runs {
            println!(
                "{:<10} {:>10.2e} {:>16} {:>6} {:>9} {:>6} {:>6} {:>10.1} {:>10.2}",
                r.mode,
                r.max_abs_dev,
                format!("({}, {})", r.worst_a1, r.worst_a2),
                r.m0,
                r.reported_m0,
                r.n_plus,
                r.n_minus,
                r.millis_total,
                r.millis_per_point
            );
        }
        println!("{}", if pass { "PASS" } else { "FAIL" });
    }
    Ok(if pass { 0 } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct InvzReport {
    family: Family,
    n: usize,
    mode: InvMode,
    value: f64,
    truth: f64,
    abs_error: f64,
    #[serde(rename = "M0")]
    m0: usize,
}

type Transform = Box<dyn Fn(Complex64) -> Complex64>;

fn invz(family: Family, n: usize, mode: InvMode, tol: f64, json: bool) -> Result<i32, Failure> {
    let one = Complex64::new(1.0, 0.0);
    let (eval, truth, gamma, a_bound, growth): (Transform, f64, f64, f64, Growth) = match family {
        Family::Geometric => (Box::new(move |z| one / (one - z)), 1.0, 3.0 * PI / 4.0, 1.0, Growth::default()),
        Family::Binomial => (Box::new(move |z| one / ((one - z) * (one - z))), n as f64 + 1.0, 3.0 * PI / 4.0, 1.0, Growth { c: 2.0, a: 1.0 }),
        Family::Exponential => {
            let t = (1..=n).fold(1.0, |acc: f64, k| acc / k as f64);
            (Box::new(|z: Complex64| z.exp()), t, FRAC_PI_2, 2.0, Growth::default())
        }
    };
    let tv = TildeFunction { eval: |z| eval(z), growth };
    let (value, m0) = match mode {
        InvMode::Sinh => {
            let plan = build_plan(gamma, a_bound, n, tol, growth.c, growth.a)?;
            (invert_sinh(&tv, n, &plan)?, plan.m0())
        }
        InvMode::Trapezoid => {
            let plan = build_trapezoid_plan(n, tol, a_bound.min(1.0), growth, 1.0)?;
            (invert_trapezoid(&tv, n, &plan)?, plan.m0())
        }
    };
    let rep = InvzReport { family, n, mode, value, truth, abs_error: (value - truth).abs(), m0 };
    if json {
        println!("{}", serde_json::to_string(&rep).expect("report serializes"));
    } else {
        println!("V_{n} = {}", report::fmt17(value));
        println!("truth = {}", report::fmt17(truth));
        println!("|error| = {:.3e} (M0 {m0})", rep.abs_error);
    }
    Ok(0)
}
