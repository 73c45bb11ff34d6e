//! Batch driver: q-grid, contour pair, factors once per `q`, every request, inversion.

use num_complex::Complex64;
use rayon::prelude::*;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::models::{AnalyticityInfo, StepModel};
use crate::valuation::{
    barrier_tilde, exchange_tilde, no_touch_tilde, BarrierRequest, CpdfBatch, CpdfRequest, DigitalBelow, ExchangeKernel,
    ExchangeRequest,
};
use crate::wiener_hopf::{certify_deformation, factors, CauchyKernels, ContourPair, ContourPairConfig, IdentityCheck, DEFAULT_CUT_MARGIN};
use crate::zinv::{build_plan, build_trapezoid_plan, Growth, Mode, ZInversionPlan};

pub const DEFAULT_GAMMA: f64 = 2.6;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_CONTOUR_TOL: f64 = 1e-17;
/// Orders below this always use the trapezoid rule.
pub const MIN_SINH_ORDER: usize = 10;
pub const THREADS_ENV: &str = "WALKMAX_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    Auto,
    Sinh,
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub mode: ModeChoice,
    pub tol: f64,
    pub contour_tol: f64,
    pub gamma: f64,
    pub m0: Option<usize>,
    pub n_plus: Option<usize>,
    pub n_minus: Option<usize>,
    pub trapezoid_multiplier: f64,
    pub certify: bool,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            mode: ModeChoice::Auto,
            tol: DEFAULT_TOL,
            contour_tol: DEFAULT_CONTOUR_TOL,
            gamma: DEFAULT_GAMMA,
            m0: None,
            n_plus: None,
            n_minus: None,
            trapezoid_multiplier: 1.0,
            certify: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Request {
    Cpdf(CpdfRequest),
    NoTouch { a2: f64, x1: f64 },
    /// Up-and-out digital `1_{x + X_n <= a1}`, barrier `h`.
    BarrierDigital { h: f64, a1: f64, x: f64 },
    Exchange(ExchangeRequest),
}

impl Request {
    /// `V_0`, the value with no steps taken.
    pub fn value_at_zero(&self) -> f64 {
        match *self {
            Request::Cpdf(r) => {
                if r.x1 <= r.a1 && r.x2 <= r.a2 {
                    1.0
                } else {
                    0.0
                }
            }
            Request::NoTouch { a2, x1 } => {
                if x1 <= a2 {
                    1.0
                } else {
                    0.0
                }
            }
            Request::BarrierDigital { h, a1, x } => {
                if x < h && x <= a1 {
                    1.0
                } else {
                    0.0
                }
            }
            Request::Exchange(r) => r.intrinsic(),
        }
    }

    pub fn payoff_name(&self) -> &'static str {
        match self {
            Request::Cpdf(_) => "cpdf",
            Request::NoTouch { .. } => "no_touch",
            Request::BarrierDigital { .. } => "barrier_digital",
            Request::Exchange(_) => "exchange",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Request::Cpdf(r) => r.validate(),
            Request::Exchange(r) => r.validate(),
            Request::NoTouch { a2, x1 } => {
                if x1 <= a2 {
                    Ok(())
                } else {
                    Err(Error::InvalidRequest(format!("no-touch needs x1 <= a2, got {x1} > {a2}")))
                }
            }
            Request::BarrierDigital { h, x, .. } => {
                if x < h {
                    Ok(())
                } else {
                    Err(Error::InvalidRequest(format!("barrier needs x < h, got {x} >= {h}")))
                }
            }
        }
    }
}

/// `n = T / dt`, required to be integral within 1e-9.
pub fn steps_for(maturity: f64, dt: f64) -> Result<usize> {
    let r = maturity / dt;
    let n = r.round();
    if !(maturity >= 0.0) || (r - n).abs() > 1e-9 {
        return Err(Error::NonIntegralSteps { maturity, dt });
    }
    Ok(n as usize)
}

/// Sinh unless the cone is one-sided, too narrow, or `n` is tiny.
pub fn select_mode(info: &AnalyticityInfo, n: usize, gamma: f64) -> Mode {
    if info.one_sided() || gamma <= std::f64::consts::FRAC_PI_4 || n < MIN_SINH_ORDER {
        Mode::Trapezoid
    } else {
        Mode::Sinh
    }
}

pub fn z_plan_for(info: &AnalyticityInfo, n: usize, method: &MethodConfig) -> Result<ZInversionPlan> {
    let mode = match method.mode {
        ModeChoice::Auto => select_mode(info, n, method.gamma),
        ModeChoice::Sinh => Mode::Sinh,
        ModeChoice::Trapezoid => Mode::Trapezoid,
    };
    let mut plan = match mode {
        Mode::Sinh => build_plan(method.gamma, 1.0, n, method.tol, 1.0, 0.0)?,
        Mode::Trapezoid => build_trapezoid_plan(n, method.tol, 1.0, Growth::default(), method.trapezoid_multiplier)?,
    };
    if let Some(m0) = method.m0 {
        match plan.mode {
            Mode::Sinh => {
                if let Some(g) = plan.grid.as_mut() {
                    g.half_count = m0.max(1);
                }
            }
            Mode::Trapezoid => plan.m_total = 2 * m0.max(1) + 1,
        }
    }
    Ok(plan)
}

/// Contours, kernels and (for the exchange) the fixed double-integral kernel.
#[derive(Debug, Clone)]
pub struct Family {
    pub pair: ContourPair,
    pub kernels: CauchyKernels,
    pub exchange: Option<ExchangeKernel>,
}

impl Family {
    fn build(model: &dyn StepModel, cfg: ContourPairConfig, beta: Option<f64>) -> Result<Self> {
        let pair = ContourPair::build(model, cfg)?;
        let kernels = CauchyKernels::new(&pair)?;
        let exchange = beta.map(|b| ExchangeKernel::new(b, &pair));
        Ok(Family { pair, kernels, exchange })
    }
}

#[derive(Debug, Clone)]
pub struct RunPlan {
    pub n_steps: usize,
    pub z_plan: ZInversionPlan,
    pub tol: f64,
    pub requests: Vec<Request>,
    /// Shared by cpdf, no-touch and barrier requests.
    pub main: Option<Family>,
    /// One family per distinct `beta`.
    pub exchange: Vec<(f64, Family)>,
    /// Valid cpdf requests (their indices and the precomputed batch) on the main family.
    pub cpdf: Option<(Vec<usize>, CpdfBatch)>,
}

fn apply_overrides(mut cfg: ContourPairConfig, method: &MethodConfig) -> ContourPairConfig {
    if let Some(n) = method.n_plus {
        cfg.step_plus = cfg.step_plus * cfg.half_plus as f64 / n.max(1) as f64;
        cfg.half_plus = n.max(1);
    }
    if let Some(n) = method.n_minus {
        cfg.step_minus = cfg.step_minus * cfg.half_minus as f64 / n.max(1) as f64;
        cfg.half_minus = n.max(1);
    }
    cfg
}

impl RunPlan {
    pub fn build(model: &dyn StepModel, n_steps: usize, method: &MethodConfig, requests: Vec<Request>) -> Result<Self> {
        if !(method.tol >= 1e-14 && method.tol <= 1e-2) {
            return Err(Error::InvalidTolerance { tol: method.tol, hardy: 1.0 });
        }
        let info = model.analyticity();
        let z_plan = if n_steps == 0 {
            build_trapezoid_plan(0, method.tol, 1.0, Growth::default(), 1.0)?
        } else {
            z_plan_for(&info, n_steps, method)?
        };
        let needs_main = requests.iter().any(|r| !matches!(r, Request::Exchange(_)));
        let main = if needs_main && n_steps > 0 {
            let cfg = apply_overrides(ContourPairConfig::cpdf(model, method.contour_tol)?, method);
            Some(Family::build(model, cfg, None)?)
        } else {
            None
        };
        let mut exchange: Vec<(f64, Family)> = Vec::new();
        for r in &requests {
            if let Request::Exchange(e) = r {
                if n_steps > 0 && !exchange.iter().any(|(b, _)| *b == e.beta) {
                    let cfg = apply_overrides(ContourPairConfig::exchange(model, e.beta, method.contour_tol)?, method);
                    exchange.push((e.beta, Family::build(model, cfg, Some(e.beta))?));
                }
            }
        }
        let cpdf = match &main {
            Some(fam) => {
                let (idx, reqs): (Vec<usize>, Vec<CpdfRequest>) = requests
                    .iter()
                    .enumerate()
                    .filter_map(|(i, r)| match r {
                        Request::Cpdf(c) if c.validate().is_ok() => Some((i, *c)),
                        _ => None,
                    })
                    .unzip();
                Some((idx, CpdfBatch::new(&reqs, &fam.pair)?))
            }
            None => None,
        };
        Ok(RunPlan { n_steps, z_plan, tol: method.tol, requests, main, exchange, cpdf })
    }

    pub fn grid_sizes(&self) -> (usize, usize) {
        match (&self.main, self.exchange.first()) {
            (Some(f), _) | (None, Some((_, f))) => (f.pair.plus.len(), f.pair.minus.len()),
            _ => (0, 0),
        }
    }

    pub fn families(&self) -> Vec<&Family> {
        self.main.iter().chain(self.exchange.iter().map(|(_, f)| f)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub imag_residual: f64,
    pub mode: Mode,
    pub m0: usize,
    pub q_points: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    /// Wall time of the whole batch divided by the number of requests.
    pub millis: f64,
    /// Smallest distance of `1 - q Phi` and its reciprocal to the cut.
    pub cert_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestResult {
    pub request: Request,
    pub value: std::result::Result<f64, Error>,
    pub diagnostics: Diagnostics,
}

/// Number of worker threads: `workers`, else `WALKMAX_THREADS`, else rayon's default.
pub fn worker_count(workers: Option<usize>) -> Option<usize> {
    workers.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok())).filter(|&n| n > 0)
}

fn eval_q(q: Complex64, plan: &RunPlan) -> Vec<std::result::Result<Complex64, Error>> {
    let mut out: Vec<std::result::Result<Complex64, Error>> = vec![Err(Error::Numerical("not evaluated".into())); plan.requests.len()];
    if let Some(fam) = &plan.main {
        match factors(q, &fam.pair, &fam.kernels) {
            Err(e) => {
                for (i, r) in plan.requests.iter().enumerate() {
                    if !matches!(r, Request::Exchange(_)) {
                        out[i] = Err(e.clone());
                    }
                }
            }
            Ok(whf) => {
                if let Some((idx, batch)) = &plan.cpdf {
                    for (&i, v) in idx.iter().zip(batch.eval(q, &whf, &fam.pair, &fam.kernels)) {
                        out[i] = Ok(v);
                    }
                }
                for (i, r) in plan.requests.iter().enumerate() {
                    match *r {
                        Request::NoTouch { a2, x1 } => out[i] = no_touch_tilde(q, a2, x1, &whf, &fam.pair),
                        Request::BarrierDigital { h, a1, x } => {
                            let g = DigitalBelow { a1 };
                            let req = BarrierRequest { h, x, payoff: &g };
                            out[i] = barrier_tilde(q, &req, &whf, &fam.pair, &fam.kernels);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    for (beta, fam) in &plan.exchange {
        let whf = factors(q, &fam.pair, &fam.kernels);
        for (i, r) in plan.requests.iter().enumerate() {
            if let Request::Exchange(e) = r {
                if e.beta == *beta {
                    out[i] = match &whf {
                        Ok(w) => exchange_tilde(q, e, w, &fam.pair, fam.exchange.as_ref().expect("exchange kernel")),
                        Err(err) => Err(err.clone()),
                    };
                }
            }
        }
    }
    out
}

/// Evaluate every request. Failures are reported per request.
pub fn run(model: &dyn StepModel, plan: &RunPlan, workers: Option<usize>) -> Vec<RequestResult> {
    let start = Instant::now();
    let nodes = plan.z_plan.nodes();
    let (n_plus, n_minus) = plan.grid_sizes();
    let mut diag = Diagnostics {
        imag_residual: 0.0,
        mode: plan.z_plan.mode,
        m0: plan.z_plan.m0(),
        q_points: nodes.len(),
        n_plus,
        n_minus,
        millis: 0.0,
        cert_margin: None,
    };
    if plan.n_steps == 0 {
        diag.q_points = 0;
        return plan
            .requests
            .iter()
            .map(|r| RequestResult {
                request: *r,
                value: r.validate().map(|_| r.value_at_zero()),
                diagnostics: diag.clone(),
            })
            .collect();
    }
    let qs: Vec<Complex64> = nodes.iter().map(|n| n.q).collect();
    let mut cert_error = None;
    if plan.z_plan.mode == Mode::Sinh {
        let mut margin = f64::INFINITY;
        for fam in plan.families() {
            match certify_deformation(&qs, &fam.pair, model, DEFAULT_CUT_MARGIN) {
                Ok(rep) => margin = margin.min(rep.min_distance),
                Err(e) => cert_error = Some(e),
            }
        }
        diag.cert_margin = Some(margin);
    }
    let values: Vec<Vec<std::result::Result<Complex64, Error>>> = if cert_error.is_some() {
        Vec::new()
    } else {
        let work = || qs.par_iter().map(|&q| eval_q(q, plan)).collect();
        match worker_count(workers).and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
            Some(pool) => pool.install(work),
            None => work(),
        }
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3 / plan.requests.len().max(1) as f64;
    diag.millis = elapsed;
    plan.requests
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut d = diag.clone();
            let value = if let Some(e) = &cert_error {
                Err(e.clone())
            } else if let Err(e) = r.validate() {
                Err(e)
            } else {
                let mut col = Vec::with_capacity(qs.len());
                let mut failure = None;
                for row in &values {
                    match &row[i] {
                        Ok(v) => col.push(*v),
                        Err(e) => {
                            failure = Some(e.clone());
                            break;
                        }
                    }
                }
                match failure {
                    Some(e) => Err(e),
                    None => {
                        let (v, im) = plan.z_plan.combine(&nodes, &col);
                        d.imag_residual = im;
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(Error::Numerical("inverted value is not finite".into()))
                        }
                    }
                }
            };
            RequestResult { request: *r, value, diagnostics: d }
        })
        .collect()
}

/// Factorization identity residual at every `q` node, for each family.
pub fn identity_residuals(model: &dyn StepModel, plan: &RunPlan) -> Result<Vec<f64>> {
    let qs: Vec<Complex64> = plan.z_plan.nodes().iter().map(|n| n.q).collect();
    let mut out = Vec::new();
    for fam in plan.families() {
        let check = IdentityCheck::new(model, &fam.pair)?;
        for &q in &qs {
            let whf = factors(q, &fam.pair, &fam.kernels)?;
            out.push(check.residual(&fam.pair, &whf)?);
        }
    }
    Ok(out)
}
