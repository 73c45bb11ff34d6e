//! Numerical inverse Z-transform.
//!
//! `V_n = (1/2 pi i) * contour integral of z^{-n-1} tV(z) dz`, evaluated either on a
//! circle with the trapezoid rule or on a sinh-deformed contour with the
//! simplified trapezoid rule. Both are expressed as a list of nodes `q_k`
//! with weights `w_k`, so that `V_n ~ Re sum_k w_k q_k^{-n-1} tV(q_k)`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::contours::{choose_step_from_bound, Plane, SinhMap, TrapezoidGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Trapezoid,
    Sinh,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Trapezoid => write!(f, "trapezoid"),
            Mode::Sinh => write!(f, "sinh"),
        }
    }
}

/// Parameter case of the sinh plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanCase {
    /// Moderate cone, disc of analyticity clearly larger than the unit disc.
    OneWide,
    /// Moderate cone, disc radius close to 1.
    OneNarrow,
    /// Wide cone, disc clearly larger.
    TwoWide,
    /// Wide cone, disc radius close to 1.
    TwoNarrow,
}

/// Growth bound `|tV(z)| <= c |z|^a` used by the plan builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub c: f64,
    pub a: f64,
}

impl Default for Growth {
    fn default() -> Self {
        Growth { c: 1.0, a: 0.0 }
    }
}

/// A function to invert, together with its growth bound.
pub struct TildeFunction<F: Fn(Complex64) -> Complex64> {
    pub eval: F,
    pub growth: Growth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZInversionPlan {
    pub mode: Mode,
    pub n: usize,
    pub tol: f64,
    /// Circle radius (trapezoid).
    pub radius: f64,
    /// Total number of circle points `M = 2 M0 + 1` (trapezoid).
    pub m_total: usize,
    /// Z-plane sinh contour (sinh mode).
    pub contour: Option<SinhMap>,
    pub grid: Option<TrapezoidGrid>,
    pub case: Option<PlanCase>,
    pub gamma: f64,
    pub a_bound: f64,
    pub d_strip: f64,
    /// Contour scale: nodes are `scale * chi(y)`; 1 unless rescaled.
    pub scale: f64,
    /// Hardy norm estimate and strip-exit abscissa used for the step.
    pub hardy: f64,
    pub b_exit: f64,
    pub growth: Growth,
    /// Evaluate `j = -M0..M0` instead of the conjugate-symmetric half.
    pub full: bool,
}

/// One evaluation point of an inversion plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QNode {
    pub q: Complex64,
    pub weight: Complex64,
}

pub const SMALL_GAMMA_EXCESS: f64 = 0.1;
pub const B_SEARCH_MAX: f64 = 50.0;
pub const MIN_M0: usize = 4;

impl ZInversionPlan {
    pub fn m0(&self) -> usize {
        match self.mode {
            Mode::Trapezoid => (self.m_total - 1) / 2,
            Mode::Sinh => self.grid.map(|g| g.half_count).unwrap_or(0),
        }
    }

    /// Evaluation nodes. With the symmetric form the weights already carry
    /// the factor 2 and the halved first weight; callers take the real part.
    pub fn nodes(&self) -> Vec<QNode> {
        match self.mode {
            Mode::Trapezoid => {
                let m = self.m_total as f64;
                let m0 = self.m0() as i64;
                let range: Vec<i64> = if self.full { (-m0..=m0).collect() } else { (0..=m0).collect() };
                range
                    .into_iter()
                    .map(|k| {
                        let q = Complex64::from_polar(self.radius, 2.0 * PI * k as f64 / m);
                        let w = if self.full || k == 0 {
                            1.0 / m
                        } else {
                            2.0 / m
                        };
                        QNode { q, weight: q * w }
                    })
                    .collect()
            }
            Mode::Sinh => {
                let map = self.contour.expect("sinh plan carries a contour");
                let grid = self.grid.expect("sinh plan carries a grid");
                let m0 = grid.half_count as i64;
                let range: Vec<i64> = if self.full { (-m0..=m0).collect() } else { (0..=m0).collect() };
                range
                    .into_iter()
                    .map(|j| {
                        let y = Complex64::new(j as f64 * grid.step, 0.0);
                        let q = map.eval(y) * self.scale;
                        let dq = map.deriv(y) * self.scale;
                        // (1/2 pi i) dq, doubled for the symmetric half sum
                        let base = dq * grid.step / (2.0 * PI * Complex64::i());
                        let w = if self.full || j == 0 { 1.0 } else { 2.0 };
                        QNode { q, weight: base * w }
                    })
                    .collect()
            }
        }
    }

    /// Combine node values `tV(q_k)` into `(V_n, imaginary residue)`.
    ///
    /// In the full form the residue is the imaginary part of the sum. In the
    /// symmetric form it is the imaginary part of the real-axis node term,
    /// which vanishes for real `V_n`.
    pub fn combine(&self, nodes: &[QNode], values: &[Complex64]) -> (f64, f64) {
        let n = self.n as i32;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut first = 0.0;
        for (k, (node, v)) in nodes.iter().zip(values).enumerate() {
            let t = node.weight * node.q.powi(-n - 1) * v;
            if k == 0 {
                first = t.im;
            }
            acc += t;
        }
        if self.full {
            (acc.re, acc.im)
        } else {
            // the real-axis node carries weight 1 (not 2) in the half sum
            (acc.re, first.abs())
        }
    }
}

/// Invert with whatever mode the plan carries.
pub fn invert<F: Fn(Complex64) -> Complex64>(tv: &TildeFunction<F>, plan: &ZInversionPlan) -> (f64, f64) {
    let nodes = plan.nodes();
    let values: Vec<Complex64> = nodes.iter().map(|nd| (tv.eval)(nd.q)).collect();
    plan.combine(&nodes, &values)
}

pub fn invert_trapezoid<F: Fn(Complex64) -> Complex64>(tv: &TildeFunction<F>, n: usize, plan: &ZInversionPlan) -> Result<f64> {
    if plan.mode != Mode::Trapezoid {
        return Err(Error::InvalidRequest("plan is not a trapezoid plan".into()));
    }
    let plan = ZInversionPlan { n, ..plan.clone() };
    Ok(invert(tv, &plan).0)
}

pub fn invert_sinh<F: Fn(Complex64) -> Complex64>(tv: &TildeFunction<F>, n: usize, plan: &ZInversionPlan) -> Result<f64> {
    if plan.mode != Mode::Sinh {
        return Err(Error::InvalidRequest("plan is not a sinh plan".into()));
    }
    let plan = ZInversionPlan { n, ..plan.clone() };
    Ok(invert(tv, &plan).0)
}

/// Trapezoid plan on `|q| = R`, `R < A`. Aliasing decays like `(R/A)^M`,
/// rounding grows like `eps * R^{-n}`; `R` balances the two at `tol/2`.
pub fn build_trapezoid_plan(n: usize, tol: f64, a_bound: f64, growth: Growth, multiplier: f64) -> Result<ZInversionPlan> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidTolerance { tol, hardy: 1.0 });
    }
    let eps = f64::EPSILON;
    let radius = if n == 0 {
        0.5 * a_bound.min(1.0)
    } else {
        let r = (2.0 * growth.c * eps / tol).powf(1.0 / n as f64);
        r.min(a_bound * (1.0 - 1.0 / (2.0 * n as f64 + 20.0)))
    };
    let rho = radius / a_bound;
    let m_needed = ((tol / (2.0 * growth.c)).ln() / rho.ln()).ceil().max(3.0);
    let m0 = (((m_needed - 1.0) / 2.0) * multiplier).ceil().max(1.0) as usize;
    Ok(ZInversionPlan {
        mode: Mode::Trapezoid,
        n,
        tol,
        radius,
        m_total: 2 * m0 + 1,
        contour: None,
        grid: None,
        case: None,
        gamma: 0.0,
        a_bound,
        d_strip: 0.0,
        scale: 1.0,
        hardy: growth.c,
        b_exit: 0.0,
        growth,
        full: false,
    })
}

/// Sup of `y in [0, 50]` with `|map(i s + y)| < 1`, by a scan followed by
/// bisection to 1e-10.
fn exit_abscissa(map: &SinhMap, s: f64) -> f64 {
    let tilted = map.tilted(s);
    let inside = |y: f64| tilted.eval(Complex64::new(y, 0.0)).norm() < 1.0;
    let steps = 5000;
    let h = B_SEARCH_MAX / steps as f64;
    let mut last = None;
    for k in 0..=steps {
        if inside(k as f64 * h) {
            last = Some(k);
        }
    }
    match last {
        None => 0.0,
        Some(k) if k == steps => B_SEARCH_MAX,
        Some(k) => {
            let (mut lo, mut hi) = (k as f64 * h, (k + 1) as f64 * h);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if inside(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    }
}

/// Sinh plan for a transform analytic in the unit disc (or a disc of radius
/// `a_bound`) and outside the cone `|arg z| < pi - gamma`.
pub fn build_plan(gamma: f64, a_bound: f64, n: usize, tol: f64, c_tv: f64, a_tv: f64) -> Result<ZInversionPlan> {
    if !(gamma > FRAC_PI_4) || gamma >= PI {
        return Err(Error::GammaTooSmall { gamma });
    }
    if n == 0 {
        return Err(Error::InvalidOrder { n, a: a_tv });
    }
    let nf = n as f64;
    if a_bound < 1.0 - 10.0 / nf && a_bound < 1.0 {
        return rescale_case_iii(gamma, a_bound, n, tol, c_tv, a_tv);
    }
    let case_one = gamma <= FRAC_PI_2 + SMALL_GAMMA_EXCESS;
    let (omega, d) = if case_one {
        (3.0 * PI / 8.0 - gamma / 2.0, 0.95 * (gamma - FRAC_PI_4) / 2.0)
    } else {
        let w = (FRAC_PI_2 - gamma) / 2.0;
        (w, 0.95 * w.abs())
    };
    let wide = a_bound - 1.0 >= 10.0 / nf;
    // The curve with angle omega + d crosses the positive axis innermost,
    // the one with omega - d outermost.
    let (inner, outer) = if wide { (1.0, a_bound) } else { ((1.0 - 5.0 / nf).max(0.5), 1.0) };
    let b = (outer - inner) / ((omega + d).sin() - (omega - d).sin());
    let sigma = inner + b * (omega + d).sin();
    let map = SinhMap::new(Complex64::new(sigma, 0.0), b, omega, Plane::Z)?;
    let b_exit = exit_abscissa(&map, d).max(exit_abscissa(&map, -d));
    let hardy = if wide { c_tv * b_exit.max(1.0) } else { c_tv * inner.powf(-(nf + 1.0)) * b_exit.max(1.0) };
    let step = choose_step_from_bound(d, hardy, tol)?;
    let lambda = truncation_by_scan(&map, step, n, a_tv, c_tv, tol)?;
    let m0 = ((lambda / step).ceil() as usize).max(MIN_M0);
    let case = match (case_one, wide) {
        (true, true) => PlanCase::OneWide,
        (true, false) => PlanCase::OneNarrow,
        (false, true) => PlanCase::TwoWide,
        (false, false) => PlanCase::TwoNarrow,
    };
    Ok(ZInversionPlan {
        mode: Mode::Sinh,
        n,
        tol,
        radius: inner,
        m_total: 0,
        contour: Some(map),
        grid: Some(TrapezoidGrid::new(step, m0, true)?),
        case: Some(case),
        gamma,
        a_bound,
        d_strip: d,
        scale: 1.0,
        hardy,
        b_exit,
        growth: Growth { c: c_tv, a: a_tv },
        full: false,
    })
}

const MAX_TRUNCATION_STEPS: usize = 100_000;

/// Smallest `y = k step` past which the terms `c |q|^{a - n - 1} |q'| step / pi`
/// of the inversion sum stay below `tol / 10`.
pub fn truncation_by_scan(map: &SinhMap, step: f64, n: usize, a_tv: f64, c_tv: f64, tol: f64) -> Result<f64> {
    if !(n as f64 > a_tv) {
        return Err(Error::InvalidOrder { n, a: a_tv });
    }
    let target = (tol / 10.0).ln();
    let log_term = |y: f64| {
        let yc = Complex64::new(y, 0.0);
        c_tv.ln() + (a_tv - n as f64 - 1.0) * map.eval(yc).norm().ln() + map.deriv(yc).norm().ln() + (step / PI).ln()
    };
    for k in 1..=MAX_TRUNCATION_STEPS {
        let y = k as f64 * step;
        if log_term(y) < target && log_term(-y) < target {
            return Ok(y);
        }
    }
    Err(Error::InvalidTolerance { tol, hardy: c_tv })
}

/// Absolute error allowed on `V_n` when the transform lives on `|z| < A`.
///
/// On `z = A z'` the integrand carries the factor `A^{-n-1+a}`, so a plan
/// built for tolerance `tol` on the unit-disc problem is accurate to this
/// much in the original variable.
pub fn case_iii_tolerance(tol: f64, a_bound: f64, n: usize, a_tv: f64) -> f64 {
    tol * a_bound.powf(-(n as f64) - 1.0 + a_tv)
}

/// Plan for `a_bound < 1`: build on `z = A z'` where the disc of analyticity
/// is the unit disc, then scale the contour back. The plan's `tol` is the
/// absolute allowance of [`case_iii_tolerance`].
pub fn rescale_case_iii(gamma: f64, a_bound: f64, n: usize, tol: f64, c_tv: f64, a_tv: f64) -> Result<ZInversionPlan> {
    if !(a_bound > 0.0) {
        return Err(Error::InvalidRequest(format!("disc radius {a_bound} must be positive")));
    }
    if a_bound >= 1.0 {
        return build_plan(gamma, a_bound, n, tol, c_tv, a_tv);
    }
    let mut plan = build_plan(gamma, 1.0, n, tol, c_tv, a_tv)?;
    plan.scale = a_bound;
    plan.a_bound = a_bound;
    plan.tol = case_iii_tolerance(tol, a_bound, n, a_tv);
    Ok(plan)
}
