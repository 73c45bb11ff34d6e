//! Wiener-Hopf factors of `(1 - q) / (1 - q Phi)` on two sinh contours.
//!
//! `L+` lies above 0 with wings going up, `L-` below 0 with wings going down.
//! With `ell(eta) = ln(1 - q Phi(eta))`:
//!
//! ```text
//! phi+(xi) = exp( (1/2 pi i) int_{L-} xi ell(eta) / (eta (xi - eta)) d eta ),  xi above L-
//! phi-(xi) = exp(-(1/2 pi i) int_{L+} xi ell(eta) / (eta (xi - eta)) d eta ),  xi below L+
//! c-       = exp(-(1/2 pi i) int_{L+} ell(eta) / eta d eta)
//! c+       = exp( (1/2 pi i) int_{L-} ell(eta) / eta d eta)
//! ```
//!
//! and `phi+ phi- (1 - q Phi) = 1 - q`, `c+ c- = 1 - q`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::contours::{ContourSamples, SinhMap};
use crate::error::{Error, Result};
use crate::models::{clog1p, StepModel};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Geometry of the contour pair before sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPairConfig {
    pub apex_plus: f64,
    pub apex_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub step_plus: f64,
    pub step_minus: f64,
    pub half_plus: usize,
    pub half_minus: usize,
    /// Valuation integrals use only `|y| <= window`; factors use the full grid.
    pub window_plus: Option<f64>,
    pub window_minus: Option<f64>,
}

pub const DEFAULT_APEX_PLUS: f64 = 0.3;
pub const DEFAULT_APEX_MINUS: f64 = -0.5;
pub const DEFAULT_B: f64 = 0.5;
pub const KERNEL_MARGIN: f64 = 15.0;
pub const WINDOW_CAP: f64 = 60.0;

/// Largest `d` such that tilting a Fourier-plane sinh map by `s in [-d, d]`
/// keeps the angle inside `(lo, hi)` and the apex inside `(apex_lo, apex_hi)`.
fn strip_half_width(map: &SinhMap, lo: f64, hi: f64, apex_lo: f64, apex_hi: f64) -> f64 {
    let ok = |s: f64| {
        let t = map.tilted(s);
        let w = t.omega;
        w > lo && w < hi && t.apex() > apex_lo && t.apex() < apex_hi
    };
    let mut d = 0.0;
    let h = 1e-3;
    while d < 1.5 && ok(d + h) && ok(-d - h) {
        d += h;
    }
    d
}

/// Step for a sinh grid: `2 pi d / ln(H / tol)` with `H` from samples of
/// `|ell(eta) der / eta|` on the strip edges (`q` at the edge of the disc).
fn sampled_step(model: &dyn StepModel, map: &SinhMap, d: f64, y_max: f64, tol: f64) -> f64 {
    let mut h: f64 = 1.0;
    for s in [-d, d] {
        let t = map.tilted(s);
        for k in 0..64 {
            let y = -y_max + 2.0 * y_max * k as f64 / 63.0;
            let eta = t.eval(Complex64::new(y, 0.0));
            let der = t.deriv(Complex64::new(y, 0.0));
            if let Ok(phi) = model.phi(eta) {
                let w = ONE - phi;
                if w.norm() > 0.0 && eta.norm() > 0.0 {
                    h = h.max((w.ln() * der / eta).norm());
                }
            }
        }
    }
    2.0 * PI * d / (h / tol).ln()
}

/// `|y|` beyond which `|Phi| < 1e-16` on the wings of `map`, capped.
fn phi_window(model: &dyn StepModel, map: &SinhMap) -> f64 {
    let mut y = 0.0;
    while y < WINDOW_CAP {
        let small = [y, -y].iter().all(|&t| {
            model.phi(map.eval(Complex64::new(t, 0.0))).map(|p| p.norm() < 1e-16).unwrap_or(false)
        });
        if small {
            return y;
        }
        y += 0.25;
    }
    WINDOW_CAP
}

impl ContourPairConfig {
    /// Contours for the cpdf, no-touch and barrier payoffs.
    ///
    /// Angles are `omega+ = gamma+ - (gamma+ - gamma-)/3`, `omega- = gamma- + (gamma+ - gamma-)/3`.
    /// Steps come from the strip width available to each contour; both grids
    /// extend to `|y| = ln(4 / (b tol))`, past which the `1/eta` decay of the
    /// kernels puts the tail below `tol`, and at least until `|Phi| < 1e-16`.
    pub fn cpdf(model: &dyn StepModel, tol: f64) -> Result<Self> {
        Self::build(model, DEFAULT_APEX_PLUS, DEFAULT_APEX_MINUS, tol, None)
    }

    /// Contours for the exchange payoff: `L-` sits between `lambda-` and `-beta`.
    pub fn exchange(model: &dyn StepModel, beta: f64, tol: f64) -> Result<Self> {
        let info = model.analyticity();
        if !(beta > 1.0) {
            return Err(Error::InvalidRequest(format!("exchange needs beta > 1, got {beta}")));
        }
        if info.mu_minus >= -beta {
            return Err(Error::StripViolation(format!(
                "strip lower edge {} must lie below -beta = {}",
                info.mu_minus, -beta
            )));
        }
        let apex_minus = 0.5 * (info.mu_minus - beta);
        Self::build(model, DEFAULT_APEX_PLUS, apex_minus, tol, Some(-beta))
    }

    fn build(model: &dyn StepModel, apex_plus: f64, apex_minus: f64, tol: f64, pole_minus: Option<f64>) -> Result<Self> {
        let info = model.analyticity();
        if !(info.mu_minus < apex_minus && apex_minus < 0.0 && 0.0 < apex_plus && apex_plus < info.mu_plus) {
            return Err(Error::StripViolation(format!(
                "apexes ({apex_minus}, {apex_plus}) must lie in ({}, 0) and (0, {})",
                info.mu_minus, info.mu_plus
            )));
        }
        let span = info.gamma_plus - info.gamma_minus;
        let omega_plus = info.gamma_plus - span / 3.0;
        let omega_minus = info.gamma_minus + span / 3.0;
        let b = DEFAULT_B;
        let plus = SinhMap::fourier_through(apex_plus, b, omega_plus)?;
        let minus = SinhMap::fourier_through(apex_minus, b, omega_minus)?;
        let d_plus = 0.8 * strip_half_width(&plus, info.gamma_minus.max(-PI / 2.0), info.gamma_plus, 0.0, info.mu_plus);
        let upper_minus = pole_minus.unwrap_or(0.0);
        let d_minus = 0.8 * strip_half_width(&minus, info.gamma_minus, info.gamma_plus.min(PI / 2.0), info.mu_minus, upper_minus);
        if !(d_plus > 0.0 && d_minus > 0.0) {
            return Err(Error::StripViolation("no room to tilt the factor contours".into()));
        }
        let y_max = (4.0 / (b * tol)).ln();
        let step_plus = sampled_step(model, &plus, d_plus, y_max, tol);
        let step_minus = sampled_step(model, &minus, d_minus, y_max, tol);
        let (window_plus, window_minus, y_plus, y_minus) = if pole_minus.is_some() {
            let wp = phi_window(model, &plus);
            let wm = phi_window(model, &minus);
            (Some(wp), Some(wm), y_max.max(wp + KERNEL_MARGIN), y_max.max(wm + KERNEL_MARGIN))
        } else {
            (None, None, y_max.max(phi_window(model, &plus)), y_max.max(phi_window(model, &minus)))
        };
        Ok(ContourPairConfig {
            apex_plus,
            apex_minus,
            b_plus: b,
            b_minus: b,
            omega_plus,
            omega_minus,
            step_plus,
            step_minus,
            half_plus: (y_plus / step_plus).ceil() as usize,
            half_minus: (y_minus / step_minus).ceil() as usize,
            window_plus,
            window_minus,
        })
    }

    /// Same geometry with both grids refined by `factor` (steps divided, counts multiplied).
    pub fn refined(&self, factor: usize) -> Self {
        let f = factor as f64;
        ContourPairConfig {
            step_plus: self.step_plus / f,
            step_minus: self.step_minus / f,
            half_plus: self.half_plus * factor,
            half_minus: self.half_minus * factor,
            ..*self
        }
    }
}

/// Sampled contours with `Phi` and `1 - Phi` stored at every node.
#[derive(Debug, Clone)]
pub struct ContourPair {
    pub config: ContourPairConfig,
    pub plus: ContourSamples,
    pub minus: ContourSamples,
    pub phi_plus_vals: Vec<Complex64>,
    pub phi_minus_vals: Vec<Complex64>,
    pub omp_plus: Vec<Complex64>,
    pub omp_minus: Vec<Complex64>,
    /// Index ranges used by the valuation integrals.
    pub window_plus: std::ops::Range<usize>,
    pub window_minus: std::ops::Range<usize>,
}

fn window_range(samples: &ContourSamples, window: Option<f64>) -> std::ops::Range<usize> {
    match window {
        None => 0..samples.len(),
        Some(w) => {
            let k = ((w / samples.step).floor() as usize).min(samples.half);
            (samples.half - k)..(samples.half + k + 1)
        }
    }
}

fn sample_model(model: &dyn StepModel, s: &ContourSamples) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut phi = Vec::with_capacity(s.len());
    let mut omp = Vec::with_capacity(s.len());
    for &x in &s.xi {
        let o = model.one_minus_phi(x)?;
        omp.push(o);
        phi.push(ONE - o);
    }
    Ok((phi, omp))
}

impl ContourPair {
    pub fn build(model: &dyn StepModel, config: ContourPairConfig) -> Result<Self> {
        let pm = SinhMap::fourier_through(config.apex_plus, config.b_plus, config.omega_plus)?;
        let mm = SinhMap::fourier_through(config.apex_minus, config.b_minus, config.omega_minus)?;
        let plus = ContourSamples::new(pm, config.step_plus, config.half_plus);
        let minus = ContourSamples::new(mm, config.step_minus, config.half_minus);
        let (phi_plus_vals, omp_plus) = sample_model(model, &plus)?;
        let (phi_minus_vals, omp_minus) = sample_model(model, &minus)?;
        let window_plus = window_range(&plus, config.window_plus);
        let window_minus = window_range(&minus, config.window_minus);
        Ok(ContourPair { config, plus, minus, phi_plus_vals, phi_minus_vals, omp_plus, omp_minus, window_plus, window_minus })
    }
}

/// Height of a Fourier-plane sinh curve above the real abscissa `re`.
fn curve_height(map: &SinhMap, re: f64) -> f64 {
    let y = (re / (map.b * map.omega.cos())).asinh();
    map.shift.im + map.b * y.cosh() * map.omega.sin()
}

/// `D+[j, k] = 1 / (xi+_j - xi-_k)`, row-major with real and imaginary
/// parts stored apart; `D- = -transpose(D+)`.
#[derive(Debug, Clone)]
pub struct CauchyKernels {
    pub n_plus: usize,
    pub n_minus: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

const LANES: usize = 4;

impl CauchyKernels {
    pub fn new(pair: &ContourPair) -> Result<Self> {
        Self::between(&pair.plus.xi, &pair.minus.xi)
    }

    pub fn between(upper: &[Complex64], lower: &[Complex64]) -> Result<Self> {
        let mut re = Vec::with_capacity(upper.len() * lower.len());
        let mut im = Vec::with_capacity(upper.len() * lower.len());
        for &a in upper {
            for &b in lower {
                let diff = a - b;
                if diff.norm() == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                let v = ONE / diff;
                re.push(v.re);
                im.push(v.im);
            }
        }
        Ok(CauchyKernels { n_plus: upper.len(), n_minus: lower.len(), re, im })
    }

    pub fn d_plus_at(&self, j: usize, k: usize) -> Complex64 {
        let i = j * self.n_minus + k;
        Complex64::new(self.re[i], self.im[i])
    }

    pub fn d_minus_at(&self, k: usize, j: usize) -> Complex64 {
        -self.d_plus_at(j, k)
    }

    /// `D+ v` (length `n_plus`).
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.apply_many(std::slice::from_ref(&v.to_vec())).pop().expect("one vector")
    }

    /// `D+ v` for several vectors in one sweep over the matrix. Each dot
    /// product is reduced in four interleaved lanes combined in a fixed order.
    pub fn apply_many(&self, vs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let n = self.n_minus;
        let split: Vec<(Vec<f64>, Vec<f64>)> = vs
            .iter()
            .map(|v| (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect()))
            .collect();
        let mut out = vec![Vec::with_capacity(self.n_plus); vs.len()];
        for j in 0..self.n_plus {
            let rr = &self.re[j * n..(j + 1) * n];
            let ri = &self.im[j * n..(j + 1) * n];
            for ((vr, vi), o) in split.iter().zip(out.iter_mut()) {
                o.push(row_dot(rr, ri, vr, vi));
            }
        }
        out
    }

    /// `D+^T v` (length `n_minus`).
    pub fn apply_transpose(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.apply_both(&vec![Complex64::new(0.0, 0.0); self.n_minus], v).1
    }

    /// `(D+ u, D+^T v)` in one sweep.
    pub fn apply_both(&self, u: &[Complex64], v: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.n_minus;
        let ur: Vec<f64> = u.iter().map(|z| z.re).collect();
        let ui: Vec<f64> = u.iter().map(|z| z.im).collect();
        let mut or = vec![0.0f64; n];
        let mut oi = vec![0.0f64; n];
        let mut first = Vec::with_capacity(self.n_plus);
        for (j, vj) in v.iter().enumerate() {
            let rr = &self.re[j * n..(j + 1) * n];
            let ri = &self.im[j * n..(j + 1) * n];
            first.push(row_dot(rr, ri, &ur, &ui));
            for (((o_r, o_i), a), b) in or.iter_mut().zip(oi.iter_mut()).zip(rr).zip(ri) {
                *o_r += a * vj.re - b * vj.im;
                *o_i += a * vj.im + b * vj.re;
            }
        }
        (first, or.into_iter().zip(oi).map(|(a, b)| Complex64::new(a, b)).collect())
    }
}

fn row_dot(rr: &[f64], ri: &[f64], vr: &[f64], vi: &[f64]) -> Complex64 {
    Complex64::new(lane_dot(rr, vr) - lane_dot(ri, vi), lane_dot(rr, vi) + lane_dot(ri, vr))
}

/// Real dot product in `LANES` interleaved partial sums.
fn lane_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = [0.0f64; LANES];
    for (x, y) in a.chunks_exact(LANES).zip(b.chunks_exact(LANES)) {
        for l in 0..LANES {
            s[l] += x[l] * y[l];
        }
    }
    let body = a.len() - a.len() % LANES;
    let tail: f64 = a[body..].iter().zip(&b[body..]).map(|(x, y)| x * y).sum();
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

/// `ln(1 - q Phi)` from `Phi` and `1 - Phi`.
pub fn log_one_minus_q_phi(q: Complex64, phi: Complex64, omp: Complex64) -> Complex64 {
    let qp = q * phi;
    if qp.norm() < 0.5 {
        clog1p(-qp)
    } else {
        ((ONE - q) + q * omp).ln()
    }
}

#[derive(Debug, Clone)]
pub struct WhfFactors {
    pub q: Complex64,
    pub phi_plus_on_plus: Vec<Complex64>,
    pub phi_minus_on_minus: Vec<Complex64>,
    pub phi_plus_on_minus: Vec<Complex64>,
    pub phi_minus_on_plus: Vec<Complex64>,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

fn logs(q: Complex64, phi: &[Complex64], omp: &[Complex64]) -> Vec<Complex64> {
    phi.iter().zip(omp).map(|(&p, &o)| log_one_minus_q_phi(q, p, o)).collect()
}

/// `ell_k der_k / eta_k`, the quadrature weights shared by factors and constants.
fn weights(samples: &ContourSamples, ell: &[Complex64]) -> Vec<Complex64> {
    ell.iter().zip(&samples.der).zip(&samples.xi).map(|((l, d), x)| l * d / x).collect()
}

fn exp_checked(q: Complex64, e: Complex64) -> Result<Complex64> {
    let v = e.exp();
    if !(v.re.is_finite() && v.im.is_finite()) || !(e.re.is_finite() && e.im.is_finite()) {
        return Err(Error::NonFiniteExponent { q });
    }
    Ok(v)
}

/// Factors on both grids and the two constants, for one `q`.
pub fn factors(q: Complex64, pair: &ContourPair, kernels: &CauchyKernels) -> Result<WhfFactors> {
    let ell_p = logs(q, &pair.phi_plus_vals, &pair.omp_plus);
    let ell_m = logs(q, &pair.phi_minus_vals, &pair.omp_minus);
    let wp = weights(&pair.plus, &ell_p);
    let wm = weights(&pair.minus, &ell_m);
    let (sp, sm) = kernels.apply_both(&wm, &wp);
    let zp = pair.plus.step / (2.0 * PI);
    let zm = pair.minus.step / (2.0 * PI);
    let mut phi_plus_on_plus = Vec::with_capacity(sp.len());
    for (x, s) in pair.plus.xi.iter().zip(&sp) {
        phi_plus_on_plus.push(exp_checked(q, -I * zm * x * s)?);
    }
    let mut phi_minus_on_minus = Vec::with_capacity(sm.len());
    for (x, s) in pair.minus.xi.iter().zip(&sm) {
        // 1/(xi- - xi+) = -D+
        phi_minus_on_minus.push(exp_checked(q, -I * zp * x * s)?);
    }
    let phi_plus_on_minus = factor_via_identity(q, &phi_minus_on_minus, &pair.phi_minus_vals)?;
    let phi_minus_on_plus = factor_via_identity(q, &phi_plus_on_plus, &pair.phi_plus_vals)?;
    let sum_p: Complex64 = wp.iter().sum();
    let sum_m: Complex64 = wm.iter().sum();
    let c_minus = exp_checked(q, I * zp * sum_p)?;
    let c_plus = exp_checked(q, -I * zm * sum_m)?;
    Ok(WhfFactors { q, phi_plus_on_plus, phi_minus_on_minus, phi_plus_on_minus, phi_minus_on_plus, c_plus, c_minus })
}

/// `(1/2 pi) int xi w(eta) / (xi - eta) d eta` at each point, `w` already
/// multiplied by `der`; the step is folded in.
fn cauchy_sums(points: &[Complex64], samples: &ContourSamples, w: &[Complex64]) -> Vec<Complex64> {
    let z = samples.step / (2.0 * PI);
    points
        .iter()
        .map(|&x| {
            let s = samples.xi.iter().zip(w).fold(Complex64::new(0.0, 0.0), |acc, (&e, &wk)| acc + wk / (x - e));
            x * s * z
        })
        .collect()
}

/// `phi+` at arbitrary points strictly above `L-`, by direct quadrature over `samples` (a copy of `L-`).
pub fn factor_plus(q: Complex64, xi: &[Complex64], model: &dyn StepModel, samples: &ContourSamples) -> Result<Vec<Complex64>> {
    for &x in xi {
        if x.im <= curve_height(&samples.map, x.re) {
            return Err(Error::DeformationInvalid { q, eta: x, distance: 0.0 });
        }
    }
    let (phi, omp) = sample_model(model, samples)?;
    let w = weights(samples, &logs(q, &phi, &omp));
    cauchy_sums(xi, samples, &w).into_iter().map(|s| exp_checked(q, -I * s)).collect()
}

/// `phi-` at arbitrary points strictly below `L+`.
pub fn factor_minus(q: Complex64, xi: &[Complex64], model: &dyn StepModel, samples: &ContourSamples) -> Result<Vec<Complex64>> {
    for &x in xi {
        if x.im >= curve_height(&samples.map, x.re) {
            return Err(Error::DeformationInvalid { q, eta: x, distance: 0.0 });
        }
    }
    let (phi, omp) = sample_model(model, samples)?;
    let w = weights(samples, &logs(q, &phi, &omp));
    cauchy_sums(xi, samples, &w).into_iter().map(|s| exp_checked(q, I * s)).collect()
}

/// `(1 - q) / ((1 - q Phi) phi_known)` pointwise.
pub fn factor_via_identity(q: Complex64, phi_known: &[Complex64], phi_vals: &[Complex64]) -> Result<Vec<Complex64>> {
    phi_known
        .iter()
        .zip(phi_vals)
        .map(|(&f, &p)| {
            let den = (ONE - q * p) * f;
            if den.norm() == 0.0 || !den.re.is_finite() {
                Err(Error::DivisionByZero)
            } else {
                Ok((ONE - q) / den)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// `c+` (integral over `L-`) or `c-` (over `L+`).
pub fn constant_cpm(q: Complex64, pair: &ContourPair, sign: Side) -> Result<Complex64> {
    match sign {
        Side::Minus => {
            let w = weights(&pair.plus, &logs(q, &pair.phi_plus_vals, &pair.omp_plus));
            exp_checked(q, I * (pair.plus.step / (2.0 * PI)) * w.iter().sum::<Complex64>())
        }
        Side::Plus => {
            let w = weights(&pair.minus, &logs(q, &pair.phi_minus_vals, &pair.omp_minus));
            exp_checked(q, -I * (pair.minus.step / (2.0 * PI)) * w.iter().sum::<Complex64>())
        }
    }
}

/// Distance from `w` to the cut `(-inf, 0]`.
pub fn cut_distance(w: Complex64) -> f64 {
    if w.re >= 0.0 {
        w.norm()
    } else {
        w.im.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificationReport {
    pub min_distance: f64,
    pub witness_q: Complex64,
    pub witness_eta: Complex64,
    pub samples: usize,
}

pub const DEFAULT_CUT_MARGIN: f64 = 1e-6;
pub const HOMOTOPY_STAGES: usize = 4;

/// Check that `1 - q Phi(eta)` and `(1 - q)/(1 - q Phi(eta))` stay away from
/// `(-inf, 0]` for every `q` and for `eta` on both contours and on the
/// intermediate contours `omega -> t omega`, `t = 0, 1/4, ..., 1`.
pub fn certify_deformation(q_grid: &[Complex64], pair: &ContourPair, model: &dyn StepModel, margin: f64) -> Result<CertificationReport> {
    let mut report = CertificationReport {
        min_distance: f64::INFINITY,
        witness_q: Complex64::new(0.0, 0.0),
        witness_eta: Complex64::new(0.0, 0.0),
        samples: 0,
    };
    for samples in [&pair.plus, &pair.minus] {
        for stage in 0..=HOMOTOPY_STAGES {
            let t = stage as f64 / HOMOTOPY_STAGES as f64;
            let apex = samples.map.apex();
            let map = SinhMap::fourier_through(apex, samples.map.b, t * samples.map.omega)?;
            let curve = ContourSamples::new(map, samples.step, samples.half);
            let (phi, _) = sample_model(model, &curve)?;
            for &q in q_grid {
                for (&eta, &p) in curve.xi.iter().zip(&phi) {
                    let w = ONE - q * p;
                    let dist = cut_distance(w).min(cut_distance((ONE - q) / w));
                    report.samples += 1;
                    if dist < report.min_distance {
                        report.min_distance = dist;
                        report.witness_q = q;
                        report.witness_eta = eta;
                    }
                }
            }
        }
    }
    if report.min_distance < margin {
        return Err(Error::DeformationInvalid {
            q: report.witness_q,
            eta: report.witness_eta,
            distance: report.min_distance,
        });
    }
    Ok(report)
}

/// Independent evaluation of the opposite-side factors for the
/// factorization identity: `phi-` on `L+` from a copy of `L+` tilted up,
/// `phi+` on `L-` from a copy of `L-` tilted down.
///
/// Each side keeps copies at several tilts. For a given `q` the largest tilt
/// whose band contains no zero of `1 - q Phi` is used; zeros are counted by
/// the change of argument of `1 - q Phi` along the contour and its copy.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    above_plus: Vec<CheckCopy>,
    below_minus: Vec<CheckCopy>,
    fine_plus: (Vec<Complex64>, Vec<Complex64>),
    fine_minus: (Vec<Complex64>, Vec<Complex64>),
}

#[derive(Debug, Clone)]
struct CheckCopy {
    tilt: f64,
    samples: ContourSamples,
    phi: Vec<Complex64>,
    omp: Vec<Complex64>,
    /// `1 - Phi` on the contour tilted by `2 tilt`, for the argument count.
    edge_omp: Vec<Complex64>,
}

/// Tilts tried, as fractions of the room available to the copy. A copy is
/// used only when the band out to twice its tilt is free of zeros.
pub const IDENTITY_TILT_FRACTIONS: [f64; 3] = [0.5, 0.25, 0.125];
/// `ln` of the inverse quadrature error aimed at on the copies.
const CHECK_LOG_ACCURACY: f64 = 41.0;
/// Refinement of the contour samples used for the argument count.
const WINDING_REFINE: usize = 4;

/// Largest rotation `s` (in the direction of `sign`) keeping the angle and apex of `map` admissible.
fn tilt_room(map: &SinhMap, sign: f64, angle_limit: f64, apex_limit: f64) -> f64 {
    let ok = |s: f64| {
        let t = map.tilted(sign * s);
        sign * t.omega < sign * angle_limit && sign * t.apex() < sign * apex_limit
    };
    let mut d = 0.0;
    let h = 1e-3;
    while d < 1.5 && ok(d + h) {
        d += h;
    }
    0.9 * d
}

fn check_copies(model: &dyn StepModel, base: &ContourSamples, sign: f64, room: f64) -> Result<Vec<CheckCopy>> {
    let y_end = base.half as f64 * base.step;
    IDENTITY_TILT_FRACTIONS
        .iter()
        .map(|&frac| {
            let tilt = frac * room;
            let step = 2.0 * PI * tilt.min(room - tilt) / CHECK_LOG_ACCURACY;
            let samples = ContourSamples::new(base.map.tilted(sign * tilt), step, (y_end / step).ceil() as usize);
            let (phi, omp) = sample_model(model, &samples)?;
            let r = WINDING_REFINE;
            let edge = ContourSamples::new(base.map.tilted(sign * 2.0 * tilt), base.step / r as f64, base.half * r);
            let (_, edge_omp) = sample_model(model, &edge)?;
            Ok(CheckCopy { tilt, samples, phi, omp, edge_omp })
        })
        .collect()
}

/// Total change of `arg(1 - q Phi)` along a sampled contour.
fn arg_change(q: Complex64, omp: &[Complex64]) -> f64 {
    let vals: Vec<Complex64> = omp.iter().map(|&o| (ONE - q) + q * o).collect();
    vals.windows(2).map(|w| (w[1] / w[0]).arg()).sum()
}

fn zero_free(q: Complex64, fine: &[Complex64], copy: &CheckCopy) -> bool {
    ((arg_change(q, fine) - arg_change(q, &copy.edge_omp)) / (2.0 * PI)).abs() < 0.5
}

impl IdentityCheck {
    pub fn new(model: &dyn StepModel, pair: &ContourPair) -> Result<Self> {
        let info = model.analyticity();
        let room_p = tilt_room(&pair.plus.map, 1.0, info.gamma_plus.min(PI / 2.0), info.mu_plus);
        let room_m = tilt_room(&pair.minus.map, -1.0, info.gamma_minus.max(-PI / 2.0), info.mu_minus);
        if !(room_p > 0.0 && room_m > 0.0) {
            return Err(Error::StripViolation("no room to tilt the check contours".into()));
        }
        let fine = |s: &ContourSamples| {
            let r = WINDING_REFINE;
            sample_model(model, &ContourSamples::new(s.map, s.step / r as f64, s.half * r))
        };
        Ok(IdentityCheck {
            above_plus: check_copies(model, &pair.plus, 1.0, room_p)?,
            below_minus: check_copies(model, &pair.minus, -1.0, room_m)?,
            fine_plus: fine(&pair.plus)?,
            fine_minus: fine(&pair.minus)?,
        })
    }

    /// Tilts of the copies used at `q` (above `L+`, below `L-`).
    pub fn tilts(&self, q: Complex64) -> Result<(f64, f64)> {
        Ok((self.pick(q, &self.above_plus, &self.fine_plus.1)?.tilt, self.pick(q, &self.below_minus, &self.fine_minus.1)?.tilt))
    }

    fn pick<'a>(&self, q: Complex64, copies: &'a [CheckCopy], fine: &[Complex64]) -> Result<&'a CheckCopy> {
        copies.iter().find(|c| zero_free(q, fine, c)).ok_or(Error::DeformationInvalid {
            q,
            eta: copies[copies.len() - 1].samples.map.apex() * I,
            distance: 0.0,
        })
    }

    /// `max |phi+ phi- (1 - q Phi) - (1 - q)| / |1 - q|` over both contours.
    pub fn residual(&self, pair: &ContourPair, f: &WhfFactors) -> Result<f64> {
        let q = f.q;
        let one_q = ONE - q;
        let mut worst: f64 = 0.0;
        let up = self.pick(q, &self.above_plus, &self.fine_plus.1)?;
        let w = weights(&up.samples, &logs(q, &up.phi, &up.omp));
        for (j, s) in cauchy_sums(&pair.plus.xi, &up.samples, &w).into_iter().enumerate() {
            let phm = exp_checked(q, I * s)?;
            let lhs = f.phi_plus_on_plus[j] * phm * (ONE - q * pair.phi_plus_vals[j]);
            worst = worst.max((lhs - one_q).norm() / one_q.norm());
        }
        let down = self.pick(q, &self.below_minus, &self.fine_minus.1)?;
        let w = weights(&down.samples, &logs(q, &down.phi, &down.omp));
        for (k, s) in cauchy_sums(&pair.minus.xi, &down.samples, &w).into_iter().enumerate() {
            let php = exp_checked(q, -I * s)?;
            let lhs = php * f.phi_minus_on_minus[k] * (ONE - q * pair.phi_minus_vals[k]);
            worst = worst.max((lhs - one_q).norm() / one_q.norm());
        }
        Ok(worst)
    }
}
