//! `tV(q) = sum_n q^n V_n` for each payoff, given the factors at `q`.
//!
//! All integrals run over the sampled contours of a [`ContourPair`]; the
//! bilinear terms go through the Cauchy kernel `D+`.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::wiener_hopf::{CauchyKernels, ContourPair, Side, WhfFactors};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `Q[x1 + X_n <= a1, max(x2, x1 + Xbar_n) <= a2]`; `x2` is the maximum so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpdfRequest {
    pub a1: f64,
    pub a2: f64,
    pub x1: f64,
    pub x2: f64,
}

impl CpdfRequest {
    pub fn new(a1: f64, a2: f64, x1: f64, x2: f64) -> Result<Self> {
        let r = CpdfRequest { a1, a2, x1, x2 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.a1, self.a2, self.x1, self.x2].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRequest("cpdf parameters must be finite".into()));
        }
        if self.a1 > self.a2 {
            return Err(Error::InvalidRequest(format!("need a1 <= a2, got {} > {}", self.a1, self.a2)));
        }
        if self.x1 > self.x2 {
            return Err(Error::InvalidRequest(format!("need x1 <= x2, got {} > {}", self.x1, self.x2)));
        }
        Ok(())
    }

    /// Levels relative to the current position, or `None` when the event is empty.
    pub fn relative(&self) -> Option<(f64, f64)> {
        if self.x2 > self.a2 {
            None
        } else {
            Some((self.a1 - self.x1, self.a2 - self.x1))
        }
    }
}

/// `(e^{beta x1} - e^{x2})_+` on `(X_n, Xbar_n)`; only `x2 = 0`, `x1 <= 0` is supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeRequest {
    pub beta: f64,
    pub x1: f64,
    pub x2: f64,
}

impl ExchangeRequest {
    pub fn new(beta: f64, x1: f64, x2: f64) -> Result<Self> {
        let r = ExchangeRequest { beta, x1, x2 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return Err(Error::InvalidRequest(format!("exchange needs beta > 1, got {}", self.beta)));
        }
        if self.x2 != 0.0 || !(self.x1 <= 0.0) {
            return Err(Error::InvalidRequest(format!(
                "exchange is implemented for x2 = 0, x1 <= 0; got x1 = {}, x2 = {}",
                self.x1, self.x2
            )));
        }
        Ok(())
    }

    pub fn intrinsic(&self) -> f64 {
        ((self.beta * self.x1).exp() - self.x2.exp()).max(0.0)
    }
}

/// Payoff `G(X_n)` of an up-and-out barrier option, described through its
/// Fourier transform `G^(xi) = int e^{-i x xi} G(x) dx` on `Im xi > 0`.
pub trait BarrierPayoff: Sync {
    fn value(&self, x: f64) -> f64;
    /// `G^(xi) e^{i s xi}`, computed without intermediate overflow.
    fn hat_times_exp(&self, xi: Complex64, s: f64) -> Complex64;
    /// `r` in `G^(xi) ~ r / (-i xi)` at 0 (residue weight when the 1D contour moves below 0).
    fn pole_weight(&self) -> f64;
    /// Contour for the 1D term at start `x`: above 0 when `e^{i x xi} G^` decays upward.
    fn one_d_side(&self, x: f64) -> Side;
}

/// `G = 1_{(-inf, a1]}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitalBelow {
    pub a1: f64,
}

impl BarrierPayoff for DigitalBelow {
    fn value(&self, x: f64) -> f64 {
        if x <= self.a1 {
            1.0
        } else {
            0.0
        }
    }

    fn hat_times_exp(&self, xi: Complex64, s: f64) -> Complex64 {
        (I * (s - self.a1) * xi).exp() / (-I * xi)
    }

    fn pole_weight(&self) -> f64 {
        1.0
    }

    fn one_d_side(&self, x: f64) -> Side {
        if x > self.a1 {
            Side::Plus
        } else {
            Side::Minus
        }
    }
}

/// No payoff at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPayoff;

impl BarrierPayoff for ZeroPayoff {
    fn value(&self, _x: f64) -> f64 {
        0.0
    }
    fn hat_times_exp(&self, _xi: Complex64, _s: f64) -> Complex64 {
        ZERO
    }
    fn pole_weight(&self) -> f64 {
        0.0
    }
    fn one_d_side(&self, _x: f64) -> Side {
        Side::Plus
    }
}

pub struct BarrierRequest<'a> {
    pub h: f64,
    pub x: f64,
    pub payoff: &'a dyn BarrierPayoff,
}

/// Per-`q` scalars shared by all evaluators.
fn one_minus_q(q: Complex64) -> Complex64 {
    ONE - q
}

/// `(1/2 pi) int_L e^{i s xi} q Phi / (1 - q Phi) * g(xi) d xi` on the chosen contour,
/// with `g(xi)` the payoff factor.
fn one_d_sum<F: Fn(Complex64) -> Complex64>(q: Complex64, pair: &ContourPair, side: Side, g: F) -> Complex64 {
    let (samples, phi, omp, range) = match side {
        Side::Plus => (&pair.plus, &pair.phi_plus_vals, &pair.omp_plus, pair.window_plus.clone()),
        Side::Minus => (&pair.minus, &pair.phi_minus_vals, &pair.omp_minus, pair.window_minus.clone()),
    };
    let mut acc = ZERO;
    for k in range {
        let den = (ONE - q) + q * omp[k];
        acc += g(samples.xi[k]) * q * phi[k] / den * samples.der[k];
    }
    acc * (samples.step / (2.0 * PI))
}

/// `q Phi / (1 - q Phi)` on the window of one contour.
fn resolvent(q: Complex64, pair: &ContourPair, side: Side) -> Vec<Complex64> {
    let (phi, omp, range) = match side {
        Side::Plus => (&pair.phi_plus_vals, &pair.omp_plus, pair.window_plus.clone()),
        Side::Minus => (&pair.phi_minus_vals, &pair.omp_minus, pair.window_minus.clone()),
    };
    range.map(|k| q * phi[k] / ((ONE - q) + q * omp[k])).collect()
}

#[derive(Debug, Clone)]
enum CpdfEntry {
    Empty,
    /// `e^{-i a2 eta} der / (-i eta)` on the window of `L-`.
    Diagonal(Vec<Complex64>),
    Full {
        side: Side,
        /// `e^{-i a1 xi} der / (-i xi)` on the window of `side`.
        one_d: Vec<Complex64>,
        /// `e^{i (a2 - a1) xi} der / xi` on the window of `L+`.
        outer: Vec<Complex64>,
        group: usize,
    },
}

/// The part of a cpdf batch that does not depend on `q`.
///
/// One product `D+ a` per distinct upper level; each lower level then costs a dot product.
#[derive(Debug, Clone)]
pub struct CpdfBatch {
    entries: Vec<CpdfEntry>,
    /// `e^{-i a2 eta} der` on the window of `L-` (zero outside), one per distinct `a2`.
    groups: Vec<Vec<Complex64>>,
}

impl CpdfBatch {
    pub fn new(reqs: &[CpdfRequest], pair: &ContourPair) -> Result<Self> {
        let mut levels: BTreeMap<u64, usize> = BTreeMap::new();
        let mut groups = Vec::new();
        let mut entries = Vec::with_capacity(reqs.len());
        for r in reqs {
            r.validate()?;
            let Some((a1, a2)) = r.relative() else {
                entries.push(CpdfEntry::Empty);
                continue;
            };
            if a1 == a2 {
                let g = pair
                    .window_minus
                    .clone()
                    .map(|k| {
                        let eta = pair.minus.xi[k];
                        (-I * a2 * eta).exp() / (-I * eta) * pair.minus.der[k]
                    })
                    .collect();
                entries.push(CpdfEntry::Diagonal(g));
                continue;
            }
            let side = if a1 < 0.0 { Side::Plus } else { Side::Minus };
            let (samples, range) = match side {
                Side::Plus => (&pair.plus, pair.window_plus.clone()),
                Side::Minus => (&pair.minus, pair.window_minus.clone()),
            };
            let one_d = range
                .map(|k| {
                    let xi = samples.xi[k];
                    (-I * a1 * xi).exp() / (-I * xi) * samples.der[k]
                })
                .collect();
            let outer = pair
                .window_plus
                .clone()
                .map(|j| {
                    let xi = pair.plus.xi[j];
                    (I * (a2 - a1) * xi).exp() / xi * pair.plus.der[j]
                })
                .collect();
            let group = *levels.entry(a2.to_bits()).or_insert_with(|| {
                let mut a = vec![ZERO; pair.minus.len()];
                for k in pair.window_minus.clone() {
                    a[k] = (-I * a2 * pair.minus.xi[k]).exp() * pair.minus.der[k];
                }
                groups.push(a);
                groups.len() - 1
            });
            entries.push(CpdfEntry::Full { side, one_d, outer, group });
        }
        Ok(CpdfBatch { entries, groups })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eval(&self, q: Complex64, whf: &WhfFactors, pair: &ContourPair, kernels: &CauchyKernels) -> Vec<Complex64> {
        let omq = one_minus_q(q);
        let zp = pair.plus.step / (2.0 * PI);
        let zm = pair.minus.step / (2.0 * PI);
        let wp = pair.window_plus.clone();
        let wm = pair.window_minus.clone();
        let res_plus = resolvent(q, pair, Side::Plus);
        let res_minus = resolvent(q, pair, Side::Minus);
        let rhs: Vec<Vec<Complex64>> = self
            .groups
            .iter()
            .map(|a| a.iter().zip(&whf.phi_plus_on_minus).map(|(x, p)| x * p).collect())
            .collect();
        let inner: Vec<Vec<Complex64>> = kernels
            .apply_many(&rhs)
            .into_iter()
            .map(|u| wp.clone().map(|j| whf.phi_minus_on_plus[j] * u[j]).collect())
            .collect();
        let dot = |x: &[Complex64], y: &[Complex64]| x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a * b);
        let phi_plus = &whf.phi_plus_on_minus[wm.clone()];
        self.entries
            .iter()
            .map(|e| match e {
                CpdfEntry::Empty => ZERO,
                CpdfEntry::Diagonal(g) => (ONE + dot(g, phi_plus) * zm) / omq,
                CpdfEntry::Full { side, one_d, outer, group } => {
                    let (base, j) = match side {
                        Side::Plus => (ZERO, dot(one_d, &res_plus) * zp),
                        Side::Minus => (ONE / omq, dot(one_d, &res_minus) * zm),
                    };
                    base + j + dot(outer, &inner[*group]) * (zp * zm) / omq
                }
            })
            .collect()
    }
}

/// Joint cpdf for a batch of requests sharing one `q`; see [`CpdfBatch`].
pub fn cpdf_tilde_batch(
    q: Complex64,
    reqs: &[CpdfRequest],
    whf: &WhfFactors,
    pair: &ContourPair,
    kernels: &CauchyKernels,
) -> Result<Vec<Complex64>> {
    Ok(CpdfBatch::new(reqs, pair)?.eval(q, whf, pair, kernels))
}

pub fn cpdf_tilde(q: Complex64, req: &CpdfRequest, whf: &WhfFactors, pair: &ContourPair, kernels: &CauchyKernels) -> Result<Complex64> {
    Ok(cpdf_tilde_batch(q, std::slice::from_ref(req), whf, pair, kernels)?[0])
}

fn no_touch_relative(q: Complex64, a2: f64, whf: &WhfFactors, pair: &ContourPair) -> Complex64 {
    let zm = pair.minus.step / (2.0 * PI);
    let mut acc = ZERO;
    for k in pair.window_minus.clone() {
        let eta = pair.minus.xi[k];
        acc += (-I * a2 * eta).exp() * whf.phi_plus_on_minus[k] / (-I * eta) * pair.minus.der[k];
    }
    (ONE + acc * zm) / (ONE - q)
}

/// Perpetual no-touch `Q[max(x1 + Xbar_n) <= a2]`: a single integral of
/// `phi+` over `L-`, plus the residue at 0.
pub fn no_touch_tilde(q: Complex64, a2: f64, x1: f64, whf: &WhfFactors, pair: &ContourPair) -> Result<Complex64> {
    if !(x1 <= a2) {
        return Err(Error::InvalidRequest(format!("no-touch needs x1 <= a2, got {x1} > {a2}")));
    }
    Ok(no_touch_relative(q, a2 - x1, whf, pair))
}

/// Up-and-out barrier at `h` with payoff `G(X_n)`:
/// `G(x) + (q Phi(D)/(1 - q Phi(D)) G)(x) - (E+ 1_{[h, inf)} E- G)(x) / (1 - q)`.
pub fn barrier_tilde(
    q: Complex64,
    req: &BarrierRequest<'_>,
    whf: &WhfFactors,
    pair: &ContourPair,
    kernels: &CauchyKernels,
) -> Result<Complex64> {
    if !(req.x < req.h) {
        return Err(Error::InvalidRequest(format!("barrier needs x < h, got {} >= {}", req.x, req.h)));
    }
    let omq = one_minus_q(q);
    let g = req.payoff;
    let side = g.one_d_side(req.x);
    let mut j = one_d_sum(q, pair, side, |xi| g.hat_times_exp(xi, req.x));
    if side == Side::Minus {
        j += q / omq * g.pole_weight();
    }
    let mut a = vec![ZERO; pair.minus.len()];
    for k in pair.window_minus.clone() {
        a[k] = (I * (req.x - req.h) * pair.minus.xi[k]).exp() * whf.phi_plus_on_minus[k] * pair.minus.der[k];
    }
    let u = kernels.apply(&a);
    let mut acc = ZERO;
    for jj in pair.window_plus.clone() {
        let xi = pair.plus.xi[jj];
        let b = whf.phi_minus_on_plus[jj] * g.hat_times_exp(xi, req.h) * pair.plus.der[jj];
        acc += b * u[jj];
    }
    let zz = pair.plus.step * pair.minus.step / (4.0 * PI * PI);
    // 1/(i (eta - xi)) = i D+
    let term3 = I * acc * zz;
    Ok(ONE * g.value(req.x) + j - term3 / omq)
}

/// Kernel of the exchange double integral on the valuation windows,
/// `G[k][j] = G(eta_k, xi_j)` with `eta` on `L-`, `xi` on `L+`.
#[derive(Debug, Clone)]
pub struct ExchangeKernel {
    pub beta: f64,
    pub g: Vec<Complex64>,
    pub rows: std::ops::Range<usize>,
    pub cols: std::ops::Range<usize>,
}

/// `1/((beta - i xi)(i eta - beta)) - 1/((-i xi)(i eta - 1)) + beta/((-i xi)(beta - i xi)(i eta - 1 - i xi c))`,
/// `c = 1 - 1/beta`.
pub fn exchange_kernel_entry(beta: f64, eta: Complex64, xi: Complex64) -> Complex64 {
    let c = 1.0 - 1.0 / beta;
    let mi = -I * xi;
    let bx = beta - I * xi;
    ONE / (bx * (I * eta - beta)) - ONE / (mi * (I * eta - 1.0)) + beta / (mi * bx * (I * eta - 1.0 - I * xi * c))
}

/// `1/(1 - i eta) - 1/(beta - i eta)`.
pub fn exchange_w0(beta: f64, eta: Complex64) -> Complex64 {
    ONE / (ONE - I * eta) - ONE / (beta - I * eta)
}

impl ExchangeKernel {
    pub fn new(beta: f64, pair: &ContourPair) -> Self {
        let rows = pair.window_minus.clone();
        let cols = pair.window_plus.clone();
        let mut g = Vec::with_capacity(rows.len() * cols.len());
        for k in rows.clone() {
            for j in cols.clone() {
                g.push(exchange_kernel_entry(beta, pair.minus.xi[k], pair.plus.xi[j]));
            }
        }
        ExchangeKernel { beta, g, rows, cols }
    }
}

/// Exchange of the supremum: `f + (I3 + I4)/(1 - q)` with
/// `I3 = c- (1/2 pi) int_{L-} e^{i x1 eta} phi+(eta) w0(eta) d eta` and
/// `I4 = (1/2 pi)^2 int_{L-} int_{L+} e^{i x1 eta} phi+(eta) phi--(xi) G(eta, xi)`.
pub fn exchange_tilde(q: Complex64, req: &ExchangeRequest, whf: &WhfFactors, pair: &ContourPair, kernel: &ExchangeKernel) -> Result<Complex64> {
    req.validate()?;
    if kernel.beta != req.beta {
        return Err(Error::InvalidRequest("exchange kernel built for a different beta".into()));
    }
    let zp = pair.plus.step / (2.0 * PI);
    let zm = pair.minus.step / (2.0 * PI);
    let v: Vec<Complex64> = kernel
        .cols
        .clone()
        .map(|j| (whf.phi_minus_on_plus[j] - whf.c_minus) * pair.plus.der[j])
        .collect();
    let ncol = kernel.cols.len();
    let mut i3 = ZERO;
    let mut i4 = ZERO;
    for (r, k) in kernel.rows.clone().enumerate() {
        let eta = pair.minus.xi[k];
        let a = (I * req.x1 * eta).exp() * whf.phi_plus_on_minus[k] * pair.minus.der[k];
        i3 += a * exchange_w0(req.beta, eta);
        let row = &kernel.g[r * ncol..(r + 1) * ncol];
        let s = row.iter().zip(&v).fold(ZERO, |acc, (g, vj)| acc + g * vj);
        i4 += a * s;
    }
    let i3 = i3 * zm * whf.c_minus;
    let i4 = i4 * zm * zp;
    Ok(ONE * req.intrinsic() + (i3 + i4) / (ONE - q))
}

/// 1D term of the generic representation.
pub struct OneDTerm<'a> {
    /// `e^{i x1 xi} f1^(xi, x2)`.
    pub integrand: &'a (dyn Fn(Complex64) -> Complex64 + Sync),
    pub side: Side,
    /// Residue weight added as `r q / (1 - q)` when the contour is below 0.
    pub residue: f64,
}

/// Payoff data for the generic representation in reduced form: every
/// closure already carries its `e^{i x1 .}` factor.
pub struct GenericPayoff<'a> {
    pub value: f64,
    pub one_d: Option<OneDTerm<'a>>,
    /// `e^{i x1 eta} w0^(eta, x2)`.
    pub w0: Option<&'a (dyn Fn(Complex64) -> Complex64 + Sync)>,
    /// `e^{i x1 eta} K(eta, xi)`; `w-^(eta) = (1/2 pi) int_{L+} phi--(xi) K(eta, xi) d xi`.
    pub kernel: Option<&'a (dyn Fn(Complex64, Complex64) -> Complex64 + Sync)>,
}

/// `f + 1D + c- / (2 pi (1 - q)) int phi++ w0 + 1 / (2 pi (1 - q)) int phi++ w-`, all outer
/// integrals over `L-`.
pub fn generic_tilde(q: Complex64, payoff: &GenericPayoff<'_>, whf: &WhfFactors, pair: &ContourPair) -> Result<Complex64> {
    let omq = ONE - q;
    let zp = pair.plus.step / (2.0 * PI);
    let zm = pair.minus.step / (2.0 * PI);
    let mut total = ONE * payoff.value;
    if let Some(t) = &payoff.one_d {
        total += one_d_sum(q, pair, t.side, t.integrand);
        if t.side == Side::Minus {
            total += q / omq * t.residue;
        }
    }
    let ppp: Vec<Complex64> = pair
        .window_minus
        .clone()
        .map(|k| (whf.phi_plus_on_minus[k] - whf.c_plus) * pair.minus.der[k])
        .collect();
    if let Some(w0) = payoff.w0 {
        let s = pair.window_minus.clone().zip(&ppp).fold(ZERO, |acc, (k, p)| acc + p * w0(pair.minus.xi[k]));
        total += whf.c_minus * s * zm / omq;
    }
    if let Some(kern) = payoff.kernel {
        let mmm: Vec<(Complex64, Complex64)> = pair
            .window_plus
            .clone()
            .map(|j| (pair.plus.xi[j], (whf.phi_minus_on_plus[j] - whf.c_minus) * pair.plus.der[j]))
            .collect();
        let mut s = ZERO;
        for (k, p) in pair.window_minus.clone().zip(&ppp) {
            let eta = pair.minus.xi[k];
            let inner = mmm.iter().fold(ZERO, |acc, &(xi, m)| acc + m * kern(eta, xi));
            s += p * inner * zp;
        }
        total += s * zm / omq;
    }
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::Numerical(format!("generic transform is not finite at q = {q}")));
    }
    Ok(total)
}
