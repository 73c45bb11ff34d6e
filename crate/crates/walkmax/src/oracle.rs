//! Brute-force reference for the joint law of `(X_n, Xbar_n)`.
//!
//! The one-step law is sampled on a lattice `x = j h` through hat-function
//! weights `T_j = E Lambda((Y - j h) / h)`, computed by contour quadrature of
//! `Phi`. Mass then moves by direct dynamic programming: convolve in `x`,
//! update the running maximum, fold what leaves the lattice onto its edges.
//! Nothing here shares code with the factorization pipeline beyond the model.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::contours::{ContourSamples, SinhMap};
use crate::error::{Error, Result};
use crate::models::{cexpm1, StepModel};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

const QUAD_STEP: f64 = 0.05;
const QUAD_EXTENT: f64 = 50.0;
const QUAD_B: f64 = 0.5;
/// Terms of the hat-weight recursion below this size are dropped.
const NEGLIGIBLE: f64 = 1e-40;

pub const MAX_STEPS: usize = 64;
pub const MAX_AXIS_NODES: usize = 1 << 15;
pub const NEGATIVITY_FLOOR: f64 = -1e-8;
pub const TAIL_LIMIT: f64 = 1e-6;

/// One-step law of the walk by quadrature along contours above and below the real line.
pub struct StepLaw<'a> {
    model: &'a dyn StepModel,
    /// `(xi, Phi(xi) der step / 2 pi)`.
    upper: Vec<(Complex64, Complex64)>,
    lower: Vec<(Complex64, Complex64)>,
    /// Below the axis close to `mu_-`, for the far right tail.
    deep: Vec<(Complex64, Complex64)>,
    mean: f64,
}

fn weighted_nodes(model: &dyn StepModel, map: SinhMap, step: f64) -> Result<Vec<(Complex64, Complex64)>> {
    let half = (QUAD_EXTENT / step).ceil() as usize;
    let s = ContourSamples::new(map, step, half);
    let z = step / (2.0 * PI);
    let mut out = Vec::with_capacity(s.len());
    for (&xi, &d) in s.xi.iter().zip(&s.der) {
        let w = model.phi(xi)? * d * z;
        if w.re.is_finite() && w.im.is_finite() && w != ZERO {
            out.push((xi, w));
        }
    }
    Ok(out)
}

impl<'a> StepLaw<'a> {
    pub fn new(model: &'a dyn StepModel) -> Result<Self> {
        let info = model.analyticity();
        let up = (0.3f64).min(0.3 * info.mu_plus);
        let lo = (-0.5f64).max(0.25 * info.mu_minus);
        let om_up = 0.5 * info.gamma_plus.min(PI / 2.0);
        let om_lo = 0.5 * info.gamma_minus.max(-PI / 2.0);
        if !(om_up > 0.0 && om_lo < 0.0) {
            return Err(Error::InvalidModel("oracle needs a two-sided cone of analyticity".into()));
        }
        Ok(StepLaw {
            model,
            upper: weighted_nodes(model, SinhMap::fourier_through(up, QUAD_B, om_up)?, QUAD_STEP)?,
            lower: weighted_nodes(model, SinhMap::fourier_through(lo, QUAD_B, om_lo)?, QUAD_STEP)?,
            deep: weighted_nodes(
                model,
                SinhMap::fourier_through(0.875 * info.mu_minus, 0.2 * QUAD_B, om_lo)?,
                0.5 * QUAD_STEP,
            )?,
            mean: model.step_mean(),
        })
    }

    pub fn model(&self) -> &dyn StepModel {
        self.model
    }

    /// `P[Y <= x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            sum_nodes(&self.upper, x, |xi| 1.0 / (-I * xi))
        } else {
            1.0 - self.survival(x)
        }
    }

    /// `E (x - Y)_+ = int_{-inf}^x P[Y <= y] dy`.
    pub fn integrated_cdf(&self, x: f64) -> f64 {
        let g = |xi: Complex64| {
            let m = -I * xi;
            1.0 / (m * m)
        };
        if x < 0.0 {
            sum_nodes(&self.upper, x, g)
        } else {
            x - self.mean + self.excess(x)
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    fn right_nodes(&self, x: f64) -> &[(Complex64, Complex64)] {
        if x >= 1.0 {
            &self.deep
        } else {
            &self.lower
        }
    }

    /// `P[Y > x]` for `x >= 0`.
    pub fn survival(&self, x: f64) -> f64 {
        -sum_nodes(self.right_nodes(x), x, |xi| 1.0 / (-I * xi))
    }

    /// `E (Y - x)_+` for `x >= 0`.
    pub fn excess(&self, x: f64) -> f64 {
        sum_nodes(self.right_nodes(x), x, |xi| {
            let m = -I * xi;
            1.0 / (m * m)
        })
    }

    /// `T_j` for `j = -half..=half`.
    pub fn hat_weights(&self, h: f64, half: usize) -> Vec<f64> {
        let mut w = vec![0.0; 2 * half + 1];
        w[half] = (self.integrated_cdf(h) - 2.0 * self.integrated_cdf(0.0) + self.integrated_cdf(-h)) / h;
        // j >= 1 below the axis: -e^{-i (j-1) h xi} expm1(-i h xi)^2 / (h xi^2)
        let right = hat_side(&self.lower, h, half, -1.0);
        let left = hat_side(&self.upper, h, half, 1.0);
        for j in 1..=half {
            w[half + j] = right[j - 1];
            w[half - j] = left[j - 1];
        }
        w
    }
}

fn sum_nodes<F: Fn(Complex64) -> Complex64>(nodes: &[(Complex64, Complex64)], x: f64, g: F) -> f64 {
    nodes
        .iter()
        .map(|&(xi, w)| {
            let e = (-I * x * xi).exp();
            if e == ZERO {
                ZERO
            } else {
                e * w * g(xi)
            }
        })
        .sum::<Complex64>()
        .re
}

/// Hat weights `j = 1..=half` on one side: `sign = -1` gives `T_j`, `sign = 1` gives `T_{-j}`.
fn hat_side(nodes: &[(Complex64, Complex64)], h: f64, half: usize, sign: f64) -> Vec<f64> {
    let mut terms: Vec<(Complex64, Complex64)> = nodes
        .iter()
        .filter_map(|&(xi, w)| {
            let e1 = cexpm1(sign * I * h * xi);
            let c = -w * e1 * e1 / (h * xi * xi);
            let r = (sign * I * h * xi).exp();
            (c.re.is_finite() && c.im.is_finite() && c.norm() > NEGLIGIBLE).then_some((c, r))
        })
        .collect();
    let mut out = Vec::with_capacity(half);
    for j in 1..=half {
        out.push(terms.iter().map(|t| t.0).sum::<Complex64>().re);
        for t in terms.iter_mut() {
            t.0 *= t.1;
        }
        if j % 64 == 0 {
            terms.retain(|t| t.0.norm() > NEGLIGIBLE);
        }
    }
    out
}

/// Lattice law of one step: `weights[j + half] = T_j`, plus the mass beyond the lattice.
#[derive(Debug, Clone)]
pub struct StepKernel {
    pub h: f64,
    pub half: usize,
    pub weights: Vec<f64>,
    pub left_tail: f64,
    pub right_tail: f64,
}

impl StepKernel {
    /// Density values `T_j / h`.
    pub fn pdf(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.h).collect()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.left_tail + self.right_tail
    }

    pub fn mean(&self) -> f64 {
        let c = self.half as f64;
        self.weights.iter().enumerate().map(|(i, w)| (i as f64 - c) * self.h * w).sum()
    }

    /// Same law with weights beyond `|j| > width` moved into the tails.
    pub fn clipped(&self, width: usize) -> StepKernel {
        if width >= self.half {
            return self.clone();
        }
        let cut = self.half - width;
        let n = self.weights.len();
        StepKernel {
            h: self.h,
            half: width,
            weights: self.weights[cut..n - cut].to_vec(),
            left_tail: self.left_tail + self.weights[..cut].iter().sum::<f64>(),
            right_tail: self.right_tail + self.weights[n - cut..].iter().sum::<f64>(),
        }
    }

    pub fn variance(&self) -> f64 {
        let c = self.half as f64;
        let m = self.mean();
        self.weights.iter().enumerate().map(|(i, w)| ((i as f64 - c) * self.h - m).powi(2) * w).sum()
    }
}

/// Step law on the lattice of spacing `h` out to `|x| = half h`.
///
/// Negative weights above `NEGATIVITY_FLOOR * h` are clipped and the rest
/// renormalized; mass beyond the lattice above `TAIL_LIMIT` is an error.
pub fn step_density(law: &StepLaw<'_>, h: f64, half: usize) -> Result<StepKernel> {
    if !(h > 0.0 && h.is_finite()) || half == 0 {
        return Err(Error::InvalidRequest(format!("lattice needs h > 0 and a positive width, got h = {h}")));
    }
    let mut weights = law.hat_weights(h, half);
    let edge = half as f64 * h;
    let left_tail = ((law.integrated_cdf(-edge) - law.integrated_cdf(-edge - h)) / h).max(0.0);
    let inside_upto = (law.integrated_cdf(edge + h) - law.integrated_cdf(edge)) / h;
    let right_tail = (1.0 - inside_upto).max(0.0);
    if left_tail + right_tail > TAIL_LIMIT {
        return Err(Error::TailMass { mass: left_tail + right_tail });
    }
    if let Some(bad) = weights.iter().find(|&&w| w / h < NEGATIVITY_FLOOR) {
        return Err(Error::Numerical(format!("step density {} below the clipping floor", bad / h)));
    }
    for w in weights.iter_mut() {
        *w = w.max(0.0);
    }
    let total: f64 = weights.iter().sum::<f64>() + left_tail + right_tail;
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(StepKernel { h, half, weights, left_tail: left_tail / total, right_tail: right_tail / total })
}

/// `X` with `P[|Y| > X] < tail`, by doubling.
pub fn tail_width(law: &StepLaw<'_>, tail: f64) -> Result<f64> {
    let mut x = 0.5;
    while x < 1e3 {
        if law.cdf(-x) + (1.0 - law.cdf(x)) < tail {
            return Ok(x);
        }
        x *= 1.25;
    }
    Err(Error::TailMass { mass: tail })
}

/// Step law on a lattice wide enough to hold all but `TAIL_LIMIT / 100` of the mass.
pub fn step_kernel(law: &StepLaw<'_>, h: f64) -> Result<StepKernel> {
    let x = tail_width(law, TAIL_LIMIT / 100.0)?;
    step_density(law, h, (x / h).ceil() as usize)
}

/// Linear convolution by FFT.
fn convolve(planner: &mut FftPlanner<f64>, a: &[f64], kernel_hat: &[Complex64]) -> Vec<f64> {
    let n = kernel_hat.len();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).chain(std::iter::repeat(ZERO)).take(n).collect();
    fwd.process(&mut buf);
    for (b, k) in buf.iter_mut().zip(kernel_hat) {
        *b *= k;
    }
    inv.process(&mut buf);
    buf.iter().map(|z| z.re / n as f64).collect()
}

fn kernel_transform(planner: &mut FftPlanner<f64>, kernel: &StepKernel, len: usize) -> Vec<Complex64> {
    let n = (len + kernel.weights.len()).next_power_of_two();
    let mut buf: Vec<Complex64> =
        kernel.weights.iter().map(|&x| Complex64::new(x, 0.0)).chain(std::iter::repeat(ZERO)).take(n).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    buf
}

/// Lattice index of `x`, which must sit on the lattice.
fn node_of(x: f64, h: f64) -> Result<i64> {
    let k = (x / h).round();
    if (k * h - x).abs() > 1e-9 * h.max(x.abs()) {
        return Err(Error::InvalidRequest(format!("{x} is not on the lattice of spacing {h}")));
    }
    Ok(k as i64)
}

/// Trapezoidal weight of node `k` in `{x <= a}`.
fn below(k: i64, a: i64) -> f64 {
    match k.cmp(&a) {
        std::cmp::Ordering::Less => 1.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Greater => 0.0,
    }
}

/// Joint law of `(X_m, Xbar_m)` on nodes `x = i h`, `i in lo..=hi`, and
/// `max = j h`, `j in 0..=hi`; only `j >= max(i, 0)` carries mass.
///
/// Mass below `lo h` sits on `i = lo`, mass above `hi h` on `(hi, hi)`.
#[derive(Debug, Clone)]
pub struct JointGrid {
    pub h: f64,
    pub lo: i64,
    pub hi: i64,
    pub steps: usize,
    /// Row-major `(i - lo) * (hi + 1) + j`.
    pub mass: Vec<f64>,
}

impl JointGrid {
    /// Unit mass at `(0, 0)`.
    pub fn start(h: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(h > 0.0 && lower < 0.0 && upper > 0.0) {
            return Err(Error::InvalidRequest("joint grid needs h > 0 and lower < 0 < upper".into()));
        }
        let lo = -(lower.abs() / h).ceil() as i64;
        let hi = (upper / h).ceil() as i64;
        let nx = (hi - lo + 1) as usize;
        if nx > MAX_AXIS_NODES {
            return Err(Error::InvalidRequest(format!("{nx} lattice nodes exceed the cap {MAX_AXIS_NODES}")));
        }
        let mut g = JointGrid { h, lo, hi, steps: 0, mass: vec![0.0; nx * (hi as usize + 1)] };
        let idx = g.index(0, 0);
        g.mass[idx] = 1.0;
        Ok(g)
    }

    fn ncols(&self) -> usize {
        self.hi as usize + 1
    }

    fn index(&self, i: i64, j: i64) -> usize {
        (i - self.lo) as usize * self.ncols() + j as usize
    }

    pub fn at(&self, i: i64, j: i64) -> f64 {
        if i < self.lo || i > self.hi || j < 0 || j > self.hi {
            0.0
        } else {
            self.mass[self.index(i, j)]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Law of `X_m` alone, indexed by `i - lo`.
    pub fn marginal_x(&self) -> Vec<f64> {
        self.mass.chunks(self.ncols()).map(|r| r.iter().sum()).collect()
    }

    /// `steps` more steps of `(X, Xbar) -> (X + Y, max(Xbar, X + Y))`.
    pub fn evolve(&self, kernel: &StepKernel, steps: usize) -> Result<JointGrid> {
        if (kernel.h - self.h).abs() > 1e-15 * self.h {
            return Err(Error::InvalidRequest("kernel and grid spacings differ".into()));
        }
        if self.steps + steps > MAX_STEPS {
            return Err(Error::InvalidRequest(format!("oracle is capped at {MAX_STEPS} steps")));
        }
        let nx = (self.hi - self.lo + 1) as usize;
        let kernel = &kernel.clipped(nx);
        let mut planner = FftPlanner::new();
        let khat = kernel_transform(&mut planner, kernel, nx);
        let half = kernel.half as i64;
        let mut cur = self.clone();
        for _ in 0..steps {
            let mut next = vec![0.0; cur.mass.len()];
            for j in 0..=cur.hi {
                let col: Vec<f64> = (cur.lo..=cur.hi).map(|i| cur.mass[cur.index(i, j)]).collect();
                let total: f64 = col.iter().sum();
                if total == 0.0 {
                    continue;
                }
                let conv = convolve(&mut planner, &col, &khat);
                let mut low = kernel.left_tail * total;
                let mut high = kernel.right_tail * total;
                for (t, &v) in conv.iter().enumerate().take(nx + kernel.weights.len() - 1) {
                    let k = cur.lo + t as i64 - half;
                    if k < cur.lo {
                        low += v;
                    } else if k > cur.hi {
                        high += v;
                    } else {
                        next[cur.index(k, j.max(k))] += v;
                    }
                }
                next[cur.index(cur.lo, j)] += low;
                let top = cur.index(cur.hi, cur.hi);
                next[top] += high;
            }
            cur.mass = next;
            cur.steps += 1;
        }
        Ok(cur)
    }

    /// `P[X <= a1, Xbar <= a2]` with half weight on nodes at the levels.
    pub fn query_cpdf(&self, a1: f64, a2: f64) -> Result<f64> {
        let k1 = node_of(a1, self.h)?;
        let k2 = node_of(a2, self.h)?;
        Ok(self.query_weighted(|i, j| below(i, k1) * below(j, k2)))
    }

    /// `E f(X, Xbar)` over the nodes.
    pub fn query_payoff<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let h = self.h;
        self.query_weighted(|i, j| f(i as f64 * h, j as f64 * h))
    }

    fn query_weighted<F: Fn(i64, i64) -> f64>(&self, w: F) -> f64 {
        let mut acc = 0.0;
        for i in self.lo..=self.hi {
            for j in i.max(0)..=self.hi {
                let m = self.mass[self.index(i, j)];
                if m != 0.0 {
                    acc += m * w(i, j);
                }
            }
        }
        acc
    }
}

/// Law of `X_m` alone on `lo..=hi` with the same edge folding as [`JointGrid`].
pub fn free_walk(kernel: &StepKernel, lo: i64, hi: i64, steps: usize) -> Vec<f64> {
    let nx = (hi - lo + 1) as usize;
    let kernel = &kernel.clipped(nx);
    let mut planner = FftPlanner::new();
    let khat = kernel_transform(&mut planner, kernel, nx);
    let half = kernel.half as i64;
    let mut u = vec![0.0; nx];
    u[(-lo) as usize] = 1.0;
    for _ in 0..steps {
        let total: f64 = u.iter().sum();
        let conv = convolve(&mut planner, &u, &khat);
        let mut next = vec![0.0; nx];
        next[0] += kernel.left_tail * total;
        next[nx - 1] += kernel.right_tail * total;
        for (t, &v) in conv.iter().enumerate().take(nx + kernel.weights.len() - 1) {
            let k = (lo + t as i64 - half).clamp(lo, hi);
            next[(k - lo) as usize] += v;
        }
        u = next;
    }
    u
}

/// `P[X_n <= a1, Xbar_n <= a2]` from `(0, 0)` for every `n` in `ns` and `a1` in `a1s`,
/// by the walk killed above `a2`. Rows follow `ns`.
///
/// Only the lattice below `a2` is stored, so `h` can be much finer than a
/// [`JointGrid`] allows. Mass below `-lower` is parked on the bottom node.
pub fn killed_cpdf(kernel: &StepKernel, lower: f64, a2: f64, a1s: &[f64], ns: &[usize]) -> Result<Vec<Vec<f64>>> {
    let h = kernel.h;
    let k2 = node_of(a2, h)?;
    let lo = -(lower / h).ceil() as i64;
    if !(k2 >= 0 && lower > 0.0) {
        return Err(Error::InvalidRequest("killed walk needs a2 >= 0 and lower > 0".into()));
    }
    let k1s: Vec<i64> = a1s.iter().map(|&a| node_of(a, h)).collect::<Result<_>>()?;
    let n_max = ns.iter().copied().max().unwrap_or(0);
    if n_max > MAX_STEPS {
        return Err(Error::InvalidRequest(format!("oracle is capped at {MAX_STEPS} steps")));
    }
    let nx = (k2 - lo + 1) as usize;
    let kernel = &kernel.clipped(nx);
    let mut planner = FftPlanner::new();
    let khat = kernel_transform(&mut planner, kernel, nx);
    let half = kernel.half as i64;
    let mut u = vec![0.0; nx];
    u[(-lo) as usize] = if k2 == 0 { 0.5 } else { 1.0 };
    let query = |u: &[f64]| -> Vec<f64> {
        k1s.iter()
            .map(|&k1| {
                u.iter()
                    .enumerate()
                    .map(|(t, &m)| {
                        let k = lo + t as i64;
                        if k1 >= k2 {
                            m
                        } else {
                            m * below(k, k1)
                        }
                    })
                    .sum()
            })
            .collect()
    };
    let mut rows = vec![Vec::new(); ns.len()];
    for (r, &n) in ns.iter().enumerate() {
        if n == 0 {
            rows[r] = query(&u);
        }
    }
    for step in 1..=n_max {
        let total: f64 = u.iter().sum();
        let conv = convolve(&mut planner, &u, &khat);
        let mut next = vec![0.0; nx];
        next[0] += kernel.left_tail * total;
        for (t, &v) in conv.iter().enumerate().take(nx + kernel.weights.len() - 1) {
            let k = lo + t as i64 - half;
            if k < lo {
                next[0] += v;
            } else if k < k2 {
                next[(k - lo) as usize] += v;
            } else if k == k2 {
                next[(k - lo) as usize] += 0.5 * v;
            }
        }
        u = next;
        for (r, &n) in ns.iter().enumerate() {
            if n == step {
                rows[r] = query(&u);
            }
        }
    }
    Ok(rows)
}

/// Cells of a one-step law: probability and conditional mean of `Y` on each.
struct Cells {
    p: Vec<f64>,
    mu: Vec<f64>,
}

/// Edges from 0 outward with spacing `h (1 + |x| / width)`.
fn graded_edges(h: f64, width: f64, left: f64, right: f64) -> Vec<f64> {
    let mut pos = vec![0.0];
    let mut x: f64 = 0.0;
    while x < right {
        x += h * (1.0 + x / width);
        pos.push(x.min(right));
    }
    let mut neg = Vec::new();
    let mut x: f64 = 0.0;
    while x < left {
        x += h * (1.0 + x / width);
        neg.push(-x.min(left));
    }
    neg.reverse();
    neg.extend(pos);
    neg
}

fn cells(law: &StepLaw<'_>, edges: &[f64]) -> Cells {
    // Left of 0 from `F` and `G`; right of 0 from `P[Y > x]` and `E (Y - x)_+`
    // so that far-tail cells keep their relative accuracy.
    let n = edges.len();
    let mut p = Vec::with_capacity(n + 1);
    let mut mu = Vec::with_capacity(n + 1);
    // mass and first moment of (-inf, x] or (x, inf)
    let lower_part = |x: f64| {
        let f = law.cdf(x);
        (f, x * f - law.integrated_cdf(x))
    };
    let upper_part = |x: f64| {
        let s = law.survival(x);
        (s, x * s + law.excess(x))
    };
    let mean_or = |m: f64, a: f64, b: f64| if m >= a && m <= b { m } else { 0.5 * (a + b) };
    let (f0, m0) = lower_part(edges[0]);
    p.push(f0);
    mu.push(if f0 > 0.0 { (m0 / f0).min(edges[0]) } else { edges[0] });
    let mut prev_low = (f0, m0);
    let mut prev_up = upper_part(edges[0].max(0.0));
    for k in 0..n - 1 {
        let (a, b) = (edges[k], edges[k + 1]);
        let (pk, mk) = if b <= 0.0 {
            let cur = lower_part(b);
            let d = (cur.0 - prev_low.0, cur.1 - prev_low.1);
            prev_low = cur;
            d
        } else {
            let cur = upper_part(b);
            let d = (prev_up.0 - cur.0, prev_up.1 - cur.1);
            prev_up = cur;
            d
        };
        p.push(pk.max(0.0));
        mu.push(if pk > 0.0 { mean_or(mk / pk, a, b) } else { 0.5 * (a + b) });
    }
    let last = edges[n - 1];
    let (s, m) = upper_part(last);
    p.push(s.max(0.0));
    mu.push(if s > 0.0 { (m / s).max(last) } else { last });
    Cells { p, mu }
}

/// Exchange of the supremum `(e^{beta X_n} - e^{Xbar_n})_+` from `(0, 0)` for `n = 1, 2`,
/// summing over cells of spacing about `h` near the origin; each cell sits at its conditional mean.
pub fn exchange_two_steps(law: &StepLaw<'_>, beta: f64, h: f64) -> Result<(f64, f64)> {
    if !(beta > 1.0) || !(h > 0.0) {
        return Err(Error::InvalidRequest("exchange oracle needs beta > 1 and h > 0".into()));
    }
    let edges = graded_edges(h, 0.05, 3.0, 20.0);
    let c = cells(law, &edges);
    let f = |y1: f64, y2: f64| {
        let s = y1 + y2;
        let m = 0.0f64.max(y1).max(s);
        ((beta * s).exp() - m.exp()).max(0.0)
    };
    let v1: f64 = c.p.iter().zip(&c.mu).map(|(p, &y)| p * f(0.0, y)).sum();
    let mut v2 = 0.0;
    for (&p1, &y1) in c.p.iter().zip(&c.mu) {
        if p1 < 1e-20 {
            continue;
        }
        let floor = (-y1).max(-(1.0 - 1.0 / beta) * y1);
        let start = c.mu.partition_point(|&y| y <= floor);
        let inner: f64 = c.p[start..].iter().zip(&c.mu[start..]).map(|(p2, &y2)| p2 * f(y1, y2)).sum();
        v2 += p1 * inner;
    }
    Ok((v1, v2))
}
