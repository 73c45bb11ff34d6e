//! Characteristic exponents of the driving walk.
//!
//! The per-step characteristic function is `Phi(xi) = E exp(i xi Y) = exp(-dt psi(xi))`.
//! Only KoBoL ships. Everything downstream talks to [`StepModel`].

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `ln(1 + z)`, accurate for small `|z|`.
pub fn clog1p(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let s = x * (2.0 + x) + y * y;
    Complex64::new(0.5 * s.ln_1p(), y.atan2(1.0 + x))
}

/// `exp(z) - 1`, accurate for small `|z|`.
pub fn cexpm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let em1 = z.re.exp_m1();
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

/// Strip and cone of analyticity of `Phi`, plus its decay along the cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticityInfo {
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub decay_order: f64,
    pub decay_coeff: f64,
    pub drift: f64,
}

impl AnalyticityInfo {
    /// A cone that is one-sided (drift case): the Z-contour cannot be deformed.
    pub fn one_sided(&self) -> bool {
        self.gamma_minus == 0.0 || self.gamma_plus == 0.0
    }
}

/// What the factorization and valuation code needs from a model.
pub trait StepModel: Send + Sync {
    fn psi(&self, xi: Complex64) -> Result<Complex64>;
    fn dt(&self) -> f64;
    fn analyticity(&self) -> AnalyticityInfo;

    fn phi(&self, xi: Complex64) -> Result<Complex64> {
        Ok((-self.psi(xi)? * self.dt()).exp())
    }

    /// `1 - Phi(xi)` without cancellation near `xi = 0`.
    fn one_minus_phi(&self, xi: Complex64) -> Result<Complex64> {
        Ok(-cexpm1(-self.psi(xi)? * self.dt()))
    }

    /// `E Y` for one step.
    fn step_mean(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KoBoLModel {
    pub nu: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub c_intensity: f64,
    pub dt: f64,
}

pub fn gamma_fn(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `c` such that `psi''(0) = m2`.
pub fn calibrate_c(nu: f64, lambda_plus: f64, lambda_minus: f64, m2: f64) -> Result<f64> {
    check_params(nu, lambda_plus, lambda_minus)?;
    if !(m2 > 0.0) {
        return Err(Error::InvalidModel(format!("m2 = {m2} must be positive")));
    }
    let s = lambda_plus.powf(nu - 2.0) + (-lambda_minus).powf(nu - 2.0);
    Ok(m2 / (gamma_fn(2.0 - nu) * s))
}

fn check_params(nu: f64, lambda_plus: f64, lambda_minus: f64) -> Result<()> {
    if !(nu > 0.0 && nu <= 2.0) || nu == 1.0 {
        return Err(Error::InvalidModel(format!("order nu = {nu} must lie in (0, 2] and differ from 1")));
    }
    if !(lambda_minus < 0.0 && 0.0 < lambda_plus) {
        return Err(Error::InvalidModel(format!(
            "need lambda_minus < 0 < lambda_plus, got {lambda_minus}, {lambda_plus}"
        )));
    }
    Ok(())
}

impl KoBoLModel {
    pub fn new(nu: f64, lambda_plus: f64, lambda_minus: f64, c_intensity: f64, dt: f64) -> Result<Self> {
        check_params(nu, lambda_plus, lambda_minus)?;
        if !(c_intensity > 0.0) || !c_intensity.is_finite() {
            return Err(Error::InvalidModel(format!("intensity c = {c_intensity} must be positive")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidModel(format!("monitoring interval {dt} must be positive")));
        }
        Ok(KoBoLModel { nu, lambda_plus, lambda_minus, c_intensity, dt })
    }

    pub fn with_m2(nu: f64, lambda_plus: f64, lambda_minus: f64, m2: f64, dt: f64) -> Result<Self> {
        let c = calibrate_c(nu, lambda_plus, lambda_minus, m2)?;
        Self::new(nu, lambda_plus, lambda_minus, c, dt)
    }

    /// `c Gamma(-nu)`, written through `Gamma(2 - nu)` to stay finite near integers.
    pub fn c_gamma(&self) -> f64 {
        self.c_intensity * gamma_fn(2.0 - self.nu) / (self.nu * (self.nu - 1.0))
    }

    /// `psi''(0)`.
    pub fn m2(&self) -> f64 {
        let s = self.lambda_plus.powf(self.nu - 2.0) + (-self.lambda_minus).powf(self.nu - 2.0);
        self.c_intensity * gamma_fn(2.0 - self.nu) * s
    }

    /// Half-angle of the cone where `Re psi` grows like `|xi|^nu`.
    pub fn cone_half_angle(&self) -> f64 {
        FRAC_PI_2.min(PI / (2.0 * self.nu))
    }
}

fn on_cut(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= -1.0
}

impl StepModel for KoBoLModel {
    fn psi(&self, xi: Complex64) -> Result<Complex64> {
        let lp = self.lambda_plus;
        let lm = -self.lambda_minus;
        let z1 = I * xi / lp;
        let z2 = -I * xi / lm;
        if on_cut(z1) {
            return Err(Error::BranchCut { arg: Complex64::new(lp, 0.0) + I * xi });
        }
        if on_cut(z2) {
            return Err(Error::BranchCut { arg: Complex64::new(lm, 0.0) - I * xi });
        }
        let nu = self.nu;
        let t1 = cexpm1(clog1p(z1) * nu) * lp.powf(nu);
        let t2 = cexpm1(clog1p(z2) * nu) * lm.powf(nu);
        Ok(-(t1 + t2) * self.c_gamma())
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn analyticity(&self) -> AnalyticityInfo {
        let g = self.cone_half_angle();
        let coeff = (2.0 * self.c_gamma() * (PI * self.nu / 2.0).cos()).abs() * self.dt;
        AnalyticityInfo {
            mu_minus: self.lambda_minus,
            mu_plus: self.lambda_plus,
            gamma_minus: -g,
            gamma_plus: g,
            decay_order: self.nu,
            decay_coeff: coeff,
            drift: 0.0,
        }
    }

    fn step_mean(&self) -> f64 {
        let nu = self.nu;
        self.dt
            * self.c_gamma()
            * nu
            * (self.lambda_plus.powf(nu - 1.0) - (-self.lambda_minus).powf(nu - 1.0))
    }
}

/// Strip `[mu_-, mu_+]` with `Re(1 - q Phi) >= margin > 0` for all `|q| <= q_max`.
///
/// Shrinks from the full strip of the model. On each candidate strip `Phi` is
/// sampled on both boundary lines and the imaginary axis; the margin is
/// `1 - q_max * max |Phi|`.
pub fn strip_bounds(model: &dyn StepModel, q_max: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..1.0).contains(&q_max) {
        return Err(Error::StripNotFound { q_max });
    }
    let info = model.analyticity();
    let xs: Vec<f64> = std::iter::once(0.0)
        .chain((0..=160).map(|k| 10f64.powf(-4.0 + k as f64 * 0.05)))
        .collect();
    let max_abs = |mu: f64| -> Result<f64> {
        let mut m: f64 = 0.0;
        for &x in &xs {
            for s in [1.0, -1.0] {
                let v = model.phi(Complex64::new(s * x, mu))?.norm();
                m = m.max(v);
            }
        }
        Ok(m)
    };
    let mut shrink = 1.0 - 1e-6;
    for _ in 0..60 {
        let lo = info.mu_minus * shrink;
        let hi = info.mu_plus * shrink;
        let mut worst = max_abs(lo)?.max(max_abs(hi)?);
        for k in 1..8 {
            let mu = lo + (hi - lo) * k as f64 / 8.0;
            worst = worst.max(model.phi(Complex64::new(0.0, mu))?.norm());
        }
        let margin = 1.0 - q_max * worst;
        if margin > 0.0 {
            return Ok((lo, hi, margin));
        }
        shrink *= 0.7;
    }
    Err(Error::StripNotFound { q_max })
}
