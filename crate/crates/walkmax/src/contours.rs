//! Conformal maps and the simplified trapezoid rule.
//!
//! Two sinh maps are used. In the Fourier plane `xi(y) = shift + b sinh(i omega + y)`
//! with `shift = i omega_1`; in the Z plane `q(y) = sigma + i b sinh(i omega + y)`.
//! Both are entire in `y`, so a horizontal strip `|Im y| < d` maps onto a
//! curvilinear strip and the plain trapezoid rule in `y` converges like
//! `exp(-2 pi d / step)`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which of the two parameterizations a [`SinhMap`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    /// `shift + b sinh(i omega + y)`
    Fourier,
    /// `shift + i b sinh(i omega + y)`
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinhMap {
    pub shift: Complex64,
    pub b: f64,
    pub omega: f64,
    pub plane: Plane,
}

impl SinhMap {
    pub fn new(shift: Complex64, b: f64, omega: f64, plane: Plane) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidRequest(format!("sinh map scale b = {b} must be positive")));
        }
        if !(omega.abs() < FRAC_PI_2) {
            return Err(Error::InvalidRequest(format!("sinh map angle {omega} outside (-pi/2, pi/2)")));
        }
        Ok(SinhMap { shift, b, omega, plane })
    }

    /// Fourier-plane map whose image passes through `i * apex` at `y = 0`.
    pub fn fourier_through(apex: f64, b: f64, omega: f64) -> Result<Self> {
        let omega_1 = apex - b * omega.sin();
        Self::new(Complex64::new(0.0, omega_1), b, omega, Plane::Fourier)
    }

    /// `Im xi(0)` for the Fourier variant, `Re q(0)` for the Z variant.
    pub fn apex(&self) -> f64 {
        match self.plane {
            Plane::Fourier => self.shift.im + self.b * self.omega.sin(),
            Plane::Z => self.shift.re - self.b * self.omega.sin(),
        }
    }

    pub fn eval(&self, y: Complex64) -> Complex64 {
        sinh_eval(self, y)
    }

    pub fn deriv(&self, y: Complex64) -> Complex64 {
        sinh_deriv(self, y)
    }

    /// Same map with the angle moved to `omega + s`; the image of `Im y = s`.
    pub fn tilted(&self, s: f64) -> SinhMap {
        SinhMap { omega: self.omega + s, ..*self }
    }
}

pub fn sinh_eval(map: &SinhMap, y: Complex64) -> Complex64 {
    let s = (I * map.omega + y).sinh() * map.b;
    match map.plane {
        Plane::Fourier => map.shift + s,
        Plane::Z => map.shift + I * s,
    }
}

pub fn sinh_deriv(map: &SinhMap, y: Complex64) -> Complex64 {
    let c = (I * map.omega + y).cosh() * map.b;
    match map.plane {
        Plane::Fourier => c,
        Plane::Z => I * c,
    }
}

/// `(y + i omega) ln^m(a^2 + (y + i omega)^2)`, a slower-growing alternative
/// to the sinh map for one-sided cones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubPolyMap {
    pub omega: f64,
    pub m: u32,
    pub a: f64,
}

impl SubPolyMap {
    pub fn new(omega: f64, m: u32, a: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidRequest("sub-polynomial map needs m >= 1".into()));
        }
        if !(a > omega.abs()) {
            return Err(Error::InvalidRequest(format!("sub-polynomial map needs a > |omega|, got a = {a}")));
        }
        Ok(SubPolyMap { omega, m, a })
    }

    pub fn eval(&self, y: Complex64) -> Result<Complex64> {
        subpoly_eval(self, y)
    }

    pub fn deriv(&self, y: Complex64) -> Result<Complex64> {
        let u = y + I * self.omega;
        let arg = u * u + self.a * self.a;
        check_cut(arg)?;
        let l = arg.ln();
        let m = self.m as i32;
        Ok(l.powi(m) + u * (m as f64) * l.powi(m - 1) * 2.0 * u / arg)
    }
}

fn check_cut(arg: Complex64) -> Result<()> {
    if arg.im == 0.0 && arg.re <= 0.0 {
        return Err(Error::BranchCut { arg });
    }
    Ok(())
}

pub fn subpoly_eval(map: &SubPolyMap, y: Complex64) -> Result<Complex64> {
    let u = y + I * map.omega;
    let arg = u * u + map.a * map.a;
    check_cut(arg)?;
    Ok(u * arg.ln().powi(map.m as i32))
}

/// Uniform grid `y_j = j * step`. In the symmetric form only `j >= 0` is
/// stored and `w_0 = 1/2`; the full sum is then `2 Re` of the half sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapezoidGrid {
    pub step: f64,
    pub half_count: usize,
    pub symmetric: bool,
}

impl TrapezoidGrid {
    pub fn new(step: f64, half_count: usize, symmetric: bool) -> Result<Self> {
        if !(step > 0.0) || half_count < 1 {
            return Err(Error::InvalidRequest(format!(
                "grid needs step > 0 and half_count >= 1, got {step}, {half_count}"
            )));
        }
        Ok(TrapezoidGrid { step, half_count, symmetric })
    }

    /// Nodes with their trapezoid weights (the step is not folded in).
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let n = self.half_count as i64;
        if self.symmetric {
            (0..=n).map(|j| (j as f64 * self.step, if j == 0 { 0.5 } else { 1.0 })).collect()
        } else {
            (-n..=n).map(|j| (j as f64 * self.step, 1.0)).collect()
        }
    }

    pub fn len(&self) -> usize {
        if self.symmetric {
            self.half_count + 1
        } else {
            2 * self.half_count + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Trapezoid sum of `f` over the grid, `step * sum w_j f(y_j)`, with
    /// the symmetric form returning `2 Re` of the half sum.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (y, w) in self.nodes() {
            acc += f(y) * w;
        }
        if self.symmetric {
            Complex64::new(2.0 * acc.re * self.step, 0.0)
        } else {
            acc * self.step
        }
    }
}

/// Step making the discretization bound `exp(-2 pi d/step)` times the Hardy
/// norm estimate equal to `tol`.
pub fn choose_step_from_bound(d: f64, hardy_estimate: f64, tol: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidRequest(format!("strip half-width d = {d} must be positive")));
    }
    if !(tol > 0.0) || tol >= hardy_estimate {
        return Err(Error::InvalidTolerance { tol, hardy: hardy_estimate });
    }
    Ok(2.0 * PI * d / (hardy_estimate / tol).ln())
}

/// Samples of a Fourier-plane sinh contour: points, derivatives, step.
#[derive(Debug, Clone)]
pub struct ContourSamples {
    pub map: SinhMap,
    pub step: f64,
    /// Grid index range is `-half..=half`.
    pub half: usize,
    pub xi: Vec<Complex64>,
    pub der: Vec<Complex64>,
}

impl ContourSamples {
    pub fn new(map: SinhMap, step: f64, half: usize) -> Self {
        let h = half as i64;
        let mut xi = Vec::with_capacity(2 * half + 1);
        let mut der = Vec::with_capacity(2 * half + 1);
        for j in -h..=h {
            let y = Complex64::new(j as f64 * step, 0.0);
            xi.push(map.eval(y));
            der.push(map.deriv(y));
        }
        ContourSamples { map, step, half, xi, der }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn y(&self, idx: usize) -> f64 {
        (idx as f64 - self.half as f64) * self.step
    }

    /// `step/(2 pi) * sum f(xi_j) der_j`, the trapezoid value of
    /// `(1/2 pi) * integral f(xi) dxi` along the contour.
    pub fn integrate<F: FnMut(usize, Complex64) -> Complex64>(&self, mut f: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, (&x, &d)) in self.xi.iter().zip(&self.der).enumerate() {
            acc += f(j, x) * d;
        }
        acc * (self.step / (2.0 * PI))
    }
}
