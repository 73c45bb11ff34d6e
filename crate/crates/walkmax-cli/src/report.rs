//! Result rows, their CSV/JSON encodings, and exit codes.

use serde::Serialize;
use walkmax::engine::{Request, RequestResult};

pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CERTIFICATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub const HEADER: [&str; 12] =
    ["payoff", "a1|h|beta", "a2", "x1", "x2", "value", "imag_residual", "mode", "M0", "N_plus", "N_minus", "millis"];

/// Exit code for a library error.
pub fn exit_code(e: &walkmax::Error) -> i32 {
    use walkmax::Error::*;
    if e.is_certification() {
        return EXIT_CERTIFICATION;
    }
    match e {
        InvalidModel(_) | InvalidRequest(_) | InvalidTolerance { .. } | NonIntegralSteps { .. } | InvalidOrder { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

pub fn kind(code: i32) -> &'static str {
    match code {
        EXIT_CONFIG => "config",
        EXIT_CERTIFICATION => "certification",
        EXIT_NUMERICAL => "numerical",
        _ => "failure",
    }
}

/// A failed command: exit code plus a record printed as one JSON line on stderr.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub requests: Vec<RequestFailure>,
}

#[derive(Debug, Serialize)]
pub struct RequestFailure {
    pub index: usize,
    pub error: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { error: kind(code), exit_code: code, message: message.into(), requests: Vec::new() }
    }
}

impl From<walkmax::Error> for Failure {
    fn from(e: walkmax::Error) -> Self {
        Failure::new(exit_code(&e), e.to_string())
    }
}

impl From<crate::config::ConfigError> for Failure {
    fn from(e: crate::config::ConfigError) -> Self {
        match e {
            crate::config::ConfigError::Model(m) => m.into(),
            other => Failure::new(EXIT_CONFIG, other.to_string()),
        }
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub payoff: &'static str,
    /// `a1` for cpdf, `h` for barrier digitals, `beta` for exchange.
    #[serde(rename = "a1|h|beta")]
    pub a1_h_beta: Option<f64>,
    /// `a2` for cpdf and no-touch, `a1` for barrier digitals.
    pub a2: Option<f64>,
    pub x1: f64,
    pub x2: Option<f64>,
    pub value: Option<f64>,
    pub imag_residual: f64,
    pub mode: String,
    #[serde(rename = "M0")]
    pub m0: usize,
    #[serde(rename = "N_plus")]
    pub n_plus: usize,
    #[serde(rename = "N_minus")]
    pub n_minus: usize,
    pub millis: f64,
}

impl Row {
    pub fn new(r: &RequestResult, timings: bool) -> Self {
        let (first, second, x1, x2) = match r.request {
            Request::Cpdf(c) => (Some(c.a1), Some(c.a2), c.x1, Some(c.x2)),
            Request::NoTouch { a2, x1 } => (None, Some(a2), x1, None),
            Request::BarrierDigital { h, a1, x } => (Some(h), Some(a1), x, None),
            Request::Exchange(e) => (Some(e.beta), None, e.x1, Some(e.x2)),
        };
        let d = &r.diagnostics;
        Row {
            payoff: r.request.payoff_name(),
            a1_h_beta: first,
            a2: second,
            x1,
            x2,
            value: r.value.as_ref().ok().copied(),
            imag_residual: d.imag_residual,
            mode: d.mode.to_string(),
            m0: d.m0,
            n_plus: d.n_plus,
            n_minus: d.n_minus,
            millis: if timings { d.millis } else { 0.0 },
        }
    }

    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        vec![
            self.payoff.to_string(),
            opt(self.a1_h_beta),
            opt(self.a2),
            fmt17(self.x1),
            opt(self.x2),
            opt(self.value),
            fmt17(self.imag_residual),
            self.mode.clone(),
            self.m0.to_string(),
            self.n_plus.to_string(),
            self.n_minus.to_string(),
            fmt17(self.millis),
        ]
    }
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[Row]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: std::io::Write>(mut out: W, rows: &[Row]) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)
}
