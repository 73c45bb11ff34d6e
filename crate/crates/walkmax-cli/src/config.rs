//! Run configuration: TOML with `model`, `run`, `method` and `output` sections.
//!
//! ```toml
//! [model]
//! nu = 0.2
//! lambda_plus = 1.0
//! lambda_minus = -2.0
//! m2 = 0.1
//! dt = 0.003968253968253968
//!
//! [run]
//! maturity_years = 0.25
//! payoff = "cpdf"
//! a1 = [-0.075, -0.05]
//! a2 = [0.025, 0.1]
//!
//! [method]
//! mode = "auto"
//! tol = 1e-12
//! ```
//!
//! Request lists per payoff: `cpdf` takes every pair of `a2` x `a1`,
//! `no_touch` one request per `a2`, `barrier_digital` every pair of
//! `h` x `a1` (started at `x1`), `exchange` one request per `beta`.

use serde::{Deserialize, Serialize};
use walkmax::engine::{steps_for, MethodConfig, ModeChoice, Request};
use walkmax::models::KoBoLModel;
use walkmax::valuation::{CpdfRequest, ExchangeRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub run: RunSection,
    #[serde(default)]
    pub method: MethodSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub nu: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_intensity: Option<f64>,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payoff {
    Cpdf,
    NoTouch,
    BarrierDigital,
    Exchange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub maturity_years: f64,
    pub payoff: Payoff,
    #[serde(default)]
    pub x1: f64,
    #[serde(default)]
    pub x2: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a1: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a2: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Auto,
    Sinh,
    Trapezoid,
}

impl From<ModeName> for ModeChoice {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Auto => ModeChoice::Auto,
            ModeName::Sinh => ModeChoice::Sinh,
            ModeName::Trapezoid => ModeChoice::Trapezoid,
        }
    }
}

fn default_tol() -> f64 {
    walkmax::engine::DEFAULT_TOL
}

fn default_multiplier() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_plus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_minus: Option<usize>,
    #[serde(default = "default_multiplier")]
    pub trapezoid_multiplier: f64,
}

impl Default for MethodSection {
    fn default() -> Self {
        MethodSection {
            mode: ModeName::Auto,
            tol: default_tol(),
            m0: None,
            n_plus: None,
            n_minus: None,
            trapezoid_multiplier: default_multiplier(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
    /// Off by default so that output files are reproducible byte for byte.
    #[serde(default)]
    pub timings: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] walkmax::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form; `parse(to_canonical(c)) == c`.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match (self.model.m2, self.model.c_intensity) {
            (Some(_), Some(_)) => return invalid("give exactly one of model.m2 and model.c_intensity, not both"),
            (None, None) => return invalid("one of model.m2 and model.c_intensity is required"),
            _ => {}
        }
        let tol = self.method.tol;
        if !(1e-14..=1e-2).contains(&tol) {
            return invalid(format!("method.tol = {tol} is outside [1e-14, 1e-2]"));
        }
        if self.method.trapezoid_multiplier.is_nan() || self.method.trapezoid_multiplier <= 0.0 {
            return invalid("method.trapezoid_multiplier must be positive");
        }
        let r = &self.run;
        let (used, unused): (&[&str], [(&str, bool); 4]) = match r.payoff {
            Payoff::Cpdf => (&["a1", "a2"], [("a1", false), ("a2", false), ("h", !r.h.is_empty()), ("beta", !r.beta.is_empty())]),
            Payoff::NoTouch => (&["a2"], [("a1", !r.a1.is_empty()), ("a2", false), ("h", !r.h.is_empty()), ("beta", !r.beta.is_empty())]),
            Payoff::BarrierDigital => (&["h", "a1"], [("a1", false), ("a2", !r.a2.is_empty()), ("h", false), ("beta", !r.beta.is_empty())]),
            Payoff::Exchange => (&["beta"], [("a1", !r.a1.is_empty()), ("a2", !r.a2.is_empty()), ("h", !r.h.is_empty()), ("beta", false)]),
        };
        if let Some((key, _)) = unused.iter().find(|(_, set)| *set) {
            return invalid(format!("run.{key} is not used by this payoff (expected {})", used.join(", ")));
        }
        self.model()?;
        self.n_steps()?;
        Ok(())
    }

    pub fn model(&self) -> Result<KoBoLModel, ConfigError> {
        let m = &self.model;
        Ok(match (m.m2, m.c_intensity) {
            (Some(m2), None) => KoBoLModel::with_m2(m.nu, m.lambda_plus, m.lambda_minus, m2, m.dt)?,
            (None, Some(c)) => KoBoLModel::new(m.nu, m.lambda_plus, m.lambda_minus, c, m.dt)?,
            _ => return invalid("give exactly one of model.m2 and model.c_intensity"),
        })
    }

    pub fn n_steps(&self) -> Result<usize, ConfigError> {
        Ok(steps_for(self.run.maturity_years, self.model.dt)?)
    }

    pub fn method(&self) -> MethodConfig {
        let m = &self.method;
        MethodConfig {
            mode: m.mode.into(),
            tol: m.tol,
            m0: m.m0,
            n_plus: m.n_plus,
            n_minus: m.n_minus,
            trapezoid_multiplier: m.trapezoid_multiplier,
            ..MethodConfig::default()
        }
    }

    /// Requests in output order. Malformed ones are rejected here.
    pub fn requests(&self) -> Result<Vec<Request>, ConfigError> {
        let r = &self.run;
        let mut out = Vec::new();
        match r.payoff {
            Payoff::Cpdf => {
                for &a2 in &r.a2 {
                    for &a1 in &r.a1 {
                        out.push(Request::Cpdf(CpdfRequest::new(a1, a2, r.x1, r.x2)?));
                    }
                }
            }
            Payoff::NoTouch => out.extend(r.a2.iter().map(|&a2| Request::NoTouch { a2, x1: r.x1 })),
            Payoff::BarrierDigital => {
                for &h in &r.h {
                    for &a1 in &r.a1 {
                        out.push(Request::BarrierDigital { h, a1, x: r.x1 });
                    }
                }
            }
            Payoff::Exchange => {
                for &beta in &r.beta {
                    out.push(Request::Exchange(ExchangeRequest::new(beta, r.x1, r.x2)?));
                }
            }
        }
        Ok(out)
    }
}
