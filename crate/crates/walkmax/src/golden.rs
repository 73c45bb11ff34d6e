//! Benchmark scenarios and their reference joint cpdf values.
//!
//! Values are kept as the decimal strings printed in the published tables.

use crate::error::{Error, Result};
use crate::models::KoBoLModel;

pub const A1_GRID: [f64; 5] = [-0.075, -0.05, -0.025, 0.0, 0.025];
pub const A2_GRID: [f64; 5] = [0.025, 0.05, 0.075, 0.1, 0.175];
pub const SCENARIO_IDS: [&str; 4] = ["t025_nu02", "t5_nu02", "t15_nu02", "t15_nu12"];

pub const M2: f64 = 0.1;
pub const LAMBDA_PLUS: f64 = 1.0;
pub const LAMBDA_MINUS: f64 = -2.0;
pub const DT: f64 = 1.0 / 252.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub id: &'static str,
    pub nu: f64,
    pub maturity: f64,
    /// Rows follow `A2_GRID`, columns `A1_GRID`.
    pub table: &'static [[&'static str; 5]; 5],
    /// Reported term counts: sinh `M0`, trapezoid `M0`, contour `N`.
    pub reported_sinh_m0: usize,
    pub reported_trapezoid_m0: usize,
    pub reported_n: usize,
}

impl Scenario {
    pub fn model(&self) -> Result<KoBoLModel> {
        KoBoLModel::with_m2(self.nu, LAMBDA_PLUS, LAMBDA_MINUS, M2, DT)
    }

    pub fn n_steps(&self) -> usize {
        (self.maturity / DT).round() as usize
    }

    /// `(a1, a2, reference)` in row-major order.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(25);
        for (r, &a2) in A2_GRID.iter().enumerate() {
            for (c, &a1) in A1_GRID.iter().enumerate() {
                out.push((a1, a2, self.table[r][c].parse().expect("table entry")));
            }
        }
        out
    }
}

pub fn scenario(id: &str) -> Result<Scenario> {
    SCENARIOS
        .iter()
        .find(|s| s.id == id)
        .copied()
        .ok_or_else(|| Error::InvalidRequest(format!("unknown scenario '{id}', expected one of {}", SCENARIO_IDS.join(", "))))
}

pub const SCENARIOS: [Scenario; 4] = [
    Scenario { id: "t025_nu02", nu: 0.2, maturity: 0.25, table: &T025_NU02, reported_sinh_m0: 16, reported_trapezoid_m0: 99, reported_n: 124 },
    Scenario { id: "t5_nu02", nu: 0.2, maturity: 5.0, table: &T5_NU02, reported_sinh_m0: 19, reported_trapezoid_m0: 2844, reported_n: 137 },
    Scenario { id: "t15_nu02", nu: 0.2, maturity: 15.0, table: &T15_NU02, reported_sinh_m0: 65, reported_trapezoid_m0: 8538, reported_n: 144 },
    Scenario { id: "t15_nu12", nu: 1.2, maturity: 15.0, table: &T15_NU12, reported_sinh_m0: 28, reported_trapezoid_m0: 8538, reported_n: 183 },
];

const T025_NU02: [[&str; 5]; 5] = [
    ["0.052873910286366", "0.0650091858382787", "0.0879288341672031", "0.506532201212114", "0.923468308358369"],
    ["0.0534088530783456", "0.0656338924464693", "0.0886847807216264", "0.507515090989102", "0.925299214939269"],
    ["0.0536456853005228", "0.0659043877286091", "0.0890004474115774", "0.507896616129521", "0.925793930891586"],
    ["0.0537794257554031", "0.0660548821001662", "0.0891723010284717", "0.508097111907463", "0.926036138000489"],
    ["0.0539628421387795", "0.0662578446892915", "0.0893989471374944", "0.508353292242695", "0.926330710592022"],
];

const T5_NU02: [[&str; 5]; 5] = [
    ["0.322715785176063", "0.341705312612668", "0.362654563514927", "0.385503065295135", "0.402853073943893"],
    ["0.36823129960626", "0.390755656346763", "0.415922513339139", "0.444104383367338", "0.469731888892867"],
    ["0.396209256972821", "0.420842816392821", "0.448475971976962", "0.479643744322071", "0.509135503443898"],
    ["0.415752842072438", "0.44180038793114", "0.471059131572705", "0.504139671693882", "0.535967402412399"],
    ["0.450253847495689", "0.478623894580305", "0.510496476100609", "0.546559667768138", "0.581857694138651"],
];

const T15_NU02: [[&str; 5]; 5] = [
    ["0.273003522656352", "0.275060714621777", "0.276863384237128", "0.278361438403706", "0.279413583881186"],
    ["0.325601636899453", "0.328403204232286", "0.330932690547093", "0.333148630324321", "0.334989330744591"],
    ["0.364467787376584", "0.367935193185576", "0.371127846709011", "0.37400815325999", "0.376529331567823"],
    ["0.396164068347951", "0.400244732717707", "0.404054649236343", "0.407558402431724", "0.410715394955968"],
    ["0.467032161225892", "0.472690792930844", "0.47810575026395", "0.483245070441871", "0.488075079451549"],
];

const T15_NU12: [[&str; 5]; 5] = [
    ["0.08750889022257", "0.0876433202115771", "0.0877488959582886", "0.0878234438630917", "0.0878604203790796"],
    ["0.133430426595114", "0.133678790617469", "0.133884632610215", "0.134046292415956", "0.13416044157208"],
    ["0.172212077596399", "0.172587459419214", "0.172909022548126", "0.173175531405955", "0.173384836452991"],
    ["0.206872444504732", "0.207388307897551", "0.207840301897249", "0.208227492747064", "0.208548393051015"],
    ["0.295589651996839", "0.296599359388506", "0.297519605986825", "0.298349844042413", "0.299089406243993"],
];
