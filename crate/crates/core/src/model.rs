//! Game parameters, their validation, and the scalar coefficients every
//! downstream formula is built from.

use serde::{Deserialize, Serialize};

use crate::riccati::RiccatiSpec;
use crate::{Error, Result};

/// Constant coefficients of a linear-quadratic extended mean field game.
///
/// Drift: `b1 x + b1_bar μ̄ + b2 α + b2_bar ν̄`, volatility `sigma`.
/// Running cost: `½[q x² + q̄ (x − s μ̄)² + r α² + r̄ (α − s̄ ν̄)²]`.
/// Terminal cost: `½[q_T x² + q̄_T (x − s_T μ̄)²]`.
///
/// The initial law only enters through its mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub b1: f64,
    pub b1_bar: f64,
    pub b2: f64,
    pub b2_bar: f64,
    pub sigma: f64,
    pub q: f64,
    pub q_bar: f64,
    pub s: f64,
    pub r: f64,
    pub r_bar: f64,
    pub s_bar: f64,
    #[serde(rename = "q_T")]
    pub q_t: f64,
    #[serde(rename = "q_bar_T")]
    pub q_bar_t: f64,
    #[serde(rename = "s_T")]
    pub s_t: f64,
    pub xi_mean: f64,
    pub xi_var: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl Default for ModelParams {
    /// Full-interaction reference model: every coefficient 1, all mean
    /// scalings ½, deterministic unit initial condition, unit horizon.
    fn default() -> Self {
        Self {
            b1: 1.0,
            b1_bar: 1.0,
            b2: 1.0,
            b2_bar: 1.0,
            sigma: 1.0,
            q: 1.0,
            q_bar: 1.0,
            s: 0.5,
            r: 1.0,
            r_bar: 1.0,
            s_bar: 0.5,
            q_t: 1.0,
            q_bar_t: 1.0,
            s_t: 0.5,
            xi_mean: 1.0,
            xi_var: 0.0,
            horizon: 1.0,
        }
    }
}

/// JSON keys, in the order the interchange format lists them.
pub const FIELD_NAMES: [&str; 17] = [
    "b1", "b1_bar", "b2", "b2_bar", "sigma", "q", "q_bar", "s", "r", "r_bar", "s_bar", "q_T",
    "q_bar_T", "s_T", "xi_mean", "xi_var", "T",
];

impl ModelParams {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct of f64 always serializes")
    }

    /// Read a field by its JSON key.
    pub fn get(&self, name: &str) -> Result<f64> {
        let mut copy = *self;
        copy.field_mut(name).map(|v| *v)
    }

    /// Overwrite a field by its JSON key.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        *self.field_mut(name)? = value;
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    fn field_mut(&mut self, name: &str) -> Result<&mut f64> {
        Ok(match name {
            "b1" => &mut self.b1,
            "b1_bar" => &mut self.b1_bar,
            "b2" => &mut self.b2,
            "b2_bar" => &mut self.b2_bar,
            "sigma" => &mut self.sigma,
            "q" => &mut self.q,
            "q_bar" => &mut self.q_bar,
            "s" => &mut self.s,
            "r" => &mut self.r,
            "r_bar" => &mut self.r_bar,
            "s_bar" => &mut self.s_bar,
            "q_T" => &mut self.q_t,
            "q_bar_T" => &mut self.q_bar_t,
            "s_T" => &mut self.s_t,
            "xi_mean" => &mut self.xi_mean,
            "xi_var" => &mut self.xi_var,
            "T" => &mut self.horizon,
            other => return Err(Error::UnknownParameter(other.to_string())),
        })
    }

    /// The thirteen game coefficients that must be non-negative.
    fn coefficients(&self) -> [(&'static str, f64); 13] {
        [
            ("b1", self.b1),
            ("b1_bar", self.b1_bar),
            ("b2", self.b2),
            ("b2_bar", self.b2_bar),
            ("q", self.q),
            ("q_bar", self.q_bar),
            ("s", self.s),
            ("r", self.r),
            ("r_bar", self.r_bar),
            ("s_bar", self.s_bar),
            ("q_T", self.q_t),
            ("q_bar_T", self.q_bar_t),
            ("s_T", self.s_t),
        ]
    }
}

/// One named inequality and whether it held.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub ok: bool,
}

impl Check {
    fn positive(name: &str, value: f64) -> Self {
        Self { name: format!("{name} > 0"), value, ok: value > 0.0 }
    }

    fn non_negative(name: &str, value: f64) -> Self {
        Self { name: format!("{name} ≥ 0"), value, ok: value >= 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Basic admissibility: finite values, positive horizon, non-negative
    /// coefficients, volatility and initial variance.
    pub domain: Vec<Check>,
    /// The existence-and-uniqueness block.
    pub theorem1: Vec<Check>,
    /// Extra strictness used by the limit propositions.
    pub assumption1: Vec<Check>,
    pub domain_ok: bool,
    pub theorem1_ok: bool,
    pub assumption1_ok: bool,
    pub violations: Vec<String>,
}

impl ValidationReport {
    /// Solvers require a well-posed model: admissible inputs and the
    /// existence conditions.
    pub fn solvable(&self) -> bool {
        self.domain_ok && self.theorem1_ok
    }

    pub fn require_solvable(&self) -> Result<()> {
        if self.solvable() {
            Ok(())
        } else {
            Err(Error::InvalidModel(self.violations.clone()))
        }
    }
}

/// Check every inequality. Never fails; solvers decide what to require.
pub fn validate(p: &ModelParams) -> ValidationReport {
    let mut domain = vec![Check {
        name: "all parameters finite".into(),
        value: f64::NAN,
        ok: FIELD_NAMES.iter().all(|k| p.get(k).map(f64::is_finite).unwrap_or(false)),
    }];
    domain.push(Check::positive("T", p.horizon));
    domain.push(Check::non_negative("σ", p.sigma));
    domain.push(Check::non_negative("Var(ξ)", p.xi_var));
    domain.extend(p.coefficients().iter().map(|&(n, v)| Check::non_negative(n, v)));

    let theorem1 = vec![
        Check::positive("b2", p.b2),
        Check::positive("b2 + b̄2", p.b2 + p.b2_bar),
        Check::positive("r + r̄", p.r + p.r_bar),
        Check::positive("r + r̄(1−s̄)", p.r + p.r_bar * (1.0 - p.s_bar)),
        Check::positive("r + r̄(1−s̄)²", p.r + p.r_bar * (1.0 - p.s_bar).powi(2)),
        Check::positive("q + q̄", p.q + p.q_bar),
        Check::positive("q + q̄(1−s)", p.q + p.q_bar * (1.0 - p.s)),
        Check::positive("q + q̄(1−s)²", p.q + p.q_bar * (1.0 - p.s).powi(2)),
        Check::non_negative("q_T + q̄_T", p.q_t + p.q_bar_t),
        Check::non_negative("q_T + q̄_T(1−s_T)", p.q_t + p.q_bar_t * (1.0 - p.s_t)),
        Check::non_negative("q_T + q̄_T(1−s_T)²", p.q_t + p.q_bar_t * (1.0 - p.s_t).powi(2)),
    ];
    let theorem1_ok = theorem1.iter().all(|c| c.ok);

    let mut assumption1 = vec![Check::positive("b1", p.b1)];
    if theorem1_ok {
        if let Ok(d) = derive(p) {
            assumption1.push(Check::positive("D^u", d.riccati_u.d));
            assumption1.push(Check::positive("D^w", d.riccati_w.d));
            assumption1.push(Check::positive("D^η", d.riccati_eta.d));
        }
    }
    assumption1.push(Check {
        name: "E(ξ) ≠ 0".into(),
        value: p.xi_mean,
        ok: p.xi_mean != 0.0,
    });
    // Theorem 1 is part of the assumption; the D checks are only
    // meaningful (and only computed) once it holds.
    let assumption1_ok = theorem1_ok && assumption1.len() == 5 && assumption1.iter().all(|c| c.ok);

    let domain_ok = domain.iter().all(|c| c.ok);
    let violations = domain
        .iter()
        .chain(&theorem1)
        .chain(&assumption1)
        .filter(|c| !c.ok)
        .map(|c| c.name.clone())
        .collect();

    ValidationReport {
        domain,
        theorem1,
        assumption1,
        domain_ok,
        theorem1_ok,
        assumption1_ok,
        violations,
    }
}

/// Feedback gains and the three Riccati problems.
///
/// Both optimal controls have the form `α = a Y + b E(Y)` with mean
/// `E(α) = c E(Y)`; the planner and the equilibrium share `a`.
/// `riccati_u` governs `u = λ η̄^MFG`, `riccati_w` governs `w = η̄^MKV`,
/// `riccati_eta` the common slope `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedCoefficients {
    pub lambda: f64,
    pub a: f64,
    pub b_mfg: f64,
    pub c_mfg: f64,
    pub b_mkv: f64,
    pub c_mkv: f64,
    pub riccati_u: RiccatiSpec,
    pub riccati_w: RiccatiSpec,
    pub riccati_eta: RiccatiSpec,
}

impl DerivedCoefficients {
    /// Shared quadratic coefficient of the `u` and `w` equations.
    pub fn b_mean(&self) -> f64 {
        self.riccati_u.b
    }
}

pub fn derive(p: &ModelParams) -> Result<DerivedCoefficients> {
    let r_total = p.r + p.r_bar;
    let r_mfg = p.r + p.r_bar * (1.0 - p.s_bar);
    let r_mkv = p.r + p.r_bar * (1.0 - p.s_bar).powi(2);
    let b2_total = p.b2 + p.b2_bar;
    for (name, v) in [
        ("r + r̄", r_total),
        ("r + r̄(1−s̄)", r_mfg),
        ("r + r̄(1−s̄)²", r_mkv),
        ("b2 + b̄2", b2_total),
    ] {
        if v == 0.0 {
            return Err(Error::ZeroDenominator(name));
        }
    }

    let a = -p.b2 / r_total;
    let b_mfg = -p.r_bar * p.s_bar * p.b2 / (r_total * r_mfg);
    let c_mfg = -p.b2 / r_mfg;
    let b_mkv = -(p.b2_bar - p.r_bar * p.s_bar * (p.s_bar - 2.0) * b2_total / r_mkv) / r_total;
    let c_mkv = -b2_total / r_mkv;
    let lambda = p.b2 / b2_total * (r_mkv / r_mfg);

    let b_mean = b2_total * b2_total / r_mkv;
    let riccati_u = RiccatiSpec {
        a: -(p.b1 + p.b1_bar / 2.0),
        b: b_mean,
        c: lambda * (p.q + p.q_bar * (1.0 - p.s)),
        d: lambda * (p.q_t + p.q_bar_t * (1.0 - p.s_t)),
    };
    let riccati_w = RiccatiSpec {
        a: -(p.b1 + p.b1_bar),
        b: b_mean,
        c: p.q + p.q_bar * (1.0 - p.s).powi(2),
        d: p.q_t + p.q_bar_t * (1.0 - p.s_t).powi(2),
    };
    let riccati_eta = RiccatiSpec {
        a: -p.b1,
        b: p.b2 * p.b2 / r_total,
        c: p.q + p.q_bar,
        d: p.q_t + p.q_bar_t,
    };

    Ok(DerivedCoefficients {
        lambda,
        a,
        b_mfg,
        c_mfg,
        b_mkv,
        c_mkv,
        riccati_u,
        riccati_w,
        riccati_eta,
    })
}
