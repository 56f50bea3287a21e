//! Constant-coefficient scalar Riccati terminal-value problems
//!
//! ```text
//! ρ'(t) − B ρ(t)² − 2 A ρ(t) + C = 0,    ρ(T) = D
//! ```
//!
//! solved in closed form. With `B ≠ 0, BD ≥ 0, BC > 0` the solution is
//!
//! ```text
//!          C (1 − E) + D (δ⁺ − δ⁻ E)
//! ρ(t) = ─────────────────────────────,   E = e^{−(δ⁺ − δ⁻)(T − t)},
//!         B D (1 − E) + δ⁺ E − δ⁻
//! ```
//!
//! with `δ± = −A ± √(A² + BC)`. When `B` is negligible the equation is
//! linear and the limiting exponential (or affine, if `A` vanishes too)
//! solution is used instead.

use serde::Serialize;

use crate::numeric::simpson;
use crate::{Error, Result};

/// Relative size below which `B` (and then `A`) are treated as zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Coefficients of `ρ' − Bρ² − 2Aρ + C = 0`, `ρ(T) = D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RiccatiSpec {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// `B D² + 2 A D − C`: the slope of the solution at the terminal time.
    /// Its sign fixes the direction of monotonicity on the whole interval
    /// and it vanishes exactly when `D` is a stationary point.
    pub fn terminal_drift(&self) -> f64 {
        self.b * self.d * self.d + 2.0 * self.a * self.d - self.c
    }

    /// Right-hand side `ρ' = Bρ² + 2Aρ − C`.
    pub fn rhs(&self, rho: f64) -> f64 {
        self.b * rho * rho + 2.0 * self.a * rho - self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// Genuine Riccati equation.
    Full,
    /// `B ≈ 0`, `A ≠ 0`: linear with exponential solution.
    LinearA,
    /// `B ≈ 0`, `A ≈ 0`: `ρ' = −C`.
    Linear0,
}

/// Closed-form evaluator for one Riccati solution on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiEval {
    spec: RiccatiSpec,
    horizon: f64,
    regime: Regime,
    delta_plus: f64,
    delta_minus: f64,
    /// `δ⁺ − δ⁻ = 2√(A² + BC)`, kept separately to avoid cancellation.
    gap: f64,
}

pub fn solve(spec: RiccatiSpec, horizon: f64) -> Result<RiccatiEval> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::BadGrid(format!("horizon must be positive, got {horizon}")));
    }
    let RiccatiSpec { a, b, c, d } = spec;
    if ![a, b, c, d].iter().all(|v| v.is_finite()) {
        return Err(Error::IllPosed(format!("non-finite coefficients {spec:?}")));
    }

    let b_scale = 1f64.max(a.abs()).max(c.abs()).max(d.abs());
    if b.abs() < DEGENERACY_THRESHOLD * b_scale {
        let a_scale = 1f64.max(c.abs()).max(d.abs());
        let regime = if a.abs() < DEGENERACY_THRESHOLD * a_scale {
            Regime::Linear0
        } else {
            Regime::LinearA
        };
        return Ok(RiccatiEval {
            spec,
            horizon,
            regime,
            delta_plus: f64::NAN,
            delta_minus: f64::NAN,
            gap: f64::NAN,
        });
    }

    if b * d < 0.0 || b * c <= 0.0 {
        return Err(Error::IllPosed(format!(
            "need BD ≥ 0 and BC > 0, got BD = {}, BC = {}",
            b * d,
            b * c
        )));
    }

    let root = (a * a + b * c).sqrt();
    // δ⁺δ⁻ = −BC: take the root without cancellation, recover the other
    // from the product.
    let (delta_plus, delta_minus) = if a <= 0.0 {
        let dp = -a + root;
        (dp, -b * c / dp)
    } else {
        let dm = -a - root;
        (-b * c / dm, dm)
    };

    Ok(RiccatiEval {
        spec,
        horizon,
        regime: Regime::Full,
        delta_plus,
        delta_minus,
        gap: 2.0 * root,
    })
}

impl RiccatiEval {
    pub fn spec(&self) -> RiccatiSpec {
        self.spec
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Characteristic roots `(δ⁺, δ⁻)`; `None` outside the full regime.
    pub fn roots(&self) -> Option<(f64, f64)> {
        (self.regime == Regime::Full).then_some((self.delta_plus, self.delta_minus))
    }

    fn check(&self, t: f64) -> Result<()> {
        if (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { t, horizon: self.horizon })
        }
    }

    /// `(1 − E, E)` and the denominator of the full-regime formula.
    fn full_parts(&self, t: f64) -> (f64, f64, f64) {
        let x = -self.gap * (self.horizon - t);
        let e = x.exp();
        let one_minus_e = -x.exp_m1();
        let den = self.spec.b * self.spec.d * one_minus_e + self.delta_plus * e - self.delta_minus;
        (one_minus_e, e, den)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.value(t))
    }

    /// Unchecked evaluation for callers that already hold a valid `t`.
    pub(crate) fn value(&self, t: f64) -> f64 {
        let RiccatiSpec { a, c, d, .. } = self.spec;
        let tau = self.horizon - t;
        match self.regime {
            Regime::Full => {
                // Same quotient as the textbook form, rearranged as
                // D − (BD² + 2AD − C)(1 − E)/den: exact at t = T and for
                // stationary terminal values.
                let (one_minus_e, _, den) = self.full_parts(t);
                d - self.spec.terminal_drift() * one_minus_e / den
            }
            Regime::LinearA => {
                let x = -2.0 * a * tau;
                d * x.exp() - c * x.exp_m1() / (2.0 * a)
            }
            Regime::Linear0 => d + c * tau,
        }
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let RiccatiSpec { a, c, d, .. } = self.spec;
        Ok(match self.regime {
            Regime::Full => {
                let (_, e, den) = self.full_parts(t);
                self.spec.terminal_drift() * self.gap * self.gap * e / (den * den)
            }
            Regime::LinearA => (2.0 * a * d - c) * (-2.0 * a * (self.horizon - t)).exp(),
            Regime::Linear0 => -c,
        })
    }

    /// Exact `∫_0^t B ρ(s) ds`.
    ///
    /// In the full regime `Bρ = δ⁺ − (ln den)'`, so the integral is
    /// `δ⁺ t − ln(den(t)/den(0))` with no quadrature error however sharp
    /// the terminal layer is.
    pub fn b_integral(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.b_integral_value(t))
    }

    pub(crate) fn b_integral_value(&self, t: f64) -> f64 {
        let RiccatiSpec { a, b, c, d } = self.spec;
        let big_t = self.horizon;
        match self.regime {
            Regime::Full => {
                let (_, _, den_t) = self.full_parts(t);
                let (_, _, den_0) = self.full_parts(0.0);
                self.delta_plus * t - (den_t / den_0).ln()
            }
            Regime::LinearA => {
                // F(τ) = ∫_0^τ e^{−2Aσ} dσ
                let f = |tau: f64| -(-2.0 * a * tau).exp_m1() / (2.0 * a);
                let df = f(big_t) - f(big_t - t);
                b * (d * df - c / (2.0 * a) * (df - t))
            }
            Regime::Linear0 => b * (d * t + 0.5 * c * t * (2.0 * big_t - t)),
        }
    }

    /// Fastest rate at which the solution moves: `2√(A² + BC)` away from
    /// `T`, `|B D|` for the initial hyperbolic drop of a terminal value far
    /// above the stationary point, `2|A|` in the linear regimes.
    pub fn stiffness(&self) -> f64 {
        let RiccatiSpec { a, b, d, .. } = self.spec;
        match self.regime {
            Regime::Full => self.gap.max((b * d).abs()),
            Regime::LinearA => 2.0 * a.abs(),
            Regime::Linear0 => 0.0,
        }
    }

    /// Composite Simpson approximation of `∫_{t0}^{t1} ρ` on `n` points.
    pub fn integrate(&self, t0: f64, t1: f64, n: usize) -> Result<f64> {
        self.check(t0)?;
        self.check(t1)?;
        if t1 < t0 {
            return Err(Error::OutOfDomain { t: t1, horizon: self.horizon });
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::BadGrid(format!("need an odd point count >= 3, got {n}")));
        }
        let h = (t1 - t0) / (n - 1) as f64;
        let values: Vec<f64> = (0..n)
            .map(|k| self.value((t0 + k as f64 * h).min(t1)))
            .collect();
        simpson(&values, h)
    }

    /// Values on `n` uniformly spaced points of `[0, T]`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        let h = self.horizon / (n - 1) as f64;
        (0..n)
            .map(|k| if k + 1 == n { self.horizon } else { k as f64 * h })
            .map(|t| self.value(t))
            .collect()
    }
}
