//! Social costs of the equilibrium and the planner, their gap, and the
//! algebraic efficiency test.

use serde::Serialize;

use crate::model::{derive, validate, DerivedCoefficients, ModelParams};
use crate::numeric::simpson;
use crate::trajectories::{resolving_points, Kind, Solution, TimeGrid, DEFAULT_GRID_POINTS};
use crate::{Error, Result};

/// The four addends of a social cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub terminal_variance: f64,
    pub terminal_mean: f64,
    pub running_variance: f64,
    pub running_mean: f64,
    pub total: f64,
}

impl CostBreakdown {
    /// Variance part shared by every affine policy with slope `a η`.
    pub fn h_var(&self) -> f64 {
        self.terminal_variance + self.running_variance
    }
}

/// Social cost of `kind` from an already built solution.
pub fn social_cost_of(sol: &Solution, kind: Kind) -> Result<CostBreakdown> {
    let p = &sol.params;
    let d = &sol.derived;
    let h = sol.grid.step();
    let (_, c) = sol.gains(kind);
    let x_bar = &sol.mean_state(kind).values;

    let var_weight = |eta: f64| {
        let slope = d.a * eta;
        p.q + p.q_bar + (p.r + p.r_bar) * slope * slope
    };
    let running_var: Vec<f64> = sol
        .eta
        .values
        .iter()
        .zip(&sol.v.values)
        .map(|(&e, &v)| var_weight(e) * v)
        .collect();

    let q_mean = p.q + p.q_bar * (1.0 - p.s).powi(2);
    let r_mean = p.r + p.r_bar * (1.0 - p.s_bar).powi(2);
    let running_mean: Vec<f64> = (0..sol.grid.len())
        .map(|k| {
            let nu = c * sol.eta_bar(kind, k);
            (q_mean + r_mean * nu * nu) * x_bar[k] * x_bar[k]
        })
        .collect();

    let x_t = *x_bar.last().unwrap();
    let terminal_variance = 0.5 * (p.q_t + p.q_bar_t) * sol.v.last();
    let terminal_mean = 0.5 * (p.q_t + p.q_bar_t * (1.0 - p.s_t).powi(2)) * x_t * x_t;
    let running_variance = 0.5 * simpson(&running_var, h)?;
    let running_mean = 0.5 * simpson(&running_mean, h)?;
    Ok(CostBreakdown {
        terminal_variance,
        terminal_mean,
        running_variance,
        running_mean,
        total: terminal_variance + terminal_mean + running_variance + running_mean,
    })
}

/// Social cost of the equilibrium (`Mfg`) or planner (`Mkv`) policy.
pub fn social_cost(params: &ModelParams, kind: Kind, grid: &TimeGrid) -> Result<CostBreakdown> {
    social_cost_of(&Solution::build(params, grid)?, kind)
}

/// Planner cost through the shorter form
/// `½∫(q + q̄ + B^η η²) v + ½(q_T + q̄_T) v_T + ½ w_0 E(ξ)²`.
pub fn sc_mkv_simplified(sol: &Solution) -> Result<f64> {
    let p = &sol.params;
    let b_eta = sol.derived.riccati_eta.b;
    let integrand: Vec<f64> = sol
        .eta
        .values
        .iter()
        .zip(&sol.v.values)
        .map(|(&e, &v)| (p.q + p.q_bar + b_eta * e * e) * v)
        .collect();
    let running = simpson(&integrand, sol.grid.step())?;
    Ok(0.5 * running
        + 0.5 * (p.q_t + p.q_bar_t) * sol.v.last()
        + 0.5 * sol.w.first() * p.xi_mean * p.xi_mean)
}

/// `½ B ∫ (u − w)² (x̄^MFG)²`, the cost gap without subtracting costs.
pub fn delta_sc_of(sol: &Solution) -> Result<f64> {
    let integrand: Vec<f64> = (0..sol.grid.len())
        .map(|k| {
            let gap = (sol.u.values[k] - sol.w.values[k]) * sol.x_bar_mfg.values[k];
            gap * gap
        })
        .collect();
    Ok(0.5 * sol.derived.b_mean() * simpson(&integrand, sol.grid.step())?)
}

pub fn delta_sc(params: &ModelParams, grid: &TimeGrid) -> Result<f64> {
    delta_sc_of(&Solution::build(params, grid)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub sc_mfg: f64,
    pub sc_mkv: f64,
    pub h_var: f64,
    /// `sc_mfg − sc_mkv`.
    pub delta_direct: f64,
    /// Gap from the squared mean-field difference.
    pub delta_prop2: f64,
    /// `1 + delta_prop2 / sc_mkv`.
    pub poa: f64,
    pub breakdown_mfg: CostBreakdown,
    pub breakdown_mkv: CostBreakdown,
}

pub fn report_of(sol: &Solution) -> Result<CostReport> {
    let breakdown_mfg = social_cost_of(sol, Kind::Mfg)?;
    let breakdown_mkv = social_cost_of(sol, Kind::Mkv)?;
    let sc_mkv = breakdown_mkv.total;
    if !(sc_mkv > 0.0) {
        return Err(Error::DegenerateCost(sc_mkv));
    }
    let delta_prop2 = delta_sc_of(sol)?;
    Ok(CostReport {
        sc_mfg: breakdown_mfg.total,
        sc_mkv,
        h_var: breakdown_mkv.h_var(),
        delta_direct: breakdown_mfg.total - sc_mkv,
        delta_prop2,
        poa: 1.0 + delta_prop2 / sc_mkv,
        breakdown_mfg,
        breakdown_mkv,
    })
}

pub fn price_of_anarchy(params: &ModelParams, grid: &TimeGrid) -> Result<CostReport> {
    report_of(&Solution::build(params, grid)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EfficiencyReason {
    /// Zero initial mean: both mean states vanish.
    MeanZero,
    /// `b̄1 > 0` and both mean-field equations share a stationary point.
    Thm2B1barPos,
    /// `b̄1 = 0` and the two mean-field equations coincide.
    Thm2B1barZero,
    NotEfficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyResiduals {
    /// `|D^u − D^w|`
    pub terminal_gap: f64,
    /// `|C^u − C^w|`
    pub running_gap: f64,
    /// `|B D² + 2 A^u D − C^u|` at `D = D^u`.
    pub stationary_u: f64,
    /// `|B D² + 2 A^w D − C^w|` at `D = D^w`.
    pub stationary_w: f64,
    /// Constant value of `w` forced by the `b̄1 > 0` branch, `(C^u − C^w)/b̄1`.
    pub implied_w: Option<f64>,
    /// Scale the residuals are compared against (times `1e-12`).
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyVerdict {
    pub poa_is_one: bool,
    pub reason: EfficiencyReason,
    /// Whether the three pointwise sufficient conditions hold on the grid.
    pub prop1_sufficient: bool,
    pub residuals: EfficiencyResiduals,
}

const EXACT_TOL: f64 = 1e-12;
const GRID_TOL: f64 = 1e-9;

fn residuals(p: &ModelParams, d: &DerivedCoefficients) -> EfficiencyResiduals {
    let (u, w) = (d.riccati_u, d.riccati_w);
    let b = d.b_mean();
    let scale = [
        1.0,
        u.c.abs(),
        w.c.abs(),
        u.d.abs(),
        w.d.abs(),
        (b * u.d * u.d).abs(),
        (b * w.d * w.d).abs(),
        (2.0 * u.a * u.d).abs(),
        (2.0 * w.a * w.d).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    EfficiencyResiduals {
        terminal_gap: (u.d - w.d).abs(),
        running_gap: (u.c - w.c).abs(),
        stationary_u: u.terminal_drift().abs(),
        stationary_w: w.terminal_drift().abs(),
        implied_w: (p.b1_bar > 0.0).then(|| (u.c - w.c) / p.b1_bar),
        scale,
    }
}

/// Pointwise sufficient conditions, checked on the grid:
/// `(b̄1 w + s q̄ (s − 1)) x̄^MKV = 0`, `(c^MFG − c^MKV) w x̄^MKV = 0` and
/// `s_T q̄_T (s_T − 1) x̄_T^MKV = 0`.
fn pointwise_sufficient(sol: &Solution) -> bool {
    let p = &sol.params;
    let d = &sol.derived;
    let tol = |x: f64| GRID_TOL * (1.0 + x.abs());
    let c_gap = d.c_mfg - d.c_mkv;
    let state_term = p.s * p.q_bar * (p.s - 1.0);
    let pointwise = sol.w.values.iter().zip(&sol.x_bar_mkv.values).all(|(&w, &x)| {
        ((p.b1_bar * w + state_term) * x).abs() <= tol(x) && (c_gap * w * x).abs() <= tol(x)
    });
    let x_t = sol.x_bar_mkv.last();
    let terminal = (p.s_t * p.q_bar_t * (p.s_t - 1.0) * x_t).abs() <= tol(x_t);
    pointwise && terminal
}

/// Decide algebraically whether the equilibrium is efficient. The
/// pointwise conditions are checked on the default grid, refined if the
/// model is stiff.
pub fn efficiency(params: &ModelParams) -> Result<EfficiencyVerdict> {
    validate(params).require_solvable()?;
    let n = resolving_points(params, &derive(params)?, 1.0)?.max(DEFAULT_GRID_POINTS);
    efficiency_on(params, &TimeGrid::new(params.horizon, n)?)
}

pub fn efficiency_on(params: &ModelParams, grid: &TimeGrid) -> Result<EfficiencyVerdict> {
    validate(params).require_solvable()?;
    let d = derive(params)?;
    let res = residuals(params, &d);
    let small = |x: f64| x <= EXACT_TOL * res.scale;

    let reason = if params.xi_mean == 0.0 {
        EfficiencyReason::MeanZero
    } else if params.b1_bar > 0.0 {
        if small(res.terminal_gap) && small(res.stationary_u) && small(res.stationary_w) {
            EfficiencyReason::Thm2B1barPos
        } else {
            EfficiencyReason::NotEfficient
        }
    } else if small(res.terminal_gap) && small(res.running_gap) {
        EfficiencyReason::Thm2B1barZero
    } else {
        EfficiencyReason::NotEfficient
    };

    let sol = Solution::build(params, grid)?;
    Ok(EfficiencyVerdict {
        poa_is_one: reason != EfficiencyReason::NotEfficient,
        reason,
        prop1_sufficient: pointwise_sufficient(&sol),
        residuals: res,
    })
}
