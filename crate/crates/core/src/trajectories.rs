//! Time-grid functions of the solved game.
//!
//! Both problems share the slope `η` of the linear feedback and hence the
//! state variance `v`. They differ only in the mean-field Riccati solution
//! (`u = λ η̄^MFG` for the equilibrium, `w = η̄^MKV` for the planner) and
//! the mean state it drives.

use std::fmt::Write as _;

use serde::Serialize;

use crate::model::{validate, DerivedCoefficients, ModelParams};
use crate::numeric::cumulative_discounted;
use crate::riccati::{self, RiccatiEval};
use crate::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Largest `h · stiffness` a grid may have before solutions are refused.
/// Beyond it the sharpest Riccati transient falls between grid points and
/// the quadratures stop meaning anything.
pub const MAX_STEP_RATE: f64 = 25.0;

/// Uniform grid `t_k = k T / (n − 1)`, `n` odd.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    horizon: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::BadGrid(format!("horizon must be positive, got {horizon}")));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::BadGrid(format!("need an odd point count >= 3, got {n}")));
        }
        Ok(Self { horizon, n })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.horizon / (self.n - 1) as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            self.horizon
        } else {
            k as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|k| self.t(k))
    }

    fn same_as(&self, other: &TimeGrid) -> bool {
        self.n == other.n && self.horizon == other.horizon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub label: String,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, values: Vec<f64>, label: impl Into<String>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values, label: label.into() }
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("grids have at least three points")
    }

    /// `t,<label>` header then one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = format!("t,{}\n", self.label);
        for (t, v) in self.grid.points().zip(&self.values) {
            writeln!(out, "{t:.16e},{v:.16e}").unwrap();
        }
        out
    }

    pub fn require_grid(&self, grid: &TimeGrid) -> Result<()> {
        if self.grid.same_as(grid) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrid(format!(
                "`{}` lives on {} points over [0, {}], expected {} over [0, {}]",
                self.label,
                self.grid.n,
                self.grid.horizon,
                grid.n,
                grid.horizon
            )))
        }
    }
}

/// Which of the two problems a curve or policy belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    /// Mean field game equilibrium.
    Mfg,
    /// McKean-Vlasov central planner.
    Mkv,
}

impl Kind {
    pub fn label(self) -> &'static str {
        match self {
            Kind::Mfg => "MFG",
            Kind::Mkv => "MKV",
        }
    }
}

fn prepare(params: &ModelParams, grid: &TimeGrid) -> Result<()> {
    validate(params).require_solvable()?;
    if grid.horizon != params.horizon {
        return Err(Error::IncompatibleGrid(format!(
            "grid horizon {} differs from model horizon {}",
            grid.horizon, params.horizon
        )));
    }
    Ok(())
}

fn curve(eval: &RiccatiEval, grid: &TimeGrid, label: &str) -> Trajectory {
    Trajectory::new(*grid, eval.sample(grid.len()), label)
}

/// Closed-form Riccati solution behind the mean-field curve of `kind`.
pub fn mean_field_riccati(
    params: &ModelParams,
    derived: &DerivedCoefficients,
    kind: Kind,
) -> Result<RiccatiEval> {
    let spec = match kind {
        Kind::Mfg => derived.riccati_u,
        Kind::Mkv => derived.riccati_w,
    };
    riccati::solve(spec, params.horizon)
}

/// Common feedback slope `η`.
pub fn eta_curve(
    params: &ModelParams,
    derived: &DerivedCoefficients,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    prepare(params, grid)?;
    let eval = riccati::solve(derived.riccati_eta, params.horizon)?;
    Ok(curve(&eval, grid, "eta"))
}

/// `u = λ η̄^MFG` for [`Kind::Mfg`], `w = η̄^MKV` for [`Kind::Mkv`].
pub fn mean_field_curve(
    params: &ModelParams,
    derived: &DerivedCoefficients,
    kind: Kind,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    prepare(params, grid)?;
    let eval = mean_field_riccati(params, derived, kind)?;
    Ok(curve(&eval, grid, match kind {
        Kind::Mfg => "u",
        Kind::Mkv => "w",
    }))
}

/// `η̄` of the given problem: `u / λ` or `w`.
pub fn eta_bar_curve(
    params: &ModelParams,
    derived: &DerivedCoefficients,
    kind: Kind,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let mut c = mean_field_curve(params, derived, kind, grid)?;
    if kind == Kind::Mfg {
        c.values.iter_mut().for_each(|v| *v /= derived.lambda);
    }
    c.label = format!("eta_bar_{}", kind.label());
    Ok(c)
}

fn mean_state_from(params: &ModelParams, mean_field: &RiccatiEval, grid: &TimeGrid, kind: Kind) -> Trajectory {
    let growth = params.b1 + params.b1_bar;
    let values = grid
        .points()
        .map(|t| {
            let exponent = growth * t - mean_field.b_integral_value(t);
            params.xi_mean * exponent.exp()
        })
        .collect();
    Trajectory::new(*grid, values, format!("x_bar_{}", kind.label()))
}

/// Mean state `x̄_t = E(ξ) exp ∫_0^t (b1 + b̄1 − B m_s) ds` with `m = u` or `w`.
pub fn mean_state(
    params: &ModelParams,
    derived: &DerivedCoefficients,
    kind: Kind,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    prepare(params, grid)?;
    let m = mean_field_riccati(params, derived, kind)?;
    Ok(mean_state_from(params, &m, grid, kind))
}

fn variance_from(params: &ModelParams, eta: &RiccatiEval, grid: &TimeGrid) -> Result<Trajectory> {
    let running: Vec<f64> = grid
        .points()
        .map(|t| params.b1 * t - eta.b_integral_value(t))
        .collect();
    let noise = cumulative_discounted(&running, grid.step())?;
    let sigma2 = params.sigma * params.sigma;
    let values = running
        .iter()
        .zip(&noise)
        .map(|(i, s)| params.xi_var * (2.0 * i).exp() + sigma2 * s)
        .collect();
    Ok(Trajectory::new(*grid, values, "v"))
}

/// Common state variance
/// `v_t = E(t)[Var(ξ) + σ² ∫_0^t E(s)⁻¹ ds]`, `E(t) = exp 2∫_0^t (b1 − B^η η)`.
pub fn variance(
    params: &ModelParams,
    derived: &DerivedCoefficients,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    prepare(params, grid)?;
    let eta = riccati::solve(derived.riccati_eta, params.horizon)?;
    variance_from(params, &eta, grid)
}

/// Fastest rate at which any curve of the solution varies: the Riccati
/// transients and the free growth of mean and variance.
pub fn stiffness(params: &ModelParams, derived: &DerivedCoefficients) -> Result<f64> {
    let mut rate = (2.0 * (params.b1 + params.b1_bar)).abs().max((2.0 * params.b1).abs());
    for spec in [derived.riccati_u, derived.riccati_w, derived.riccati_eta] {
        rate = rate.max(riccati::solve(spec, params.horizon)?.stiffness());
    }
    Ok(rate)
}

/// Points a grid needs so that `h · stiffness ≤ max_step_rate`.
pub fn resolving_points(params: &ModelParams, derived: &DerivedCoefficients, max_step_rate: f64) -> Result<usize> {
    let intervals = (params.horizon * stiffness(params, derived)? / max_step_rate).ceil();
    if !intervals.is_finite() || intervals > 1e9 {
        return Err(Error::BadGrid(format!("solution too stiff to resolve ({intervals:e} intervals)")));
    }
    let intervals = (intervals as usize).max(2);
    Ok(intervals + intervals % 2 + 1)
}

/// Affine feedback `φ(t, x) = slope(t) x + intercept(t)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeedbackPolicy {
    pub kind: Kind,
    pub grid: TimeGrid,
    pub slope: Vec<f64>,
    pub intercept: Vec<f64>,
}

impl FeedbackPolicy {
    /// Control at grid index `k` for state `x`.
    pub fn at(&self, k: usize, x: f64) -> f64 {
        self.slope[k] * x + self.intercept[k]
    }

    /// `E φ(t, X_t)` given the state mean.
    pub fn control_mean(&self, mean_state: &Trajectory) -> Result<Trajectory> {
        mean_state.require_grid(&self.grid)?;
        let values = (0..self.grid.len()).map(|k| self.at(k, mean_state.values[k])).collect();
        Ok(Trajectory::new(self.grid, values, format!("nu_bar_{}", self.kind.label())))
    }

    /// `Var φ(t, X_t)` given the state variance.
    pub fn control_variance(&self, variance: &Trajectory) -> Result<Trajectory> {
        variance.require_grid(&self.grid)?;
        let values = self
            .slope
            .iter()
            .zip(&variance.values)
            .map(|(s, v)| s * s * v)
            .collect();
        Ok(Trajectory::new(self.grid, values, format!("control_var_{}", self.kind.label())))
    }
}

/// Every curve of the solved game on one grid, computed once.
#[derive(Debug, Clone)]
pub struct Solution {
    pub params: ModelParams,
    pub derived: DerivedCoefficients,
    pub grid: TimeGrid,
    pub eta: Trajectory,
    pub u: Trajectory,
    pub w: Trajectory,
    pub v: Trajectory,
    pub x_bar_mfg: Trajectory,
    pub x_bar_mkv: Trajectory,
}

impl Solution {
    pub fn build(params: &ModelParams, grid: &TimeGrid) -> Result<Self> {
        prepare(params, grid)?;
        let derived = crate::model::derive(params)?;
        let rate = stiffness(params, &derived)?;
        if grid.step() * rate > MAX_STEP_RATE {
            return Err(Error::BadGrid(format!(
                "{} points cannot resolve transients of rate {rate:.3e}; use at least {}",
                grid.len(),
                resolving_points(params, &derived, MAX_STEP_RATE)?
            )));
        }
        let eta_eval = riccati::solve(derived.riccati_eta, params.horizon)?;
        let u_eval = mean_field_riccati(params, &derived, Kind::Mfg)?;
        let w_eval = mean_field_riccati(params, &derived, Kind::Mkv)?;
        let eta = curve(&eta_eval, grid, "eta");
        let u = curve(&u_eval, grid, "u");
        let w = curve(&w_eval, grid, "w");
        let v = variance_from(params, &eta_eval, grid)?;
        let x_bar_mfg = mean_state_from(params, &u_eval, grid, Kind::Mfg);
        let x_bar_mkv = mean_state_from(params, &w_eval, grid, Kind::Mkv);
        Ok(Self {
            params: *params,
            derived,
            grid: *grid,
            eta,
            u,
            w,
            v,
            x_bar_mfg,
            x_bar_mkv,
        })
    }

    pub fn mean_state(&self, kind: Kind) -> &Trajectory {
        match kind {
            Kind::Mfg => &self.x_bar_mfg,
            Kind::Mkv => &self.x_bar_mkv,
        }
    }

    /// `η̄` of the given problem at grid index `k`.
    pub fn eta_bar(&self, kind: Kind, k: usize) -> f64 {
        match kind {
            Kind::Mfg => self.u.values[k] / self.derived.lambda,
            Kind::Mkv => self.w.values[k],
        }
    }

    /// `(b, c)` gains of the given problem.
    pub fn gains(&self, kind: Kind) -> (f64, f64) {
        match kind {
            Kind::Mfg => (self.derived.b_mfg, self.derived.c_mfg),
            Kind::Mkv => (self.derived.b_mkv, self.derived.c_mkv),
        }
    }

    pub fn policy(&self, kind: Kind) -> FeedbackPolicy {
        let a = self.derived.a;
        let (b, _) = self.gains(kind);
        let x_bar = self.mean_state(kind);
        let slope = self.eta.values.iter().map(|e| a * e).collect();
        let intercept = (0..self.grid.len())
            .map(|k| {
                let eta_bar = self.eta_bar(kind, k);
                (a * (eta_bar - self.eta.values[k]) + b * eta_bar) * x_bar.values[k]
            })
            .collect();
        FeedbackPolicy { kind, grid: self.grid, slope, intercept }
    }

    /// `c η̄_t x̄_t`, the closed-form mean of the control.
    pub fn control_mean(&self, kind: Kind) -> Trajectory {
        let (_, c) = self.gains(kind);
        let x_bar = self.mean_state(kind);
        let values = (0..self.grid.len())
            .map(|k| c * self.eta_bar(kind, k) * x_bar.values[k])
            .collect();
        Trajectory::new(self.grid, values, format!("nu_bar_{}", kind.label()))
    }
}

pub fn policy(
    params: &ModelParams,
    derived: &DerivedCoefficients,
    kind: Kind,
    grid: &TimeGrid,
) -> Result<FeedbackPolicy> {
    let sol = Solution::build(params, grid)?;
    debug_assert_eq!(&sol.derived, derived);
    Ok(sol.policy(kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive;

    fn setup(p: &ModelParams, n: usize) -> (DerivedCoefficients, TimeGrid) {
        (derive(p).unwrap(), TimeGrid::new(p.horizon, n).unwrap())
    }

    fn rk4(f: impl Fn(f64, f64) -> f64, y0: f64, t_end: f64, steps: usize) -> f64 {
        let h = t_end / steps as f64;
        let mut y = y0;
        for k in 0..steps {
            let t = k as f64 * h;
            let k1 = f(t, y);
            let k2 = f(t + h / 2.0, y + h / 2.0 * k1);
            let k3 = f(t + h / 2.0, y + h / 2.0 * k2);
            let k4 = f(t + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        y
    }

    #[test]
    fn grid_rules() {
        assert!(TimeGrid::new(1.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, 5).is_err());
        let g = TimeGrid::new(2.0, 5).unwrap();
        assert_eq!(g.points().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn eta_terminal_and_rk4() {
        let p = ModelParams::default();
        let (d, g) = setup(&p, 2001);
        let eta = eta_curve(&p, &d, &g).unwrap();
        assert_eq!(eta.last(), 2.0);
        // Backward RK4 of η' = B^η η² + 2A^η η − C^η from η_T = 2.
        let spec = d.riccati_eta;
        let back = rk4(|_, y| -spec.rhs(y), spec.d, 1.0, 2000);
        assert!((eta.first() - back).abs() <= 1e-8 * back.abs());
    }

    #[test]
    fn stationary_eta() {
        // b1 = 1, b2 = r = 1, r̄ = 0: A = −1, B = 1. With q + q̄ = 4 the
        // terminal value solving D² − 2D − 4 = 0 is stationary.
        let d_star = 1.0 + 5f64.sqrt();
        let p = ModelParams {
            r_bar: 0.0,
            q: 2.0,
            q_bar: 2.0,
            q_t: d_star / 2.0,
            q_bar_t: d_star / 2.0,
            ..Default::default()
        };
        let (d, g) = setup(&p, 101);
        assert!(d.riccati_eta.terminal_drift().abs() < 1e-14);
        let eta = eta_curve(&p, &d, &g).unwrap();
        for v in &eta.values {
            assert!((v - d_star).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_initial_mean_gives_zero_mean_state() {
        let p = ModelParams { xi_mean: 0.0, ..Default::default() };
        let (d, g) = setup(&p, 201);
        for kind in [Kind::Mfg, Kind::Mkv] {
            let x = mean_state(&p, &d, kind, &g).unwrap();
            assert!(x.values.iter().all(|&v| v == 0.0));
            let pol = policy(&p, &d, kind, &g).unwrap();
            assert!(pol.intercept.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn initial_values_are_exact() {
        let p = ModelParams { xi_mean: -0.7, xi_var: 0.3, ..Default::default() };
        let (d, g) = setup(&p, 201);
        assert_eq!(mean_state(&p, &d, Kind::Mfg, &g).unwrap().first(), -0.7);
        assert_eq!(mean_state(&p, &d, Kind::Mkv, &g).unwrap().first(), -0.7);
        assert_eq!(variance(&p, &d, &g).unwrap().first(), 0.3);
    }

    #[test]
    fn mean_state_matches_linear_ode() {
        let p = ModelParams::default();
        let (d, g) = setup(&p, 2001);
        let x = mean_state(&p, &d, Kind::Mfg, &g).unwrap();
        let u = riccati::solve(d.riccati_u, 1.0).unwrap();
        let b = d.b_mean();
        let end = rk4(|t, y| (p.b1 + p.b1_bar - b * u.evaluate(t).unwrap()) * y, 1.0, 1.0, 2000);
        assert!((x.last() - end).abs() <= 1e-7 * end.abs());
    }

    #[test]
    fn variance_matches_linear_ode() {
        let p = ModelParams::default();
        let (d, g) = setup(&p, 2001);
        let v = variance(&p, &d, &g).unwrap();
        let eta = riccati::solve(d.riccati_eta, 1.0).unwrap();
        let s2 = p.sigma * p.sigma;
        let end = rk4(
            |t, y| 2.0 * (p.b1 + d.a * p.b2 * eta.evaluate(t).unwrap()) * y + s2,
            p.xi_var,
            1.0,
            2000,
        );
        assert!((v.last() - end).abs() <= 1e-7 * end.abs());
        assert!(v.values[1..].iter().all(|&x| x > 0.0));
    }

    #[test]
    fn no_noise_no_variance() {
        let p = ModelParams { sigma: 0.0, xi_var: 0.0, ..Default::default() };
        let (d, g) = setup(&p, 201);
        let v = variance(&p, &d, &g).unwrap();
        assert!(v.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn default_policy_terminal_slope() {
        let p = ModelParams::default();
        let (d, g) = setup(&p, 2001);
        let pol = policy(&p, &d, Kind::Mfg, &g).unwrap();
        assert!((pol.slope.last().unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn policy_statistics_identities() {
        let p = ModelParams { xi_var: 0.4, xi_mean: 1.3, ..Default::default() };
        let (_, g) = setup(&p, 401);
        let sol = Solution::build(&p, &g).unwrap();
        for kind in [Kind::Mfg, Kind::Mkv] {
            let pol = sol.policy(kind);
            let mean = pol.control_mean(sol.mean_state(kind)).unwrap();
            let closed = sol.control_mean(kind);
            let var = pol.control_variance(&sol.v).unwrap();
            for k in 0..g.len() {
                let m = closed.values[k];
                assert!((mean.values[k] - m).abs() <= 1e-10 * m.abs().max(1e-300));
                let a_eta = sol.derived.a * sol.eta.values[k];
                let expect = a_eta * a_eta * sol.v.values[k];
                assert!((var.values[k] - expect).abs() <= 1e-10 * expect);
            }
        }
    }

    #[test]
    fn efficient_standard_game_policies_coincide() {
        let p = ModelParams {
            b2_bar: 0.0,
            r_bar: 0.0,
            b1_bar: 0.0,
            s: 1.0,
            s_t: 1.0,
            ..Default::default()
        };
        let (_, g) = setup(&p, 401);
        let sol = Solution::build(&p, &g).unwrap();
        let (mfg, mkv) = (sol.policy(Kind::Mfg), sol.policy(Kind::Mkv));
        assert_eq!(mfg.slope, mkv.slope);
        for (a, b) in mfg.intercept.iter().zip(&mkv.intercept) {
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn coarse_grid_refused_for_stiff_models() {
        let p = ModelParams { b2: 1000.0, ..Default::default() };
        let d = crate::model::derive(&p).unwrap();
        assert!(stiffness(&p, &d).unwrap() > 1e6);
        assert!(matches!(Solution::build(&p, &TimeGrid::new(1.0, 2001).unwrap()), Err(Error::BadGrid(_))));
        let n = resolving_points(&p, &d, MAX_STEP_RATE).unwrap();
        assert_eq!(n % 2, 1);
        assert!(Solution::build(&p, &TimeGrid::new(1.0, n).unwrap()).is_ok());
        let d0 = crate::model::derive(&ModelParams::default()).unwrap();
        assert!(resolving_points(&ModelParams::default(), &d0, 1.0).unwrap() < 2001);
    }

    #[test]
    fn invalid_model_refused() {
        let p = ModelParams { q: 0.0, q_bar: 0.0, ..Default::default() };
        let g = TimeGrid::new(1.0, 11).unwrap();
        assert!(matches!(Solution::build(&p, &g), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn csv_layout() {
        let p = ModelParams::default();
        let (d, g) = setup(&p, 3);
        let csv = eta_curve(&p, &d, &g).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,eta");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "1.0000000000000000e0,2.0000000000000000e0");
    }
}
