//! Independent oracles: Runge-Kutta integration of the ODEs behind the
//! closed forms, and Monte Carlo simulation of the controlled dynamics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{validate, ModelParams};
use crate::numeric::pairwise_sum;
use crate::riccati::RiccatiSpec;
use crate::trajectories::{FeedbackPolicy, TimeGrid, Trajectory};
use crate::{Error, Result};

const BLOWUP: f64 = 1e12;

/// Classical RK4 for `ρ' = Bρ² + 2Aρ − C`, backward from `ρ_T = D`, one
/// step per grid interval.
pub fn rk4_riccati(spec: RiccatiSpec, grid: &TimeGrid) -> Result<Trajectory> {
    let n = grid.len();
    let h = grid.step();
    let f = |y: f64| spec.rhs(y);
    let mut values = vec![0.0; n];
    values[n - 1] = spec.d;
    let mut y = spec.d;
    for k in (0..n - 1).rev() {
        let k1 = f(y);
        let k2 = f(y - 0.5 * h * k1);
        let k3 = f(y - 0.5 * h * k2);
        let k4 = f(y - h * k3);
        y -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !y.is_finite() || y.abs() > BLOWUP {
            return Err(Error::Blowup { t: grid.t(k) });
        }
        values[k] = y;
    }
    Ok(Trajectory::new(*grid, values, "rho_rk4"))
}

/// Time-dependent coefficient of a linear ODE.
pub enum Coefficient<'a> {
    Constant(f64),
    Function(&'a dyn Fn(f64) -> f64),
    /// Samples on the half-step grid: `2(n − 1) + 1` points for an
    /// `n`-point integration grid over the same horizon.
    Sampled(&'a Trajectory),
}

impl Coefficient<'_> {
    fn check(&self, grid: &TimeGrid) -> Result<()> {
        if let Coefficient::Sampled(c) = self {
            let fine = TimeGrid::new(grid.horizon(), 2 * (grid.len() - 1) + 1)?;
            c.require_grid(&fine)?;
        }
        Ok(())
    }

    /// Value at half-step index `j`, i.e. at time `j h / 2`.
    fn at(&self, j: usize, grid: &TimeGrid) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::Function(f) => {
                let t = if j == 2 * (grid.len() - 1) {
                    grid.horizon()
                } else {
                    0.5 * j as f64 * grid.step()
                };
                f(t)
            }
            Coefficient::Sampled(c) => c.values[j],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Initial value at `t = 0`.
    Forward,
    /// Terminal value at `t = T`.
    Backward,
}

/// RK4 for `y' = p(t) y + r(t)` on `grid`.
pub fn rk4_linear(
    p: Coefficient<'_>,
    r: Coefficient<'_>,
    boundary: f64,
    direction: Direction,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    p.check(grid)?;
    r.check(grid)?;
    let n = grid.len();
    let h = grid.step();
    let f = |j: usize, y: f64| p.at(j, grid) * y + r.at(j, grid);
    let mut values = vec![0.0; n];
    match direction {
        Direction::Forward => {
            values[0] = boundary;
            let mut y = boundary;
            for k in 0..n - 1 {
                let (j0, jm, j1) = (2 * k, 2 * k + 1, 2 * k + 2);
                let k1 = f(j0, y);
                let k2 = f(jm, y + 0.5 * h * k1);
                let k3 = f(jm, y + 0.5 * h * k2);
                let k4 = f(j1, y + h * k3);
                y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                values[k + 1] = y;
            }
        }
        Direction::Backward => {
            values[n - 1] = boundary;
            let mut y = boundary;
            for k in (0..n - 1).rev() {
                let (j0, jm, j1) = (2 * k + 2, 2 * k + 1, 2 * k);
                let k1 = f(j0, y);
                let k2 = f(jm, y - 0.5 * h * k1);
                let k3 = f(jm, y - 0.5 * h * k2);
                let k4 = f(j1, y - h * k3);
                y -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                values[k] = y;
            }
        }
    }
    Ok(Trajectory::new(*grid, values, "y_rk4"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Pair path `2i` with `2i + 1` driven by the negated normals.
    pub antithetic: bool,
}

impl McConfig {
    fn check(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 paths, got {}", self.n_paths)));
        }
        if self.n_steps < 1 {
            return Err(Error::InvalidConfig("need at least one time step".into()));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "antithetic sampling needs an even path count, got {}",
                self.n_paths
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_paths: usize,
    pub dt: f64,
}

/// Monte Carlo social cost of `policy` with the mean-field flows held at
/// `mean_state` and `control_mean`. The model must be solvable.
pub fn mc_social_cost(
    params: &ModelParams,
    policy: &FeedbackPolicy,
    mean_state: &Trajectory,
    control_mean: &Trajectory,
    cfg: McConfig,
) -> Result<McEstimate> {
    validate(params).require_solvable()?;
    simulate_social_cost(params, policy, mean_state, control_mean, cfg)
}

/// Same simulation without model validation, for formula checks on
/// degenerate inputs.
pub fn simulate_social_cost(
    params: &ModelParams,
    policy: &FeedbackPolicy,
    mean_state: &Trajectory,
    control_mean: &Trajectory,
    cfg: McConfig,
) -> Result<McEstimate> {
    cfg.check()?;
    let grid = policy.grid;
    mean_state.require_grid(&grid)?;
    control_mean.require_grid(&grid)?;
    if grid.horizon() != params.horizon {
        return Err(Error::IncompatibleGrid(format!(
            "policy horizon {} differs from model horizon {}",
            grid.horizon(),
            params.horizon
        )));
    }
    let intervals = grid.len() - 1;
    if intervals % cfg.n_steps != 0 {
        return Err(Error::IncompatibleGrid(format!(
            "{} steps do not divide the {} grid intervals",
            cfg.n_steps, intervals
        )));
    }
    let sim = PathSimulator {
        p: params,
        policy,
        x_bar: &mean_state.values,
        nu_bar: &control_mean.values,
        stride: intervals / cfg.n_steps,
        n_steps: cfg.n_steps,
        dt: params.horizon / cfg.n_steps as f64,
    };

    let samples: Vec<f64> = if cfg.antithetic {
        (0..cfg.n_paths / 2)
            .into_par_iter()
            .map(|i| {
                let normals = sim.draw(cfg.seed, i as u64);
                0.5 * (sim.cost(&normals, 1.0) + sim.cost(&normals, -1.0))
            })
            .collect()
    } else {
        (0..cfg.n_paths)
            .into_par_iter()
            .map(|i| sim.cost(&sim.draw(cfg.seed, i as u64), 1.0))
            .collect()
    };

    let m = samples.len() as f64;
    let mean = pairwise_sum(&samples) / m;
    // Shift by one sample so identical paths give exactly zero spread.
    let shift = samples[0];
    let centred: Vec<f64> = samples.iter().map(|x| x - shift).collect();
    let sq: Vec<f64> = centred.iter().map(|x| x * x).collect();
    let c_mean = pairwise_sum(&centred) / m;
    let var = ((pairwise_sum(&sq) - m * c_mean * c_mean) / (m - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_err: (var / m).sqrt(),
        n_paths: cfg.n_paths,
        dt: sim.dt,
    })
}

struct PathSimulator<'a> {
    p: &'a ModelParams,
    policy: &'a FeedbackPolicy,
    x_bar: &'a [f64],
    nu_bar: &'a [f64],
    stride: usize,
    n_steps: usize,
    dt: f64,
}

impl PathSimulator<'_> {
    /// One normal for the initial state, then one per step, from the
    /// stream owned by `index`.
    fn draw(&self, seed: u64, index: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        (0..=self.n_steps).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn cost(&self, normals: &[f64], sign: f64) -> f64 {
        let p = self.p;
        let sqrt_dt = self.dt.sqrt();
        let mut x = p.xi_mean + sign * p.xi_var.sqrt() * normals[0];
        let mut running = 0.0;
        for j in 0..self.n_steps {
            let k = j * self.stride;
            let (mu, nu) = (self.x_bar[k], self.nu_bar[k]);
            let alpha = self.policy.at(k, x);
            let dev_x = x - p.s * mu;
            let dev_a = alpha - p.s_bar * nu;
            running += p.q * x * x + p.q_bar * dev_x * dev_x + p.r * alpha * alpha + p.r_bar * dev_a * dev_a;
            let drift = p.b1 * x + p.b1_bar * mu + p.b2 * alpha + p.b2_bar * nu;
            x += drift * self.dt + p.sigma * sqrt_dt * sign * normals[j + 1];
        }
        let mu_t = *self.x_bar.last().unwrap();
        let dev_t = x - p.s_t * mu_t;
        0.5 * running * self.dt + 0.5 * (p.q_t * x * x + p.q_bar_t * dev_t * dev_t)
    }
}

/// Settings for [`oracle_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub grid_n: usize,
    pub mc: McConfig,
    /// Relative distortion applied to every closed-form quantity before it
    /// is compared. Zero in normal use; nonzero values exist so that tests
    /// can confirm the suite notices a wrong formula.
    pub perturb: f64,
}

/// One oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub closed_form: f64,
    pub oracle: f64,
    /// Deviation in the units the tolerance is stated in.
    pub delta: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleCheck {
    fn new(name: &str, closed_form: f64, oracle: f64, delta: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            closed_form,
            oracle,
            delta,
            tolerance,
            pass: delta <= tolerance,
        }
    }
}

/// Largest deviation relative to the size of the reference curve.
fn curve_deviation(closed: &[f64], reference: &[f64]) -> f64 {
    let size = reference.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gap = closed
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if size > 0.0 {
        gap / size
    } else {
        gap
    }
}

/// Check every closed form of one model against its oracle: the three
/// Riccati curves and the mean and variance flows against RK4, the two
/// social-cost gap routes against each other, and the planner cost
/// against Monte Carlo. With `σ = 0` and a deterministic initial state
/// the simulation has no noise and the check is a pure discretization
/// bound.
pub fn oracle_suite(params: &ModelParams, cfg: SuiteConfig) -> Result<Vec<OracleCheck>> {
    use crate::riccati::solve;
    use crate::socialcost::{report_of, sc_mkv_simplified};
    use crate::trajectories::{Kind, Solution};

    cfg.mc.check()?;
    let scale = 1.0 + cfg.perturb;
    let grid = TimeGrid::new(params.horizon, cfg.grid_n)?;
    let sol = Solution::build(params, &grid)?;
    let d = sol.derived;
    let mut out = Vec::new();

    for (name, spec, curve) in [
        ("riccati u vs RK4", d.riccati_u, &sol.u),
        ("riccati w vs RK4", d.riccati_w, &sol.w),
        ("riccati eta vs RK4", d.riccati_eta, &sol.eta),
    ] {
        let rk = rk4_riccati(spec, &grid)?;
        let closed: Vec<f64> = curve.values.iter().map(|x| x * scale).collect();
        let dev = curve_deviation(&closed, &rk.values);
        out.push(OracleCheck::new(name, closed[0], rk.values[0], dev, 1e-8));
    }

    let u = solve(d.riccati_u, params.horizon)?;
    let w = solve(d.riccati_w, params.horizon)?;
    let eta = solve(d.riccati_eta, params.horizon)?;
    let drift = params.b1 + params.b1_bar;
    let rate_u = |t: f64| drift - d.b_mean() * u.evaluate(t).unwrap_or(f64::NAN);
    let rate_w = |t: f64| drift - d.b_mean() * w.evaluate(t).unwrap_or(f64::NAN);
    let var_rate = |t: f64| 2.0 * (params.b1 - d.riccati_eta.b * eta.evaluate(t).unwrap_or(f64::NAN));
    let flows: [(&str, &dyn Fn(f64) -> f64, f64, f64, &Trajectory); 3] = [
        ("mean state MFG vs RK4", &rate_u, 0.0, params.xi_mean, &sol.x_bar_mfg),
        ("mean state MKV vs RK4", &rate_w, 0.0, params.xi_mean, &sol.x_bar_mkv),
        ("variance vs RK4", &var_rate, params.sigma * params.sigma, params.xi_var, &sol.v),
    ];
    for (name, rate, source, start, curve) in flows {
        let rk = rk4_linear(
            Coefficient::Function(rate),
            Coefficient::Constant(source),
            start,
            Direction::Forward,
            &grid,
        )?;
        let closed: Vec<f64> = curve.values.iter().map(|x| x * scale).collect();
        let dev = curve_deviation(&closed, &rk.values);
        out.push(OracleCheck::new(name, *closed.last().unwrap(), *rk.values.last().unwrap(), dev, 1e-7));
    }

    let report = report_of(&sol)?;
    let cost_tol = 1e-8f64.max(1e-8 * report.sc_mkv);
    let gap = report.delta_prop2 * scale;
    out.push(OracleCheck::new(
        "cost gap vs cost difference",
        gap,
        report.delta_direct,
        (gap - report.delta_direct).abs(),
        cost_tol,
    ));
    let short = sc_mkv_simplified(&sol)? * scale;
    out.push(OracleCheck::new(
        "planner cost short form",
        short,
        report.sc_mkv,
        (short - report.sc_mkv).abs(),
        cost_tol,
    ));

    // The simulation reads the flows at every step, so it gets its own grid.
    let mc_grid = TimeGrid::new(params.horizon, cfg.mc.n_steps + 1)?;
    let mc_sol = Solution::build(params, &mc_grid)?;
    let exact = report_of(&mc_sol)?.sc_mkv * scale;
    let est = mc_social_cost(
        params,
        &mc_sol.policy(Kind::Mkv),
        &mc_sol.x_bar_mkv,
        &mc_sol.control_mean(Kind::Mkv),
        cfg.mc,
    )?;
    let deterministic = params.sigma == 0.0 && params.xi_var == 0.0;
    let (name, delta, tolerance) = if deterministic {
        let spread = if est.std_err == 0.0 { 0.0 } else { f64::INFINITY };
        ("planner cost vs noiseless simulation", (est.mean - exact).abs() / exact + spread, 1e-3)
    } else {
        ("planner cost vs Monte Carlo", (est.mean - exact).abs(), 3.0 * est.std_err + 2e-3 * exact)
    };
    out.push(OracleCheck::new(name, exact, est.mean, delta, tolerance));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riccati::solve;
    use crate::socialcost::social_cost_of;
    use crate::trajectories::{Kind, Solution};

    #[test]
    fn stationary_riccati_is_constant() {
        let spec = RiccatiSpec::new(-1.0, 1.0, 3.0, 3.0);
        let g = TimeGrid::new(1.0, 51).unwrap();
        let y = rk4_riccati(spec, &g).unwrap();
        assert!(y.values.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn riccati_matches_closed_form() {
        let spec = RiccatiSpec::new(-1.5, 3.2, 0.625, 0.625);
        let g = TimeGrid::new(1.0, 2001).unwrap();
        let y = rk4_riccati(spec, &g).unwrap();
        let c = solve(spec, 1.0).unwrap();
        for (t, v) in g.points().zip(&y.values) {
            let e = c.evaluate(t).unwrap();
            assert!((v - e).abs() <= 1e-8 * e.abs());
        }
    }

    #[test]
    fn riccati_linear_case() {
        let spec = RiccatiSpec::new(0.7, 0.0, 1.3, 0.4);
        let g = TimeGrid::new(2.0, 2001).unwrap();
        let y = rk4_riccati(spec, &g).unwrap();
        let c = solve(spec, 2.0).unwrap();
        for (t, v) in g.points().zip(&y.values) {
            assert!((v - c.evaluate(t).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn riccati_blowup_detected() {
        // ρ' = ρ² backward from a negative value runs to −∞ in finite time.
        let spec = RiccatiSpec::new(0.0, 1.0, 0.0, -2.0);
        let g = TimeGrid::new(1.0, 101).unwrap();
        assert!(matches!(rk4_riccati(spec, &g), Err(Error::Blowup { .. })));
    }

    #[test]
    fn linear_trivial_cases() {
        let g = TimeGrid::new(1.0, 1001).unwrap();
        let y = rk4_linear(Coefficient::Constant(0.0), Coefficient::Constant(0.0), 1.0, Direction::Forward, &g)
            .unwrap();
        assert!(y.values.iter().all(|&v| v == 1.0));
        let y = rk4_linear(Coefficient::Constant(1.0), Coefficient::Constant(0.0), 1.0, Direction::Forward, &g)
            .unwrap();
        assert!((y.last() - std::f64::consts::E).abs() < 1e-10);
        let y = rk4_linear(Coefficient::Constant(1.0), Coefficient::Constant(0.0), 1.0, Direction::Backward, &g)
            .unwrap();
        assert!((y.first() - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn linear_sampled_needs_half_steps() {
        let g = TimeGrid::new(1.0, 101).unwrap();
        let fine = TimeGrid::new(1.0, 201).unwrap();
        let curve = Trajectory::new(fine, fine.points().collect(), "t");
        let y = rk4_linear(Coefficient::Sampled(&curve), Coefficient::Constant(0.0), 1.0, Direction::Forward, &g)
            .unwrap();
        assert!((y.last() - 0.5f64.exp()).abs() < 1e-9);
        let wrong = Trajectory::new(g, g.points().collect(), "t");
        assert!(matches!(
            rk4_linear(Coefficient::Sampled(&wrong), Coefficient::Constant(0.0), 1.0, Direction::Forward, &g),
            Err(Error::IncompatibleGrid(_))
        ));
    }

    fn setup(p: &ModelParams, n: usize) -> Solution {
        Solution::build(p, &TimeGrid::new(p.horizon, n).unwrap()).unwrap()
    }

    fn run(sol: &Solution, cfg: McConfig) -> Result<McEstimate> {
        mc_social_cost(
            &sol.params,
            &sol.policy(Kind::Mkv),
            &sol.x_bar_mkv,
            &sol.control_mean(Kind::Mkv),
            cfg,
        )
    }

    #[test]
    fn seed_determinism() {
        let sol = setup(&ModelParams::default(), 201);
        let cfg = McConfig { n_paths: 2000, n_steps: 100, seed: 7, antithetic: false };
        let a = run(&sol, cfg).unwrap();
        let b = run(&sol, cfg).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
        let c = run(&sol, McConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn antithetic_agrees_with_plain() {
        let sol = setup(&ModelParams { xi_var: 0.5, ..Default::default() }, 201);
        let plain = run(&sol, McConfig { n_paths: 20000, n_steps: 100, seed: 1, antithetic: false }).unwrap();
        let anti = run(&sol, McConfig { n_paths: 20000, n_steps: 100, seed: 2, antithetic: true }).unwrap();
        assert!((plain.mean - anti.mean).abs() <= 3.0 * (plain.std_err + anti.std_err));
    }

    #[test]
    fn deterministic_paths() {
        let p = ModelParams { sigma: 0.0, xi_var: 0.0, ..Default::default() };
        let sol = setup(&p, 4001);
        let est = run(&sol, McConfig { n_paths: 4, n_steps: 4000, seed: 3, antithetic: false }).unwrap();
        assert_eq!(est.std_err, 0.0);
        let exact = social_cost_of(&sol, Kind::Mkv).unwrap().total;
        assert!((est.mean - exact).abs() <= 1e-3 * exact);
    }

    #[test]
    fn euler_error_halves() {
        let p = ModelParams { sigma: 0.0, xi_var: 0.0, ..Default::default() };
        let sol = setup(&p, 801);
        let exact = social_cost_of(&setup(&p, 4001), Kind::Mfg).unwrap().total;
        let err = |steps| {
            let est = mc_social_cost(
                &p,
                &sol.policy(Kind::Mfg),
                &sol.x_bar_mfg,
                &sol.control_mean(Kind::Mfg),
                McConfig { n_paths: 2, n_steps: steps, seed: 0, antithetic: false },
            )
            .unwrap();
            (est.mean - exact).abs()
        };
        let ratio = err(200) / err(400);
        assert!((1.6..2.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_everything_costs_nothing() {
        let p = ModelParams {
            q: 0.0,
            q_bar: 0.0,
            r: 0.0,
            r_bar: 0.0,
            q_t: 0.0,
            q_bar_t: 0.0,
            ..Default::default()
        };
        let g = TimeGrid::new(1.0, 11).unwrap();
        let zero = Trajectory::new(g, vec![0.0; 11], "zero");
        let policy = FeedbackPolicy { kind: Kind::Mkv, grid: g, slope: vec![0.0; 11], intercept: vec![0.0; 11] };
        let cfg = McConfig { n_paths: 100, n_steps: 10, seed: 5, antithetic: false };
        assert!(matches!(mc_social_cost(&p, &policy, &zero, &zero, cfg), Err(Error::InvalidModel(_))));
        let est = simulate_social_cost(&p, &policy, &zero, &zero, cfg).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn oracle_suite_passes_and_catches_perturbation() {
        let p = ModelParams::default();
        let mc = McConfig { n_paths: 20_000, n_steps: 500, seed: 42, antithetic: false };
        let cfg = SuiteConfig { grid_n: 2001, mc, perturb: 0.0 };
        let checks = oracle_suite(&p, cfg).unwrap();
        assert_eq!(checks.len(), 9);
        assert!(checks.iter().all(|c| c.pass), "{checks:#?}");
        let bad = oracle_suite(&p, SuiteConfig { perturb: 1e-3, ..cfg }).unwrap();
        assert!(bad.iter().filter(|c| !c.pass).count() >= 7);

        let quiet = ModelParams { sigma: 0.0, xi_var: 0.0, ..p };
        let det = oracle_suite(&quiet, SuiteConfig { grid_n: 4001, mc: McConfig { n_paths: 2, n_steps: 4000, ..mc }, ..cfg }).unwrap();
        assert!(det.iter().all(|c| c.pass), "{det:#?}");
    }

    #[test]
    fn config_and_grid_errors() {
        let sol = setup(&ModelParams::default(), 101);
        for cfg in [
            McConfig { n_paths: 1, n_steps: 10, seed: 0, antithetic: false },
            McConfig { n_paths: 10, n_steps: 0, seed: 0, antithetic: false },
            McConfig { n_paths: 11, n_steps: 10, seed: 0, antithetic: true },
        ] {
            assert!(matches!(run(&sol, cfg), Err(Error::InvalidConfig(_))));
        }
        let cfg = McConfig { n_paths: 10, n_steps: 30, seed: 0, antithetic: false };
        assert!(matches!(run(&sol, cfg), Err(Error::IncompatibleGrid(_))));
    }
}
