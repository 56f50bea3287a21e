//! One-parameter studies of the price of anarchy and checks of its
//! limiting behaviour at the ends of a sweep.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{derive, validate, ModelParams, FIELD_NAMES};
use crate::socialcost::price_of_anarchy;
use crate::trajectories::{resolving_points, TimeGrid};

/// `h · stiffness` bound for sweep rows; see [`resolving_points`].
pub const SWEEP_STEP_RATE: f64 = 1.0;
pub const MAX_SWEEP_POINTS: usize = 4_000_001;
use crate::{Error, Result};

/// Which interaction channels are switched on before the swept value is
/// applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Preset {
    Full,
    /// `b̄2 = r̄ = 0`.
    StatesOnly,
    /// `b̄1 = q̄ = q̄_T = 0`.
    ControlsOnly,
    /// Both of the above.
    None,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Full, Preset::StatesOnly, Preset::ControlsOnly, Preset::None];

    pub fn apply(self, base: &ModelParams) -> ModelParams {
        let mut p = *base;
        if matches!(self, Preset::StatesOnly | Preset::None) {
            p.b2_bar = 0.0;
            p.r_bar = 0.0;
        }
        if matches!(self, Preset::ControlsOnly | Preset::None) {
            p.b1_bar = 0.0;
            p.q_bar = 0.0;
            p.q_bar_t = 0.0;
        }
        p
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Full => "full",
            Preset::StatesOnly => "states",
            Preset::ControlsOnly => "controls",
            Preset::None => "none",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown preset `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SweepGrid {
    Explicit(Vec<f64>),
    Log { lo: f64, hi: f64, count: usize },
    Linear { lo: f64, hi: f64, count: usize },
}

impl SweepGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let spaced = |lo: f64, hi: f64, count: usize, log: bool| -> Result<Vec<f64>> {
            if count == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
                return Err(Error::BadGrid(format!("need lo <= hi and count >= 1, got [{lo}, {hi}] x {count}")));
            }
            if log && lo <= 0.0 {
                return Err(Error::BadGrid(format!("log grid needs lo > 0, got {lo}")));
            }
            if count == 1 {
                return Ok(vec![lo]);
            }
            let (a, b) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
            Ok((0..count)
                .map(|k| {
                    let x = if k + 1 == count {
                        b
                    } else {
                        a + (b - a) * k as f64 / (count - 1) as f64
                    };
                    if log {
                        10f64.powf(x)
                    } else {
                        x
                    }
                })
                .collect())
        };
        match self {
            SweepGrid::Explicit(v) if v.is_empty() => Err(Error::BadGrid("empty value list".into())),
            SweepGrid::Explicit(v) => Ok(v.clone()),
            SweepGrid::Log { lo, hi, count } => {
                let mut v = spaced(*lo, *hi, *count, true)?;
                // Pin the end points against powf rounding.
                v[0] = *lo;
                *v.last_mut().unwrap() = *hi;
                Ok(v)
            }
            SweepGrid::Linear { lo, hi, count } => spaced(*lo, *hi, *count, false),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub parameter: String,
    pub grid: SweepGrid,
    pub preset: Preset,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub poa: Option<f64>,
    pub delta_sc: Option<f64>,
    pub sc_mkv: Option<f64>,
    pub domain_ok: bool,
    pub theorem1_ok: bool,
    pub assumption1_ok: bool,
    /// Why no PoA was computed, if it was not.
    pub error: Option<String>,
}

impl SweepRow {
    pub fn valid(&self) -> bool {
        self.poa.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter: String,
    pub preset: Preset,
    /// Base model after the preset, before the swept value.
    pub base: ModelParams,
    pub rows: Vec<SweepRow>,
}

fn evaluate(params: &ModelParams, value: f64, grid_n: usize) -> SweepRow {
    let report = validate(params);
    let mut row = SweepRow {
        value,
        poa: None,
        delta_sc: None,
        sc_mkv: None,
        domain_ok: report.domain_ok,
        theorem1_ok: report.theorem1_ok,
        assumption1_ok: report.assumption1_ok,
        error: None,
    };
    let outcome = points_for(params, grid_n)
        .and_then(|n| TimeGrid::new(params.horizon, n))
        .and_then(|g| price_of_anarchy(params, &g));
    match outcome {
        Ok(rep) => {
            row.poa = Some(rep.poa);
            row.delta_sc = Some(rep.delta_prop2);
            row.sc_mkv = Some(rep.sc_mkv);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// At least `grid_n` points, more when the model has transients faster
/// than one grid step can follow.
fn points_for(params: &ModelParams, grid_n: usize) -> Result<usize> {
    validate(params).require_solvable()?;
    let needed = resolving_points(params, &derive(params)?, SWEEP_STEP_RATE)?;
    if needed > MAX_SWEEP_POINTS {
        return Err(Error::BadGrid(format!("needs {needed} grid points, more than the {MAX_SWEEP_POINTS} allowed")));
    }
    Ok(grid_n.max(needed))
}

/// One PoA evaluation per value, computed in parallel, rows in input
/// order. Values that break validation are kept with flags and no PoA.
pub fn run(spec: &SweepSpec, grid_n: usize) -> Result<SweepResult> {
    if !FIELD_NAMES.contains(&spec.parameter.as_str()) {
        return Err(Error::UnknownParameter(spec.parameter.clone()));
    }
    let base = spec.preset.apply(&spec.base);
    let values = spec.grid.values()?;
    let rows = values
        .par_iter()
        .map(|&v| {
            let params = base.with(&spec.parameter, v)?;
            Ok(evaluate(&params, v, grid_n))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        parameter: spec.parameter.clone(),
        preset: spec.preset,
        base,
        rows,
    })
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

impl SweepResult {
    /// `param,value,poa,delta_sc,sc_mkv,valid`; missing numbers are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,value,poa,delta_sc,sc_mkv,valid\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.16e},{},{},{},{}",
                self.parameter,
                r.value,
                num(r.poa),
                num(r.delta_sc),
                num(r.sc_mkv),
                r.valid()
            )
            .unwrap();
        }
        out
    }
}

/// Predicted limit of the PoA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExpectedLimit {
    One,
    AboveOne,
    Infinity,
    /// The sufficient condition for a strict limit fails; nothing is
    /// predicted.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Towards {
    Zero,
    Infinity,
}

/// Parameter limits with a known verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitCase {
    RToInfinity,
    RBarToInfinity,
    B2ToInfinity,
    B2ToZero,
    B2BarToInfinity,
    B2BarToZero,
    B1ToInfinity,
    B1BarToInfinity,
    B1ToZero,
    B1BarToZero,
}

const RATIO_TOL: f64 = 1e-12;

fn differ(x: f64, y: f64) -> bool {
    (x - y).abs() > RATIO_TOL * x.abs().max(y.abs()).max(1.0)
}

impl LimitCase {
    pub const ALL: [LimitCase; 10] = [
        LimitCase::RToInfinity,
        LimitCase::RBarToInfinity,
        LimitCase::B2ToInfinity,
        LimitCase::B2ToZero,
        LimitCase::B2BarToInfinity,
        LimitCase::B2BarToZero,
        LimitCase::B1ToInfinity,
        LimitCase::B1BarToInfinity,
        LimitCase::B1ToZero,
        LimitCase::B1BarToZero,
    ];

    pub fn parameter(self) -> &'static str {
        match self {
            LimitCase::RToInfinity => "r",
            LimitCase::RBarToInfinity => "r_bar",
            LimitCase::B2ToInfinity | LimitCase::B2ToZero => "b2",
            LimitCase::B2BarToInfinity | LimitCase::B2BarToZero => "b2_bar",
            LimitCase::B1ToInfinity | LimitCase::B1ToZero => "b1",
            LimitCase::B1BarToInfinity | LimitCase::B1BarToZero => "b1_bar",
        }
    }

    pub fn towards(self) -> Towards {
        match self {
            LimitCase::B2ToZero | LimitCase::B2BarToZero | LimitCase::B1ToZero | LimitCase::B1BarToZero => {
                Towards::Zero
            }
            _ => Towards::Infinity,
        }
    }

    pub fn name(self) -> String {
        let end = match self.towards() {
            Towards::Zero => "0",
            Towards::Infinity => "inf",
        };
        format!("{}->{}", self.parameter(), end)
    }

    /// Predicted limit given the other (fixed) parameters.
    pub fn expected(self, base: &ModelParams) -> ExpectedLimit {
        let p = base;
        let r_mfg = p.r + p.r_bar * (1.0 - p.s_bar);
        let r_mkv = p.r + p.r_bar * (1.0 - p.s_bar).powi(2);
        match self {
            LimitCase::RToInfinity
            | LimitCase::RBarToInfinity
            | LimitCase::B2BarToInfinity
            | LimitCase::B1ToInfinity => ExpectedLimit::One,
            LimitCase::B1BarToInfinity => ExpectedLimit::Infinity,
            LimitCase::B2ToInfinity => {
                let lhs = (p.q + p.q_bar * (1.0 - p.s)) / r_mfg;
                let rhs = (p.q + p.q_bar * (1.0 - p.s).powi(2)) / r_mkv;
                if differ(lhs, rhs) {
                    ExpectedLimit::AboveOne
                } else {
                    ExpectedLimit::One
                }
            }
            LimitCase::B2ToZero => {
                if p.b2_bar == 0.0 {
                    ExpectedLimit::One
                } else {
                    ExpectedLimit::AboveOne
                }
            }
            LimitCase::B2BarToZero => {
                let lhs = r_mkv / r_mfg;
                let rhs = (p.q_t + p.q_bar_t * (1.0 - p.s_t).powi(2)) / (p.q_t + p.q_bar_t * (1.0 - p.s_t));
                if differ(lhs, rhs) {
                    ExpectedLimit::AboveOne
                } else {
                    ExpectedLimit::Inconclusive
                }
            }
            LimitCase::B1ToZero | LimitCase::B1BarToZero => match derive(p) {
                Ok(d) if differ(d.riccati_u.d, d.riccati_w.d) => ExpectedLimit::AboveOne,
                _ => ExpectedLimit::Inconclusive,
            },
        }
    }

    /// Log-spaced range reaching well into the limit, ten points per decade.
    pub fn default_range(self) -> (f64, f64, usize) {
        match self {
            LimitCase::RToInfinity | LimitCase::RBarToInfinity => (1e-2, 1e5, 71),
            LimitCase::B2ToInfinity => (1e-1, 1e2, 31),
            LimitCase::B2BarToInfinity => (1e-1, 1e3, 41),
            LimitCase::B1ToInfinity => (1e-1, 1e3, 41),
            LimitCase::B1BarToInfinity => (1e-2, 1e2, 41),
            LimitCase::B2ToZero | LimitCase::B2BarToZero | LimitCase::B1ToZero | LimitCase::B1BarToZero => {
                (1e-4, 1e1, 51)
            }
        }
    }

    pub fn default_spec(self, base: &ModelParams, preset: Preset) -> SweepSpec {
        let (lo, hi, count) = self.default_range();
        SweepSpec {
            base: *base,
            parameter: self.parameter().to_string(),
            grid: SweepGrid::Log { lo, hi, count },
            preset,
        }
    }
}

/// The (case, preset) pairs that reproduce the published parameter studies
/// from the default model.
pub fn standard_suite() -> Vec<(LimitCase, Preset)> {
    use LimitCase::*;
    use Preset::*;
    vec![
        (RToInfinity, Full),
        (RBarToInfinity, Full),
        (B2ToInfinity, Full),
        (B2ToInfinity, StatesOnly),
        (B2ToInfinity, ControlsOnly),
        (B2ToZero, Full),
        (B2ToZero, StatesOnly),
        (B2ToZero, ControlsOnly),
        (B2BarToInfinity, Full),
        (B2BarToInfinity, ControlsOnly),
        (B2BarToZero, Full),
        (B2BarToZero, StatesOnly),
        (B2BarToZero, ControlsOnly),
        (B1ToInfinity, Full),
        (B1ToInfinity, StatesOnly),
        (B1ToInfinity, ControlsOnly),
        (B1BarToInfinity, Full),
        (B1BarToInfinity, StatesOnly),
        (B1BarToInfinity, ControlsOnly),
        (B1ToZero, Full),
        (B1ToZero, StatesOnly),
        (B1ToZero, ControlsOnly),
        (B1BarToZero, Full),
        (B1BarToZero, StatesOnly),
        (B1BarToZero, ControlsOnly),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitVerdict {
    pub case: LimitCase,
    pub preset: Preset,
    pub expected: ExpectedLimit,
    /// Parameter value and PoA at the extreme end of the sweep.
    pub tail_value: f64,
    pub tail_poa: f64,
    /// Parameter value and PoA one decade back from the end.
    pub reference_value: f64,
    pub reference_poa: f64,
    pub observed: String,
    pub pass: bool,
}

const DECAY: f64 = 0.5;
const CLOSE_TO_ONE: f64 = 1e-2;
const ABOVE_ONE: f64 = 1e-3;
const GROWTH: f64 = 2.0;
/// How far (in decades) the reference row may sit from exactly one decade
/// back.
const DECADE_SLACK: f64 = 0.1;

/// Judge the tail of a sweep against the predicted limit.
///
/// * limit 1: the last `|PoA − 1|` is below half its value one decade
///   back and below `1e-2`;
/// * limit > 1: the last three rows all have `PoA − 1 > 1e-3`;
/// * limit ∞: the last PoA exceeds twice its value one decade back.
///
/// "Last" means the largest parameter value for limits at infinity and
/// the smallest for limits at zero.
pub fn check_limit(result: &SweepResult, case: LimitCase) -> Result<LimitVerdict> {
    if result.parameter != case.parameter() {
        return Err(Error::InsufficientTail(format!(
            "sweep varies `{}`, case needs `{}`",
            result.parameter,
            case.parameter()
        )));
    }
    let mut tail: Vec<(f64, f64)> = result
        .rows
        .iter()
        .filter(|r| r.value > 0.0)
        .map(|r| (r.value, r.poa.unwrap_or(f64::NAN)))
        .collect();
    tail.sort_by(|a, b| a.0.total_cmp(&b.0));
    if case.towards() == Towards::Zero {
        tail.reverse();
    }
    // `tail` now runs towards the limit.
    let (last_value, last_poa) = *tail
        .last()
        .ok_or_else(|| Error::InsufficientTail("no positive parameter values".into()))?;
    let step = match case.towards() {
        Towards::Infinity => -1.0,
        Towards::Zero => 1.0,
    };
    let target = last_value.log10() + step;
    let (ref_value, ref_poa) = *tail
        .iter()
        .min_by(|a, b| (a.0.log10() - target).abs().total_cmp(&(b.0.log10() - target).abs()))
        .unwrap();
    if (ref_value.log10() - target).abs() > DECADE_SLACK {
        return Err(Error::InsufficientTail(format!(
            "no value within {DECADE_SLACK} decades of {:e}",
            10f64.powf(target)
        )));
    }
    if tail.len() < 3 {
        return Err(Error::InsufficientTail(format!("only {} rows", tail.len())));
    }
    let last_three = &tail[tail.len() - 3..];
    if last_three.iter().chain([&(ref_value, ref_poa)]).any(|(_, p)| !p.is_finite()) {
        return Err(Error::InsufficientTail("tail rows without a price of anarchy".into()));
    }

    let expected = case.expected(&result.base);
    let (gap, ref_gap) = ((last_poa - 1.0).abs(), (ref_poa - 1.0).abs());
    let (pass, observed) = match expected {
        ExpectedLimit::One => (
            gap < DECAY * ref_gap && gap < CLOSE_TO_ONE,
            format!("|PoA-1| went {ref_gap:.3e} -> {gap:.3e} over the last decade"),
        ),
        ExpectedLimit::AboveOne | ExpectedLimit::Inconclusive => {
            let min_gap = last_three.iter().map(|(_, p)| p - 1.0).fold(f64::INFINITY, f64::min);
            (
                expected == ExpectedLimit::AboveOne && min_gap > ABOVE_ONE,
                format!("smallest PoA-1 over the last three rows is {min_gap:.3e}"),
            )
        }
        ExpectedLimit::Infinity => (
            last_poa > GROWTH * ref_poa,
            format!("PoA grew {:.3e}x over the last decade", last_poa / ref_poa),
        ),
    };
    Ok(LimitVerdict {
        case,
        preset: result.preset,
        expected,
        tail_value: last_value,
        tail_poa: last_poa,
        reference_value: ref_value,
        reference_poa: ref_poa,
        observed,
        pass,
    })
}

/// Run the default sweep for `case` and judge it.
pub fn run_limit(case: LimitCase, base: &ModelParams, preset: Preset, grid_n: usize) -> Result<LimitVerdict> {
    let result = run(&case.default_spec(base, preset), grid_n)?;
    check_limit(&result, case)
}
