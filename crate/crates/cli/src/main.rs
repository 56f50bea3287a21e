//! `mfg-poa`: cost reports, efficiency verdicts, sweeps, limit checks and
//! oracle runs for linear-quadratic extended mean field games.
//!
//! Exit codes: 0 success, 1 I/O, parse or usage error, 2 invalid model,
//! 3 unknown parameter, 4 an oracle or limit check failed.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mfg_poa::model::{validate, ModelParams};
use mfg_poa::socialcost::{efficiency, price_of_anarchy};
use mfg_poa::sweep::{self, standard_suite, ExpectedLimit, Preset, SweepGrid, SweepSpec};
use mfg_poa::trajectories::{TimeGrid, DEFAULT_GRID_POINTS};
use mfg_poa::verify::{oracle_suite, McConfig, SuiteConfig};
use mfg_poa::Error;

#[derive(Parser)]
#[command(name = "mfg-poa", version, about = "Price of Anarchy for LQ extended mean field games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Social costs of equilibrium and planner, and their ratio, as JSON.
    Poa(Common),
    /// Whether the equilibrium is efficient, as JSON.
    Efficiency(Common),
    /// PoA over a range of one parameter, as CSV.
    Sweep(SweepArgs),
    /// Tail behaviour of the standard limit sweeps, as JSON.
    Limits(LimitArgs),
    /// Closed forms against RK4 and Monte Carlo, as a table.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Model file (JSON with every parameter).
    #[arg(long)]
    model: PathBuf,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time grid points, odd and at least 3.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    Log,
    Linear,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    param: String,
    #[arg(long)]
    lo: f64,
    #[arg(long)]
    hi: f64,
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, value_enum, default_value_t = Scale::Log)]
    scale: Scale,
    /// Interaction preset applied to the model before sweeping.
    #[arg(long, default_value_t = Preset::Full)]
    preset: Preset,
}

#[derive(Args)]
struct LimitArgs {
    #[command(flatten)]
    common: Common,
    /// Only run cases for this parameter.
    #[arg(long)]
    param: Option<String>,
    /// Only run cases under this preset.
    #[arg(long)]
    preset: Option<Preset>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Distort the closed forms by this relative amount (negative control).
    #[arg(long, default_value_t = 0.0, hide = true)]
    perturb_closed_form: f64,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_)
            | Error::BadGrid(_)
            | Error::InvalidConfig(_)
            | Error::IncompatibleGrid(_)
            | Error::InsufficientTail(_) => 1,
            Error::UnknownParameter(_) => 3,
            _ => 2,
        };
        let message = match e {
            Error::InvalidModel(violations) => {
                let mut m = String::from("model fails validation:");
                for v in violations {
                    m.push_str("\n  ");
                    m.push_str(&v);
                }
                m
            }
            other => other.to_string(),
        };
        Failure::new(code, message)
    }
}

type Outcome = Result<(), Failure>;

fn load_model(path: &Path) -> Result<ModelParams, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(1, format!("cannot read {}: {e}", path.display())))?;
    ModelParams::from_json(&text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn require_valid(params: &ModelParams) -> Outcome {
    Ok(validate(params).require_solvable()?)
}

fn check_grid_n(n: usize) -> Outcome {
    if n < 3 || n % 2 == 0 {
        return Err(Failure::new(1, format!("--grid-n must be odd and at least 3, got {n}")));
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::new(1, format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::new(1, format!("cannot write output: {e}")))
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

fn setup(c: &Common) -> Result<ModelParams, Failure> {
    check_grid_n(c.grid_n)?;
    let params = load_model(&c.model)?;
    require_valid(&params)?;
    Ok(params)
}

fn cmd_poa(c: &Common) -> Outcome {
    let params = setup(c)?;
    let report = price_of_anarchy(&params, &TimeGrid::new(params.horizon, c.grid_n)?)?;
    emit(&c.out, &to_json(&report))
}

fn cmd_efficiency(c: &Common) -> Outcome {
    let params = setup(c)?;
    emit(&c.out, &to_json(&efficiency(&params)?))
}

fn cmd_sweep(a: &SweepArgs) -> Outcome {
    let params = setup(&a.common)?;
    let (lo, hi, count) = (a.lo, a.hi, a.count);
    let grid = match a.scale {
        Scale::Log => SweepGrid::Log { lo, hi, count },
        Scale::Linear => SweepGrid::Linear { lo, hi, count },
    };
    let spec = SweepSpec {
        base: params,
        parameter: a.param.clone(),
        grid,
        preset: a.preset,
    };
    let result = sweep::run(&spec, a.common.grid_n)?;
    emit(&a.common.out, &result.to_csv())
}

fn cmd_limits(a: &LimitArgs) -> Outcome {
    let params = setup(&a.common)?;
    if let Some(p) = &a.param {
        params.get(p)?;
    }
    let cases: Vec<_> = standard_suite()
        .into_iter()
        .filter(|(case, preset)| {
            a.param.as_deref().map_or(true, |p| p == case.parameter()) && a.preset.map_or(true, |q| q == *preset)
        })
        .collect();
    let mut verdicts = Vec::with_capacity(cases.len());
    for (case, preset) in cases {
        verdicts.push(sweep::run_limit(case, &params, preset, a.common.grid_n)?);
    }
    emit(&a.common.out, &to_json(&verdicts))?;
    let failed: Vec<_> = verdicts
        .iter()
        .filter(|v| v.expected != ExpectedLimit::Inconclusive && !v.pass)
        .map(|v| format!("{} [{}]: {}", v.case.name(), v.preset, v.observed))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(4, format!("limit checks failed:\n  {}", failed.join("\n  "))))
    }
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let params = setup(&a.common)?;
    let cfg = SuiteConfig {
        grid_n: a.common.grid_n,
        mc: McConfig {
            n_paths: a.paths,
            n_steps: a.steps,
            seed: a.seed,
            antithetic: false,
        },
        perturb: a.perturb_closed_form,
    };
    let checks = oracle_suite(&params, cfg)?;
    let mut table = format!(
        "{:<38} {:>22} {:>22} {:>10} {:>10}  result\n",
        "check", "closed form", "oracle", "delta", "tolerance"
    );
    for c in &checks {
        table.push_str(&format!(
            "{:<38} {:>22.15e} {:>22.15e} {:>10.3e} {:>10.3e}  {}\n",
            c.name,
            c.closed_form,
            c.oracle,
            c.delta,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    emit(&a.common.out, &table)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::new(4, format!("{failed} of {} oracle checks failed", checks.len())))
    }
}

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var("MFG_POA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::new(1, format!("MFG_POA_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::new(1, format!("cannot size thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match &cli.command {
        Command::Poa(c) => cmd_poa(c),
        Command::Efficiency(c) => cmd_efficiency(c),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Limits(a) => cmd_limits(a),
        Command::Verify(a) => cmd_verify(a),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mfg-poa: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
