//! `xypurify`: batch front end for the purification library.
//!
//! Every subcommand writes CSV or JSON to stdout (or `--output`). Failures print a
//! one-line JSON object on stderr and exit with 2 (rejected input) or 3 (numeric).

mod output;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{num, Csv};
use xypurify::cavity::{integrate_full, AgreementOptions, AmplitudeState};
use xypurify::closed_form::{closed_form_fidelity, closed_form_general, closed_form_outcome_probability};
use xypurify::montecarlo::{run_trials_audit, run_trials_on, MonteCarloSummary};
use xypurify::pumping::{pump_with, PumpSettings};
use xypurify::{
    compare_figure5b, operational_time, run_round, CavityGeometry, Error, ProtocolConfig, PumpMode, RoundInput,
};

const THREADS_ENV: &str = "XYPURIFY_THREADS";

#[derive(Parser, Debug)]
#[command(name = "xypurify", version, about = "Cavity-mediated XY entanglement purification")]
struct Cli {
    /// Worker threads for grid sweeps (also read from XYPURIFY_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One purification round with Werner inputs.
    Round(RoundArgs),
    /// Data behind the three panels of the single-round figure.
    Fig5(Fig5Args),
    /// Pumping gain and growth per round over a fidelity grid.
    Fig6(Fig6Args),
    /// Pumping trace for a single fresh-pair fidelity.
    Pump(PumpArgs),
    /// Compare the atom-cavity dynamics with the XY ring.
    ValidateCavity(CavityArgs),
    /// Stochastic protocol runs from a JSON config.
    Montecarlo(MonteCarloArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct RoundArgs {
    #[arg(long)]
    f: f64,
    #[arg(long = "fprime")]
    f_prime: f64,
    /// Evolve for the operational time T.
    #[arg(long = "at-T", conflicts_with = "jt0", required_unless_present = "jt0")]
    at_t: bool,
    /// Evolve for J·t0.
    #[arg(long)]
    jt0: Option<f64>,
    #[arg(long = "J", default_value_t = 1.0, allow_negative_numbers = true)]
    coupling: f64,
    /// Index n of the operational time π(n + 1/2)/(3|J|).
    #[arg(long, default_value_t = 0)]
    time_index: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Panel {
    A,
    B,
    C,
}

#[derive(Args, Debug)]
struct Fig5Args {
    #[arg(long, value_enum)]
    panel: Panel,
    /// Grid start (Jt0 for panel a, f otherwise).
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
    /// Grid points, endpoints included.
    #[arg(long)]
    points: Option<usize>,
    /// Fidelity of all inputs for panel a.
    #[arg(long, default_value_t = 0.75)]
    f: f64,
}

#[derive(Args, Debug)]
struct Fig6Args {
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    #[arg(long, default_value_t = 0.55)]
    min: f64,
    #[arg(long, default_value_t = 0.95)]
    max: f64,
    #[arg(long, default_value_t = 9)]
    points: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    ClosedForm,
    Simulation,
    SchemeC,
}

#[derive(Args, Debug)]
struct PumpArgs {
    #[arg(long)]
    f: f64,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Mode::ClosedForm)]
    mode: Mode,
    /// Simulation mode: reset the stored pair to a Werner state before every round.
    #[arg(long)]
    twirl: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct CavityArgs {
    /// Detuning in units of g0.
    #[arg(long, default_value_t = 50.0, allow_negative_numbers = true)]
    delta: f64,
    /// Stationary-atom offset in units of the waist.
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    /// Conveyor speed in units of g0·w.
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    /// Run outside the adiabatic regime.
    #[arg(long)]
    force: bool,
    /// Also write the full-model amplitudes to this CSV file.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Initially excited atom for --trajectory.
    #[arg(long, default_value_t = 1)]
    atom: u8,
}

#[derive(Args, Debug)]
struct MonteCarloArgs {
    config: PathBuf,
    /// Per-trial statistics as CSV.
    #[arg(long)]
    trials_csv: Option<PathBuf>,
    /// Worker threads for the trials; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Use the density-matrix engine for every attempt.
    #[arg(long)]
    audit: bool,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(std::io::Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Serialize)]
struct ErrorReport {
    error: &'static str,
    message: String,
    exit_code: u8,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }

    fn report(&self) -> ErrorReport {
        let (error, message) = match self {
            CliError::Core(e) => (kind(e), e.to_string()),
            CliError::Io(e) => ("io", e.to_string()),
            CliError::Usage(m) => ("usage", m.clone()),
        };
        ErrorReport {
            error,
            message,
            exit_code: self.exit_code(),
        }
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Shape { .. } => "shape",
        Error::Label(_) => "label",
        Error::InvalidState(_) => "invalid_state",
        Error::DegenerateCoupling => "degenerate_coupling",
        Error::ZeroProbability { .. } => "zero_probability",
        Error::SingularExpression { .. } => "singular_expression",
        Error::NegativeDuration { .. } => "negative_duration",
        Error::BelowThreshold { .. } => "below_threshold",
        Error::Analysis(_) => "analysis",
        Error::Geometry(_) => "geometry",
        Error::NotAdiabatic { .. } => "not_adiabatic",
        Error::Stiffness { .. } => "stiffness",
        Error::Truncation { .. } => "truncation",
        Error::Config(_) => "config",
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = e.report();
            eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
            ExitCode::from(report.exit_code)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(
                s.parse()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={s} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = cli.output.as_deref();
    match cli.command {
        Command::Round(a) => cmd_round(a, out),
        Command::Fig5(a) => cmd_fig5(a, out),
        Command::Fig6(a) => cmd_fig6(a, out),
        Command::Pump(a) => cmd_pump(a, out),
        Command::ValidateCavity(a) => cmd_validate_cavity(a, out),
        Command::Montecarlo(a) => cmd_montecarlo(a, out),
    }
}

fn linspace(min: f64, max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 || !min.is_finite() || !max.is_finite() || min > max || (points == 1 && min != max) {
        return Err(CliError::Usage(format!("bad grid: {points} points on [{min}, {max}]")));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| if k + 1 == points { max } else { min + step * k as f64 })
        .collect())
}

#[derive(Serialize)]
struct RoundReport {
    f: f64,
    f_prime: f64,
    coupling: f64,
    jt0: f64,
    fidelity: f64,
    /// Weight of one accepted readout pattern.
    outcome_probability: f64,
    /// Weight of both accepted patterns.
    success_probability: f64,
    werner_deviation: f64,
    closed_form_fidelity: Option<f64>,
    closed_form_outcome_probability: Option<f64>,
}

fn cmd_round(a: RoundArgs, out: Option<&Path>) -> CliResult {
    let t0 = match a.jt0 {
        Some(jt0) => jt0 / a.coupling,
        None => operational_time(a.coupling, a.time_index)?.time,
    };
    let result = run_round(&RoundInput::werner(a.f, a.f_prime, t0, a.coupling)?)?;
    let (cf, cp) = if a.at_t {
        let c = closed_form_general(a.f, a.f_prime)?;
        (Some(c.fidelity), Some(c.outcome_probability))
    } else if a.f == a.f_prime {
        let f = closed_form_fidelity(t0, a.f, a.coupling).ok();
        (f, Some(closed_form_outcome_probability(t0, a.f, a.coupling)?))
    } else {
        (None, None)
    };
    let report = RoundReport {
        f: a.f,
        f_prime: a.f_prime,
        coupling: a.coupling,
        jt0: a.coupling * t0,
        fidelity: result.fidelity(),
        outcome_probability: result.success_probability / 2.0,
        success_probability: result.success_probability,
        werner_deviation: result.werner_deviation,
        closed_form_fidelity: cf,
        closed_form_outcome_probability: cp,
    };
    let w = output::open(out)?;
    match a.format {
        Format::Json => output::json(w, &report)?,
        Format::Csv => {
            let mut csv = Csv::new(
                w,
                &[
                    "f",
                    "f_prime",
                    "J",
                    "Jt0",
                    "fidelity",
                    "outcome_probability",
                    "success_probability",
                ],
            )?;
            csv.row(&[
                num(report.f),
                num(report.f_prime),
                num(report.coupling),
                num(report.jt0),
                num(report.fidelity),
                num(report.outcome_probability),
                num(report.success_probability),
            ])?;
            csv.finish()?;
        }
    }
    Ok(())
}

fn cmd_fig5(a: Fig5Args, out: Option<&Path>) -> CliResult {
    let w = output::open(out)?;
    match a.panel {
        Panel::A => {
            let grid = linspace(a.min.unwrap_or(0.0), a.max.unwrap_or(PI / 3.0), a.points.unwrap_or(181))?;
            let rows: Vec<f64> = grid
                .iter()
                .map(|&jt0| closed_form_fidelity(jt0, a.f, 1.0))
                .collect::<Result<_, _>>()?;
            let mut csv = Csv::new(w, &["Jt0", "fidelity"])?;
            for (jt0, fid) in grid.iter().zip(rows) {
                csv.row(&[num(*jt0), num(fid)])?;
            }
            csv.finish()?;
        }
        Panel::B => {
            let grid = linspace(a.min.unwrap_or(0.51), a.max.unwrap_or(1.0), a.points.unwrap_or(50))?;
            let rows = compare_figure5b(&grid)?;
            let mut csv = Csv::new(w, &["f", "xy", "cnot", "scheme_c_n2"])?;
            for r in rows {
                csv.row(&[num(r.f), num(r.xy), num(r.cnot), num(r.scheme_c)])?;
            }
            csv.finish()?;
        }
        Panel::C => {
            let grid = linspace(a.min.unwrap_or(0.0), a.max.unwrap_or(1.0), a.points.unwrap_or(21))?;
            let mut csv = Csv::new(w, &["f", "f_prime", "fidelity", "success_probability"])?;
            for &f in &grid {
                for &fp in &grid {
                    let c = closed_form_general(f, fp)?;
                    csv.row(&[num(f), num(fp), num(c.fidelity), num(c.success_probability())])?;
                }
            }
            csv.finish()?;
        }
    }
    Ok(())
}

fn cmd_fig6(a: Fig6Args, out: Option<&Path>) -> CliResult {
    if a.n_max == 0 {
        return Err(CliError::Usage("n-max must be at least 1".into()));
    }
    let grid = linspace(a.min, a.max, a.points)?;
    // Rows up to n_max, plus enough rounds for the n = 1 and n = 4 reference columns.
    let rows = xypurify::figure6_data(&grid, a.n_max.max(4))?;
    let per_f = a.n_max.max(4);
    let mut csv = Csv::new(
        output::open(out)?,
        &[
            "f",
            "n",
            "F_n",
            "F_hat",
            "F_bar",
            "P_succ",
            "fixed_point",
            "F_hat_n1",
            "F_hat_n4",
            "F_bar_n1",
            "F_bar_n4",
        ],
    )?;
    for block in rows.chunks(per_f) {
        let (r1, r4) = (&block[0], &block[3]);
        for r in block.iter().take(a.n_max) {
            csv.row(&[
                num(r.f),
                r.n.to_string(),
                num(r.final_fidelity),
                num(r.gain),
                num(r.growth),
                num(r.success_probability),
                num(r.fixed_point),
                num(r1.gain),
                num(r4.gain),
                num(r1.growth),
                num(r4.growth),
            ])?;
        }
    }
    csv.finish()?;
    Ok(())
}

fn cmd_pump(a: PumpArgs, out: Option<&Path>) -> CliResult {
    let mode = match a.mode {
        Mode::ClosedForm => PumpMode::ClosedForm,
        Mode::Simulation => PumpMode::Simulation,
        Mode::SchemeC => PumpMode::SchemeC,
    };
    let settings = PumpSettings {
        twirl: a.twirl,
        ..PumpSettings::default()
    };
    let trace = pump_with(a.f, a.n, mode, &settings)?;
    let w = output::open(out)?;
    match a.format {
        Format::Json => output::json(w, &trace)?,
        Format::Csv => {
            let mut csv = Csv::new(w, &["n", "fidelity", "F_bar", "success_probability"])?;
            for r in &trace.rounds {
                csv.row(&[
                    r.n.to_string(),
                    num(r.fidelity),
                    num(r.delta),
                    num(r.success_probability),
                ])?;
            }
            csv.finish()?;
        }
    }
    Ok(())
}

fn cmd_validate_cavity(a: CavityArgs, out: Option<&Path>) -> CliResult {
    let geom = CavityGeometry::solved(a.delta, a.ell, a.v)?;
    let opts = AgreementOptions {
        force: a.force,
        ..AgreementOptions::default()
    };
    let report = xypurify::cavity::xy_agreement_with(&geom, &opts)?;
    if let Some(path) = &a.trajectory {
        let traj = integrate_full(&geom, &AmplitudeState::atom(a.atom)?, &report.window)?;
        let mut csv = Csv::new(
            output::open(Some(path))?,
            &[
                "t", "re_c0", "im_c0", "re_c1", "im_c1", "re_c2", "im_c2", "re_c3", "im_c3", "leakage",
            ],
        )?;
        for s in &traj.samples {
            let mut row = vec![num(s.t)];
            for c in &s.c {
                row.push(num(c.re));
                row.push(num(c.im));
            }
            row.push(num(s.leakage()));
            csv.row(&row)?;
        }
        csv.finish()?;
    }
    output::json(output::open(out)?, &report)?;
    Ok(())
}

fn cmd_montecarlo(a: MonteCarloArgs, out: Option<&Path>) -> CliResult {
    let text = std::fs::read_to_string(&a.config)?;
    let config = ProtocolConfig::from_json(&text)?;
    let summary: MonteCarloSummary = match (a.audit, a.workers) {
        (true, _) => run_trials_audit(&config)?,
        (false, Some(w)) => run_trials_on(&config, w)?,
        (false, None) => xypurify::run_trials(&config)?,
    };
    log::info!(
        "{} trials: attempts {:.4} ± {:.4} (analytic {:.4}), final fidelity {:.6}",
        summary.trials,
        summary.attempts.mean,
        summary.attempts.ci_half_width,
        summary.analytic.attempts,
        summary.final_fidelity.mean
    );
    if let Some(path) = &a.trials_csv {
        let mut csv = Csv::new(
            output::open(Some(path))?,
            &[
                "trial",
                "rounds_attempted",
                "rounds_succeeded",
                "inconclusive",
                "pairs_consumed",
                "total_time",
                "messages_exchanged",
                "final_fidelity",
            ],
        )?;
        for s in &summary.per_trial {
            csv.row(&[
                s.trial.to_string(),
                s.rounds_attempted.to_string(),
                s.rounds_succeeded.to_string(),
                s.inconclusive.to_string(),
                s.pairs_consumed.to_string(),
                num(s.total_time),
                s.messages_exchanged.to_string(),
                num(s.final_fidelity),
            ])?;
        }
        csv.finish()?;
    }
    output::json(output::open(out)?, &summary)?;
    Ok(())
}
