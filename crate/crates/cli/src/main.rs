mod validate;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sle_raman::kinetics::propagate;
use sle_raman::scenario::{emit_csv, parse_delays, Scenario, ScenarioError, PRESETS};
use sle_raman::signals::{
    fsrs_time_domain_sweep, static_limit_spectrum, tasp_spectrum, EvaluationPath, FsrsEvaluator,
    SignalError, Spectrum, TimeDomainOptions,
};
use sle_raman::units::s_to_fs;

#[derive(Parser, Debug)]
#[command(name = "sle-raman", version, about = "Stimulated Raman and transient absorption spectra of vibrational modes in a kinetic bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stimulated Raman spectra over a delay schedule.
    Fsrs(FsrsArgs),
    /// Transient absorption spectra over a delay schedule.
    Tasp(RunArgs),
    /// Bath-state populations over time.
    Populations(PopulationArgs),
    /// Run the internal consistency checks and print a pass/fail table.
    Validate(ValidateArgs),
    /// Print a scenario as TOML (handy as a template).
    Scenario(ScenarioArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Built-in preset (regime-I, regime-II) or path to a TOML scenario.
    #[arg(long)]
    scenario: String,
    /// Delays, e.g. `2fs,500fs:10ps:500fs`; defaults to the scenario's schedule.
    #[arg(long)]
    delays: Option<String>,
    /// Output CSV file; standard output when omitted or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PathArg {
    Analytic,
    Quadrature,
    TimeDomain,
}

impl From<PathArg> for EvaluationPath {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Analytic => EvaluationPath::Analytic,
            PathArg::Quadrature => EvaluationPath::Quadrature,
            PathArg::TimeDomain => EvaluationPath::TimeDomain,
        }
    }
}

#[derive(Args, Debug)]
struct FsrsArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Overrides the scenario's evaluation path.
    #[arg(long, value_enum)]
    path: Option<PathArg>,
    /// Add the population-weighted static spectrum as an extra column.
    #[arg(long)]
    static_limit: bool,
}

#[derive(Args, Debug)]
struct PopulationArgs {
    #[arg(long)]
    scenario: String,
    /// Sample times in the delay grammar, e.g. `0:20ps:100fs`.
    #[arg(long)]
    times: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Coarser grids; finishes in well under a minute.
    #[arg(long)]
    quick: bool,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: String,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Input(String),
    Numeric(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io(e) => Failure::Numeric(format!("i/o error: {e}")),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<SignalError> for Failure {
    fn from(e: SignalError) -> Self {
        match e {
            SignalError::InvalidGrid(m) => Failure::Input(m),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numeric(format!("i/o error: {e}"))
    }
}

fn load(name: &str) -> Result<Scenario, Failure> {
    Scenario::load(name).map_err(|e| match e {
        ScenarioError::NotFound(n) => Failure::Input(format!(
            "unknown preset or unreadable file '{n}' (presets: {})",
            PRESETS.join(", ")
        )),
        other => other.into(),
    })
}

fn delays_for(scenario: &Scenario, spec: Option<&str>) -> Result<Vec<f64>, Failure> {
    match spec {
        Some(s) => Ok(parse_delays(s)?),
        None => Ok(scenario.delays().to_vec()),
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::create(p)
                .map_err(|e| Failure::Input(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn write_spectra(
    spectra: &[Spectrum],
    static_limit: Option<&[Spectrum]>,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    let mut w = sink(out)?;
    emit_csv(spectra, static_limit, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_fsrs(args: &FsrsArgs) -> Result<(), Failure> {
    let scenario = load(&args.run.scenario)?;
    let delays = delays_for(&scenario, args.run.delays.as_deref())?;
    let path = args.path.map_or(scenario.path(), EvaluationPath::from);
    let model = scenario.model();
    let spectra = if path == EvaluationPath::TimeDomain {
        fsrs_time_domain_sweep(model, scenario.grid(), &delays, &TimeDomainOptions::default())?
    } else {
        FsrsEvaluator::new(model, scenario.grid(), path)?
            .with_quadrature(scenario.quadrature())
            .sweep(&delays)?
    };
    let statics = if args.static_limit {
        Some(
            delays
                .iter()
                .map(|&d| static_limit_spectrum(model, scenario.grid(), d))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    write_spectra(&spectra, statics.as_deref(), &args.run.out)
}

fn cmd_tasp(args: &RunArgs) -> Result<(), Failure> {
    let scenario = load(&args.scenario)?;
    let delays = delays_for(&scenario, args.delays.as_deref())?;
    let spectra = delays
        .iter()
        .map(|&d| tasp_spectrum(scenario.model(), scenario.grid(), d))
        .collect::<Result<Vec<_>, _>>()?;
    write_spectra(&spectra, None, &args.out)
}

fn cmd_populations(args: &PopulationArgs) -> Result<(), Failure> {
    let scenario = load(&args.scenario)?;
    let times = parse_delays(&args.times)?;
    if times.iter().any(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Failure::Input("times must be nonnegative and ascending".into()));
    }
    let model = scenario.model();
    let traj = propagate(model.bath(), model.initial(), &times)
        .map_err(|e| Failure::Numeric(e.to_string()))?;
    let mut text = String::from("time_fs");
    for s in 1..=model.states() {
        text.push_str(&format!(",state_{s}"));
    }
    text.push('\n');
    for (t, row) in traj.times.iter().zip(&traj.populations) {
        text.push_str(&format!("{:.8e}", s_to_fs(*t)));
        for p in row {
            text.push_str(&format!(",{p:.8e}"));
        }
        text.push('\n');
    }
    let mut w = sink(&args.out)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn cmd_scenario(args: &ScenarioArgs) -> Result<(), Failure> {
    let scenario = load(&args.scenario)?;
    print!("{}", scenario.to_toml());
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SLE_RAMAN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::Input(format!("SLE_RAMAN_THREADS must be a nonnegative integer, got '{raw}'"))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Numeric(format!("cannot start worker pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = configure_threads().and_then(|()| match &cli.command {
        Command::Fsrs(a) => cmd_fsrs(a),
        Command::Tasp(a) => cmd_tasp(a),
        Command::Populations(a) => cmd_populations(a),
        Command::Scenario(a) => cmd_scenario(a),
        Command::Validate(a) => {
            if validate::run(a.quick) {
                Ok(())
            } else {
                Err(Failure::Numeric("one or more checks failed".into()))
            }
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
