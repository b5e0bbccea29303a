//! `vacpair`: momentum spectra, densities and delay sweeps from the command line.
//!
//! Exit codes: 0 on success, 1 for usage and input errors, 2 when the physics
//! of the request fails (supercritical field, no turning points, a failed
//! cross-method check).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vacpair_core::{Method, SignMode};

mod commands;

#[derive(Debug, Parser)]
#[command(name = "vacpair", version, about = "Vacuum pair production of charged scalars in pulsed electric fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distribution f(k) on a longitudinal momentum grid, as CSV.
    Spectrum(SpectrumArgs),
    /// Pair number density from a two-dimensional momentum quadrature, as JSON.
    Density(DensityArgs),
    /// Evaluate an observable over a list of time delays or pulse counts.
    SweepDelay(SweepArgs),
    /// Complex turning points and singulants per momentum, as CSV.
    TurningPoints(TurningArgs),
    /// Several methods on one grid, rows interleaved per momentum.
    Compare(CompareArgs),
    /// Exact scalar solver against the kinetic equation; JSON pass/fail report.
    Validate(ValidateArgs),
    /// Line plot of one or more spectrum CSV files as SVG.
    Render(RenderArgs),
    /// Run a declarative recipe file, writing <name>.csv and <name>.svg.
    Recipe(RecipeArgs),
    /// Write a field configuration file from a named constructor.
    MakeConfig(MakeConfigArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Field configuration JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the gauge constant: a number, `paper_2pulse` or `vanish_at_minus_infinity`.
    #[arg(long)]
    gauge: Option<String>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    kpar_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    kpar_max: f64,
    /// Number of intervals; the grid has one more point.
    #[arg(long, default_value_t = 200)]
    kpar_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    kperp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Riccati,
    Born,
    Semiclassical,
    Qve,
    Fermion,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Riccati => Method::Riccati,
            MethodArg::Born => Method::Born,
            MethodArg::Semiclassical => Method::Semiclassical,
            MethodArg::Qve => Method::Qve,
            MethodArg::Fermion => Method::Fermion,
        }
    }
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Riccati)]
    method: MethodArg,
    /// Also write an SVG plot here.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    log_y: bool,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    kpar_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    kpar_max: f64,
    /// Even number of intervals along k∥.
    #[arg(long, default_value_t = 60)]
    kpar_steps: usize,
    #[arg(long, default_value_t = 2.0)]
    kperp_max: f64,
    /// Even number of intervals along k⊥.
    #[arg(long, default_value_t = 30)]
    kperp_steps: usize,
    /// Largest boundary value of f relative to its peak.
    #[arg(long, default_value_t = 1e-4)]
    eps_tail: f64,
    /// Only the riccati method integrates densities.
    #[arg(long, value_enum, default_value_t = MethodArg::Riccati)]
    method: MethodArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Sweep specification JSON (template, variable, values, observable).
    #[arg(long)]
    spec: PathBuf,
    /// Override the method named in the specification.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

#[derive(Debug, Args)]
struct TurningArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    /// Keep only the points that dominate the pair weight.
    #[arg(long)]
    dominant: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    /// Methods to compare, in column order.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Riccati, MethodArg::Fermion])]
    methods: Vec<MethodArg>,
    /// Reference method for the summary on standard error; the first listed when omitted.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    log_y: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Field to check; the built-in single- and two-pulse suite when omitted.
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    kpar_min: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    kpar_max: f64,
    #[arg(long, default_value_t = 20)]
    kpar_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    kperp: f64,
    /// Largest accepted relative difference.
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    /// Method checked against the exact solver.
    #[arg(long, value_enum, default_value_t = MethodArg::Qve)]
    method: MethodArg,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Spectrum CSV files; each method in each file becomes one series.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    log_y: bool,
    #[arg(long, default_value = "")]
    title: String,
    #[arg(long, default_value = "k_parallel")]
    x_label: String,
    #[arg(long, default_value = "f")]
    y_label: String,
}

#[derive(Debug, Args)]
struct RecipeArgs {
    recipe: PathBuf,
    /// Directory for the outputs; created if missing.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstructorArg {
    SinglePulse,
    EqualSignAssist,
    AlternatingAssist,
    PulseTrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignArg {
    Equal,
    Alternating,
}

impl From<SignArg> for SignMode {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Equal => SignMode::Equal,
            SignArg::Alternating => SignMode::Alternating,
        }
    }
}

#[derive(Debug, Args)]
struct MakeConfigArgs {
    #[arg(value_enum)]
    constructor: ConstructorArg,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    inverse_width: Option<f64>,
    #[arg(long)]
    e1: Option<f64>,
    #[arg(long)]
    w1: Option<f64>,
    #[arg(long)]
    e2: Option<f64>,
    #[arg(long)]
    w2: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    sign_mode: Option<SignArg>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delay: f64,
    #[arg(long)]
    gauge: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Physics(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Physics(_) => 2,
        }
    }
}

impl From<vacpair_core::Error> for Failure {
    fn from(e: vacpair_core::Error) -> Self {
        if e.is_physics_domain() {
            Failure::Physics(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Physics(m) => eprintln!("physics error: {m}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
