//! `seqdec` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use seqdec_core::bounds::{gentle_suite, sen_suite, trace_suite, typicality_report, SuiteReport, TypicalityParams};
use seqdec_core::ensembles::{bpsk_capacity, holevo_capacity, private_capacity, ChannelParams};
use seqdec_core::{Engine, FamilyTag, Prior};

pub mod sweep;

pub use sweep::{run_sweep, write_csv, write_csv_file, ResultRow, SweepConfig, COLUMNS};

/// Worker-count override for the thread pool.
pub const WORKERS_ENV: &str = "SEQDEC_WORKERS";
/// Directory against which relative output paths are resolved.
pub const OUTPUT_DIR_ENV: &str = "SEQDEC_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
    /// A verification suite found counterexamples.
    #[error("{0} violation(s)")]
    Violations(u64),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        }
    }
}

impl From<seqdec_core::Error> for CliError {
    fn from(e: seqdec_core::Error) -> Self {
        use seqdec_core::Error::*;
        match e {
            InvalidParams(_)
            | UnknownFamily(_)
            | FamilyMismatch(_)
            | UnsupportedFamily(_)
            | IndexOutOfRange { .. }
            | DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "seqdec",
    version,
    about = "Sequential decoding simulator for bosonic channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print capacity formula values.
    Capacity(CapacityArgs),
    /// Simulate one decoder at one operating point.
    Simulate(SimulateArgs),
    /// Run a randomised bound-verification suite.
    Verify(VerifyArgs),
    /// Run a batch of simulations from a JSON config.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CapacityKind {
    Holevo,
    Bpsk,
    Private,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long = "type", value_enum)]
    pub kind: CapacityKind,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// One or more mean photon numbers (comma-separated or repeated).
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    pub ns: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    /// Communication over the pure-loss channel (coherent states).
    Comm,
    /// Quantum reading of a phase memory.
    Reading,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub task: Task,
    /// bpsk, gaussian, uniform or ppm, or a full prior name.
    #[arg(long)]
    pub prior: String,
    /// Reading transmitter family (reading_II or reading_III).
    #[arg(long)]
    pub family: Option<FamilyTag>,
    #[arg(long)]
    pub n: usize,
    /// Message count; defaults to n for ppm.
    #[arg(long = "M", conflicts_with = "rate")]
    pub messages: Option<usize>,
    /// Rate in bits per use, giving M = round(2^(n·rate)).
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub ns: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value = "gram")]
    pub engine: Engine,
    /// Also report the exact sequential-decoder error.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub codebooks: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub timing: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Sen,
    Gentle,
    Trace,
    Typicality,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    /// Largest Hilbert-space dimension sampled.
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// Largest projector count (sen) or ensemble size (gentle).
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Symbol distribution for the typicality suite.
    #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "0.89,0.11")]
    pub p: Vec<f64>,
    /// Blocklength for the typicality suite.
    #[arg(long = "n", default_value_t = 20)]
    pub blocklength: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Results go to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match configure_workers().and_then(|_| dispatch(cli.command, out)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// [`run_with`] on the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = value
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got `{value}`")))?;
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Capacity(args) => capacity(&args, out),
        Command::Simulate(args) => {
            let output = args.output.clone();
            emit(&run_sweep(&simulate_config(&args)?)?, output.as_deref(), out)
        }
        Command::Verify(args) => verify(&args, out),
        Command::Sweep(args) => {
            let text = std::fs::read_to_string(&args.config)
                .map_err(|e| CliError::Usage(format!("{}: {e}", args.config.display())))?;
            let config = SweepConfig::from_json(&text)?;
            let output = args.output.or_else(|| config.output.clone());
            emit(&run_sweep(&config)?, output.as_deref(), out)
        }
    }
}

fn emit(rows: &[ResultRow], path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(path) => write_csv_file(rows, &resolve_output(path)),
        None => write_csv(rows, out),
    }
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn capacity(args: &CapacityArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let values = args
        .ns
        .iter()
        .map(|&ns| {
            let params = ChannelParams::new(args.eta, ns)?;
            Ok(match args.kind {
                CapacityKind::Holevo => holevo_capacity(&params),
                CapacityKind::Bpsk => bpsk_capacity(args.eta * ns),
                CapacityKind::Private => private_capacity(&params),
            })
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    if let [value] = values[..] {
        writeln!(out, "{value:.6}")?;
    } else {
        writeln!(out, "ns,capacity")?;
        for (ns, value) in args.ns.iter().zip(&values) {
            writeln!(out, "{ns},{value:.6}")?;
        }
    }
    Ok(())
}

/// Maps the task and prior shorthand onto a one-point sweep.
pub fn simulate_config(args: &SimulateArgs) -> Result<SweepConfig, CliError> {
    let family = match (args.task, args.family) {
        (Task::Comm, None | Some(FamilyTag::Coherent)) => FamilyTag::Coherent,
        (Task::Comm, Some(f)) => return Err(CliError::Usage(format!("comm uses coherent states, not {f}"))),
        (Task::Reading, None) => FamilyTag::ReadingIII,
        (Task::Reading, Some(FamilyTag::Coherent)) => {
            return Err(CliError::Usage("reading needs reading_II or reading_III".into()))
        }
        (Task::Reading, Some(f)) => f,
    };
    let prior = match (args.prior.as_str(), args.task) {
        ("bpsk", Task::Comm) => Prior::BpskAmp,
        ("bpsk", Task::Reading) => Prior::BpskPhase,
        ("gaussian", _) => Prior::GaussianIso,
        ("uniform", _) => Prior::UniformPhase,
        (name, _) => name.parse()?,
    };
    let messages = match (args.messages, args.rate, prior) {
        (None, None, Prior::Ppm) => None,
        (None, None, _) => return Err(CliError::Usage("give --M or --rate".into())),
        (m, _, _) => m.map(|m| vec![m]),
    };
    let config = SweepConfig {
        family,
        prior,
        engine: args.engine,
        n: vec![args.n],
        messages,
        rate: args.rate.map(|r| vec![r]),
        ns: vec![args.ns],
        eta: vec![args.eta],
        trials: args.trials,
        codebooks: args.codebooks,
        seed: args.seed,
        exact: args.exact,
        timing: args.timing,
        cutoff: args.cutoff,
        output: args.output.clone(),
    };
    config.validate()?;
    Ok(config)
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = match args.suite {
        Suite::Sen => sen_suite(args.samples, args.dim, args.count, args.seed)?,
        Suite::Gentle => gentle_suite(args.samples, args.dim, args.count, args.seed)?,
        Suite::Trace => trace_suite(args.samples, args.dim, args.seed)?,
        Suite::Typicality => return typicality(args, out),
    };
    write_suite(&report, out)
}

fn write_suite(report: &SuiteReport, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "suite: {}", report.suite)?;
    writeln!(out, "samples: {}", report.samples)?;
    writeln!(out, "violations: {}", report.violations)?;
    writeln!(out, "min_slack: {:e}", report.min_slack)?;
    match report.violations {
        0 => Ok(()),
        v => Err(CliError::Violations(v)),
    }
}

fn typicality(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = TypicalityParams::new(args.p.clone(), args.blocklength, args.delta, args.epsilon)?;
    let r = typicality_report(&params)?;
    writeln!(out, "suite: typicality")?;
    writeln!(out, "entropy_bits: {:.9}", r.entropy_bits)?;
    writeln!(out, "mass: {:.9} (>= 1 - epsilon: {})", r.mass, r.mass_ok)?;
    writeln!(out, "size: {} (<= 2^(n(H+delta)): {})", r.size, r.size_ok)?;
    match r.log2_probability_range {
        Some((lo, hi)) => writeln!(
            out,
            "log2_probability: [{lo:.6}, {hi:.6}] (within n(H±delta): {})",
            r.probability_ok
        )?,
        None => writeln!(out, "log2_probability: empty typical set")?,
    }
    writeln!(out, "type_classes: {}", r.type_classes)?;
    // The mass property is asymptotic; only the size and probability
    // properties hold at every n.
    let violations = u64::from(!r.size_ok) + u64::from(!r.probability_ok);
    writeln!(out, "violations: {violations}")?;
    match violations {
        0 => Ok(()),
        v => Err(CliError::Violations(v)),
    }
}
