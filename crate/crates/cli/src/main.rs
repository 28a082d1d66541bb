//! `fpi`: finite-part summation runs from the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O error, 1 when `selftest` finds a failing criterion.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fpi_core::moments::SystemId;
use fpi_core::Error;

use commands::Output;
use config::{BetaSpec, Method, PadeDegrees, RunConfig, Source};

#[derive(Parser)]
#[command(name = "fpi", version, about = "Sum divergent Stieltjes series by finite-part integration")]
struct Cli {
    /// Worker threads for the per-coupling evaluations (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum System {
    PtCubic,
    Quartic,
    Sextic,
    Funnel,
}

impl From<System> for SystemId {
    fn from(s: System) -> Self {
        match s {
            System::PtCubic => SystemId::PtCubic,
            System::Quartic => SystemId::Quartic,
            System::Sextic => SystemId::Sextic,
            System::Funnel => SystemId::Funnel,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    /// Raw perturbation coefficients.
    Rs,
    /// Stieltjes moments.
    Mu,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Built-in system whose moments are generated.
    #[arg(long, value_enum)]
    system: Option<System>,
    /// Moment file written by `fpi moments` or by hand.
    #[arg(long, value_name = "FILE")]
    moments: Option<PathBuf>,
}

impl SourceArgs {
    fn source(&self) -> Source {
        match (&self.system, &self.moments) {
            (Some(s), _) => Source::System((*s).into()),
            (None, Some(p)) => Source::File(p.clone()),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct BetaArgs {
    /// Comma-separated couplings: integers, decimals or p/q.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    beta: Vec<String>,
    /// Logarithmic grid `START,STOP,POINTS_PER_DECADE`.
    #[arg(long, value_name = "START,STOP,PPD")]
    grid: Option<String>,
}

impl BetaArgs {
    fn spec(&self) -> Result<BetaSpec, Error> {
        let Some(grid) = &self.grid else {
            return Ok(BetaSpec::List(self.beta.clone()));
        };
        let parts: Vec<&str> = grid.split(',').map(str::trim).collect();
        let [start, stop, ppd] = parts[..] else {
            return Err(usage(format!("--grid {grid:?}: expected START,STOP,PPD")));
        };
        let per_decade = ppd
            .parse()
            .map_err(|_| usage(format!("--grid {grid:?}: {ppd:?} is not a point count")))?;
        Ok(BetaSpec::Grid {
            start: start.into(),
            stop: stop.into(),
            per_decade,
        })
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output CSV (default: stdout).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Leave wall_time_ms empty so identical runs give identical files.
    #[arg(long)]
    no_timing: bool,
}

impl OutputArgs {
    fn output(&self) -> Output {
        Output {
            path: self.out.clone(),
            no_timing: self.no_timing,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a system's series and write it as a moment file.
    Moments {
        #[arg(long, value_enum)]
        system: System,
        /// Number of moments.
        #[arg(short = 'd')]
        count: usize,
        #[arg(long, value_enum, default_value = "mu")]
        convention: ConventionArg,
        /// Output file (default: stdout).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Finite-part summation, optionally alongside Padé and partial sums.
    Sum(SumArgs),
    /// Padé approximants alone.
    Pade {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        betas: BetaArgs,
        /// Degrees N/M (numerator/denominator); uses N+M+1 moments.
        #[arg(long, value_name = "N/M")]
        pade: PadeDegrees,
        #[arg(long)]
        digits: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Head-and-tail series against the correction term, per coupling.
    CompareTerms {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        betas: BetaArgs,
        /// Number of moments (default: all moments of a file).
        #[arg(short = 'd')]
        count: Option<usize>,
        #[arg(long)]
        digits: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the acceptance criteria.
    Selftest {
        /// Run only this criterion; repeatable.
        #[arg(long = "criterion", value_name = "N")]
        criteria: Vec<u32>,
    },
}

#[derive(Args)]
struct SumArgs {
    /// Run configuration (JSON); a sidecar from an earlier run also works.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["system", "moments", "beta", "grid"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    system: Option<System>,
    #[arg(long, value_name = "FILE")]
    moments: Option<PathBuf>,
    /// Number of moments (default: all moments of a file).
    #[arg(short = 'd')]
    count: Option<usize>,
    #[arg(long)]
    digits: Option<u32>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    beta: Vec<String>,
    #[arg(long, value_name = "START,STOP,PPD")]
    grid: Option<String>,
    /// Comma-separated subset of finite_part, pade, partial_sum.
    #[arg(long, value_delimiter = ',', default_value = "finite_part")]
    methods: Vec<Method>,
    /// Padé degrees N/M (default: the diagonal-minus-one pair the moments allow).
    #[arg(long, value_name = "N/M")]
    pade: Option<PadeDegrees>,
    /// Digits that must survive cancellation.
    #[arg(long, default_value_t = 30)]
    output_digits: u32,
    /// JSON sidecar path (default: next to --out).
    #[arg(long, value_name = "FILE")]
    sidecar: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

impl SumArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        if let Some(path) = &self.config {
            let mut cfg = RunConfig::load(path)?;
            if self.count.is_some() {
                cfg.moments = self.count;
            }
            if self.digits.is_some() {
                cfg.digits = self.digits;
            }
            return Ok(cfg);
        }
        let source = match (&self.system, &self.moments) {
            (Some(s), None) => Source::System((*s).into()),
            (None, Some(p)) => Source::File(p.clone()),
            _ => return Err(usage("give exactly one of --system, --moments or --config")),
        };
        let betas = BetaArgs {
            beta: self.beta.clone(),
            grid: self.grid.clone(),
        };
        if betas.grid.is_some() == !betas.beta.is_empty() {
            return Err(usage("give exactly one of --beta or --grid"));
        }
        Ok(RunConfig {
            source,
            moments: self.count,
            digits: self.digits,
            betas: betas.spec()?,
            methods: self.methods.clone(),
            pade: self.pade,
            output_digits: self.output_digits,
        })
    }
}

fn usage(detail: impl Into<String>) -> Error {
    Error::Validation {
        op: "run_config",
        detail: detail.into(),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 4,
        e if e.is_numeric() => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| usage(format!("--jobs {jobs}: {e}")))?;
    }
    match cli.command {
        Command::Moments {
            system,
            count,
            convention,
            out,
        } => commands::moments(
            system.into(),
            count,
            matches!(convention, ConventionArg::Rs),
            out.as_deref(),
        )?,
        Command::Sum(args) => {
            commands::sum(args.config()?, &args.output.output(), args.sidecar.as_deref())?
        }
        Command::Pade {
            source,
            betas,
            pade,
            digits,
            output,
        } => commands::pade(source.source(), pade, digits, &betas.spec()?, &output.output())?,
        Command::CompareTerms {
            source,
            betas,
            count,
            digits,
            output,
        } => {
            let cfg = RunConfig {
                source: source.source(),
                moments: count,
                digits,
                betas: betas.spec()?,
                methods: vec![Method::FinitePart],
                pade: None,
                output_digits: 30,
            };
            commands::compare_terms(cfg, &output.output())?
        }
        Command::Selftest { criteria } => return commands::selftest(&criteria),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("fpi: error in {}: {e}", e.module());
            ExitCode::from(exit_code(&e))
        }
    }
}
