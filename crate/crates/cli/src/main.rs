//! `antsel`: experiment harness for transmit antenna subset selection.

use std::path::PathBuf;
use std::process::ExitCode;

use antsel_core::experiment::{
    cmd_compare, cmd_convergence, cmd_oracle, cmd_run, cmd_sweep_snr, CommandOptions, CommandReport,
    ExperimentSpec,
};
use antsel_core::oracle::DEFAULT_BUDGET;
use antsel_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "antsel", version, about = "Transmit antenna subset selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the GA for every (n_t, SNR) cell and replicate.
    Run(CommonArgs),
    /// Capacity of the selected subsets across the SNR grid.
    SweepSnr(CommonArgs),
    /// Per-generation traces of adaptive and plain mutation.
    Convergence(CommonArgs),
    /// Adaptive vs plain vs exhaustive oracle, one row per n_t.
    Compare(CommonArgs),
    /// Exhaustive search over all subsets.
    Oracle(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; overrides the spec's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest C(n_tx, n_t) the oracle may enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    oracle_budget: u64,
    /// Worker threads for replicates (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

const EXIT_SPEC: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Numeric(_) => EXIT_NUMERIC,
        Error::Io(_) | Error::Internal(_) => 1,
        _ => EXIT_SPEC,
    }
}

fn load_spec(args: &CommonArgs) -> Result<(ExperimentSpec, CommandOptions), Error> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if let Ok(raw) = std::env::var("ANTSEL_SEED") {
        let seed = raw
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("ANTSEL_SEED={raw:?} is not an unsigned integer")))?;
        spec.base_seed = Some(seed);
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| spec.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set output_dir".into()))?;
    let opts = CommandOptions {
        out_dir,
        oracle_budget: args.oracle_budget,
    };
    Ok((spec, opts))
}

fn dispatch(cli: Cli) -> Result<CommandReport, Error> {
    let (args, command): (&CommonArgs, fn(&ExperimentSpec, &CommandOptions) -> _) = match &cli.command {
        Command::Run(a) => (a, cmd_run),
        Command::SweepSnr(a) => (a, cmd_sweep_snr),
        Command::Convergence(a) => (a, cmd_convergence),
        Command::Compare(a) => (a, cmd_compare),
        Command::Oracle(a) => (a, cmd_oracle),
    };
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let (spec, opts) = load_spec(args)?;
    command(&spec, &opts)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            println!("results written to {}", report.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("antsel: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
