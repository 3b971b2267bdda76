use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pspb::cli::{self, CliError, Plan, RunConfig};

#[derive(Parser)]
#[command(
    name = "pspb",
    version,
    about = "Piecewise polynomial joint trajectory generation and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write per-scheme profile and continuity CSVs.
    Generate(Common),
    /// Compare every scheme against the configured reference.
    Compare(Common),
    /// Time trajectory generation for the 434, 545 and 656 families.
    Benchmark {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        repetitions: usize,
    },
}

fn load(common: &Common) -> Result<(Plan, PathBuf), CliError> {
    let config = RunConfig::from_path(&common.config)?;
    let base = common
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let plan = config.resolve(&base)?;
    let out = common
        .out
        .clone()
        .or_else(|| plan.output_dir.clone())
        .ok_or_else(|| {
            CliError::Config("no output directory: pass --out or set output_dir".into())
        })?;
    Ok((plan, out))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(common) => {
            let (plan, out) = load(&common)?;
            for path in cli::run_generate(&plan, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Compare(common) => {
            let (plan, out) = load(&common)?;
            let report = cli::run_compare(&plan, &out)?;
            print!("{}", report.to_text());
        }
        Command::Benchmark {
            common,
            repetitions,
        } => {
            let (plan, out) = load(&common)?;
            let report = cli::run_benchmark(&plan, repetitions, &out)?;
            print!("{}", report.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
