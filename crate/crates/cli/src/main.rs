use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use polarstab::{Format, LawVariant};
use polarstab_cli::analyze::{analyze, read_rows};
use polarstab_cli::config::{parse_config_for, ExperimentSpec, Mode};
use polarstab_cli::run_experiment;

const EXIT_NOT_SETTLED: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// Point stabilization experiments for a differential-drive robot.
#[derive(Parser)]
#[command(name = "polarstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single episodes.
    Run(ExperimentArgs),
    /// Monte-Carlo campaigns.
    Mc(ExperimentArgs),
    /// Starts spread on a circle around the goal.
    Ring(ExperimentArgs),
    /// Lyapunov trace report of a trajectory CSV.
    Analyze {
        csv: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Batch file of [[experiment]] tables; without it the laboratory defaults run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the file.
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    seed: Option<u64>,
    /// Output directory; each experiment writes to a subdirectory named after it.
    #[arg(long, default_value = "polarstab-out")]
    out: PathBuf,
    /// Trajectory file format.
    #[arg(long, value_enum, default_value_t = TrajectoryFormat::Csv)]
    format: TrajectoryFormat,
    /// Monte-Carlo run count, overriding the file.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    runs: Option<u64>,
    #[arg(long, value_enum)]
    law: Option<Law>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrajectoryFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    TwoRegime,
    GlobalOnly,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run(args) => experiments(Mode::Single, "run", args),
        Command::Mc(args) => experiments(Mode::MonteCarlo, "mc", args),
        Command::Ring(args) => experiments(Mode::Ring, "ring", args),
        Command::Analyze { csv, format } => {
            let report = read_rows(&csv).and_then(|rows| analyze(&rows));
            match report {
                Ok(r) => {
                    match format {
                        ReportFormat::Text => print!("{}", r.to_text()),
                        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&r).expect("plain data")),
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_CONFIG)
                }
            }
        }
    }
}

fn experiments(mode: Mode, default_name: &str, args: ExperimentArgs) -> ExitCode {
    let mut specs = match &args.config {
        None => vec![ExperimentSpec::defaults(default_name, mode)],
        Some(path) => {
            let parsed = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .and_then(|text| parse_config_for(&text, mode).map_err(anyhow::Error::from));
            match parsed {
                Ok(specs) => specs,
                Err(e) => {
                    eprintln!("error: {}: {e:#}", path.display());
                    return ExitCode::from(EXIT_CONFIG);
                }
            }
        }
    };
    for spec in &mut specs {
        if let Some(seed) = args.seed {
            spec.sim.seed = seed;
        }
        if let Some(runs) = args.runs {
            spec.runs = runs as usize;
        }
        if let Some(law) = args.law {
            spec.sim.law = match law {
                Law::TwoRegime => LawVariant::TwoRegime,
                Law::GlobalOnly => LawVariant::GlobalOnly,
            };
        }
    }
    let format = match args.format {
        TrajectoryFormat::Csv => Format::Csv,
        TrajectoryFormat::Json => Format::Json,
    };

    let mut all_ok = true;
    for spec in &specs {
        match run_experiment(spec, &args.out, format) {
            Ok(report) => {
                print!("{}", report.table);
                println!("  outputs in {}", report.dir.display());
                all_ok &= report.succeeded();
            }
            Err(e) => {
                eprintln!("error: experiment {}: {e:#}", spec.name);
                return ExitCode::FAILURE;
            }
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_SETTLED)
    }
}
