use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlt_harness::config::ExperimentConfig;
use nlt_harness::error::HarnessError;
use nlt_harness::exit;
use nlt_harness::inspect::inspect_checkpoint;
use nlt_harness::verify::{verify_ops, Fault, Level};
use nlt_harness::{blowup_study, simulate, sweep, vanishing};

#[derive(Debug, Parser)]
#[command(name = "nlt", version, about = "Nonlocal transport experiments")]
struct Cli {
    /// Output directory (defaults to outputs.dir in the config, else ./nlt-out).
    #[arg(long, global = true, env = "NLT_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and studies.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration to its horizon or a terminal status.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the cartesian product of the [sweep] lists and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run each ε of a descending list and report L²_T L² differences.
    VanishingViscosity {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated ε list overriding the config.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Simulate with a blow-up threshold of 100× the initial indicator.
    BlowupStudy {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check operator identities, oracle agreement and Littlewood-Paley bounds.
    VerifyOps {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Corrupt an operator table before checking.
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
    /// Checkpoint utilities.
    Checkpoint {
        #[command(subcommand)]
        action: CheckpointAction,
    },
}

#[derive(Debug, Subcommand)]
enum CheckpointAction {
    /// Validate a checkpoint and print its header and value range as JSON.
    Inspect { path: PathBuf },
}

fn out_dir(cli_out: &Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| cfg.and_then(|c| c.outputs.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("nlt-out"))
}

fn print_json(value: &impl serde::Serialize) -> Result<(), HarnessError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    ExperimentConfig::load(path)
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = load(&config)?;
            let o = simulate(&cfg, Some(&out_dir(&cli.out, Some(&cfg))))?;
            print_json(&o.summary)?;
            Ok(exit::for_status(o.status()))
        }
        Command::BlowupStudy { config } => {
            let cfg = load(&config)?;
            let o = blowup_study(&cfg, Some(&out_dir(&cli.out, Some(&cfg))))?;
            print_json(&o.summary)?;
            Ok(exit::for_status(o.status()))
        }
        Command::Sweep { config } => {
            let cfg = load(&config)?;
            let dir = out_dir(&cli.out, Some(&cfg));
            let rows = sweep::sweep(&cfg, cli.workers, Some(&dir))?;
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            eprintln!("{} points, {failed} member errors, table in {}", rows.len(), dir.join(sweep::SWEEP_FILE).display());
            Ok(exit::FINISHED)
        }
        Command::VanishingViscosity { config, eps } => {
            let cfg = load(&config)?;
            let dir = out_dir(&cli.out, Some(&cfg));
            let report = vanishing::vanishing_viscosity(&cfg, eps.as_deref(), cli.workers, Some(&dir))?;
            print_json(&report)?;
            Ok(if report.strictly_decreasing { exit::FINISHED } else { exit::VERIFY_FAILED })
        }
        Command::VerifyOps {
            level,
            seed,
            inject_fault,
        } => {
            let report = verify_ops(level, seed, inject_fault, cli.out.as_deref())?;
            print_json(&report)?;
            for name in report.failed_checks() {
                eprintln!("check failed: {name}");
            }
            Ok(if report.passed { exit::FINISHED } else { exit::VERIFY_FAILED })
        }
        Command::Checkpoint {
            action: CheckpointAction::Inspect { path },
        } => {
            print_json(&inspect_checkpoint(&path)?)?;
            Ok(exit::FINISHED)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Config(_) => exit::USAGE,
                HarnessError::MemberFailed { .. } => exit::VERIFY_FAILED,
                _ => exit::OTHER,
            }
        }
    };
    ExitCode::from(code as u8)
}
