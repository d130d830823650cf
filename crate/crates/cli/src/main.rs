use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rrdsp_core::harness::{
    export_csv, load_config, run_ber_experiment, run_order_sweep, run_selftest,
    run_sinr_experiment, ExperimentConfig, Sweep,
};
use rrdsp_core::Error;

/// Reduced-rank adaptive filtering experiments.
#[derive(Debug, Parser)]
#[command(name = "rrdsp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// BER learning curves against the number of received symbols.
    BerVsSymbols(RunArgs),
    /// BER against E_b/N_0 (the config must set `sweep = snr ...`).
    BerVsSnr(RunArgs),
    /// BER against the number of users (`sweep = users ...`).
    BerVsUsers(RunArgs),
    /// Beamformer SINR against the number of snapshots.
    SinrVsSnapshots(RunArgs),
    /// Model-order criterion against D, with the selected order per algorithm.
    OrderSweep(RunArgs),
    /// Runs the built-in invariant suites.
    Selftest {
        #[arg(long, env = "RRDSP_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Destination CSV file.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long, env = "RRDSP_SEED")]
    seed: Option<u64>,
    /// Monte Carlo runs; overrides the config.
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads; overrides the config.
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    if !args.config.is_file() {
        return Err(Failure::Usage(format!(
            "config file `{}` does not exist",
            args.config.display()
        )));
    }
    let mut cfg = load_config(&args.config).map_err(|e| match e {
        Error::Io(io) => Failure::Usage(format!("cannot read `{}`: {io}", args.config.display())),
        other => other.into(),
    })?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(workers) = args.workers {
        cfg.workers = Some(workers);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn require_sweep(cfg: &ExperimentConfig, wanted: &str) -> Result<(), Failure> {
    let actual = match cfg.sweep {
        Sweep::Symbols => "symbols",
        Sweep::Snr(_) => "snr",
        Sweep::Users(_) => "users",
    };
    if actual == wanted {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "config error at `run.sweep`: this command needs `{wanted}` but the config sweeps `{actual}`"
        )))
    }
}

fn write(series: &rrdsp_core::harness::MetricSeries, out: &Path) -> Result<(), Failure> {
    export_csv(series, out)
        .map_err(|e| Failure::Runtime(format!("cannot write `{}`: {e}", out.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::BerVsSymbols(args) => {
            let cfg = load(&args)?;
            require_sweep(&cfg, "symbols")?;
            write(&run_ber_experiment(&cfg)?, &args.out)
        }
        Command::BerVsSnr(args) => {
            let cfg = load(&args)?;
            require_sweep(&cfg, "snr")?;
            write(&run_ber_experiment(&cfg)?, &args.out)
        }
        Command::BerVsUsers(args) => {
            let cfg = load(&args)?;
            require_sweep(&cfg, "users")?;
            write(&run_ber_experiment(&cfg)?, &args.out)
        }
        Command::SinrVsSnapshots(args) => {
            let cfg = load(&args)?;
            write(&run_sinr_experiment(&cfg)?, &args.out)
        }
        Command::OrderSweep(args) => {
            let cfg = load(&args)?;
            let sweep = run_order_sweep(&cfg)?;
            write(&sweep.series, &args.out)?;
            for (label, d) in &sweep.selected {
                println!("{label}: D = {d}");
            }
            Ok(())
        }
        Command::Selftest { seed } => {
            let reports = run_selftest(seed);
            let mut failed = 0;
            for r in &reports {
                println!(
                    "{:<11} {} passed, {} failed",
                    r.name,
                    r.passed,
                    r.failures.len()
                );
                for (check, why) in &r.failures {
                    println!("  FAIL {check}: {why}");
                }
                failed += r.failures.len();
            }
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Runtime(format!("{failed} selftest checks failed")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
