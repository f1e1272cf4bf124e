use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use betagas::harness::{self, ExperimentConfig, SampleOptions};
use betagas::validation::{self, Scale};
use betagas::Result;

#[derive(Parser)]
#[command(name = "betagas", version, about = "Beta-ensembles with a smooth pair interaction: solve, sample, compare")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; the desk-scale profile when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the configured seeds by `seed, seed + 1, ...`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the limiting measure and write equilibrium.csv.
    Eqsolve(Common),
    /// Run the configured chains and exact draws.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Continue chains from their persisted state files.
        #[arg(long)]
        resume: bool,
        /// Stop each chain after this many new samples, keeping its state.
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Statistics tables and plots for each sampled target.
    Stats(Common),
    /// Compare the modified ensemble with the Gaussian reference.
    Compare(Common),
    /// Run the acceptance suite and print one line per criterion.
    Validate {
        #[arg(long)]
        threads: Option<usize>,
        /// Smaller sample sizes for a quick smoke run.
        #[arg(long)]
        quick: bool,
        /// Only these criteria (1-10).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

fn set_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    set_threads(common.threads);
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::desk_scale(),
    };
    if let Some(seed) = common.seed {
        config = config.with_seed(seed);
    }
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("run"));
    Ok((config, dir))
}

fn run(cli: Cli) -> Result<i32> {
    let start = Instant::now();
    let code = match cli.command {
        Command::Eqsolve(common) => {
            let (config, dir) = load(&common)?;
            for s in harness::cmd_eqsolve(&config, &dir)? {
                println!("{}", s.line());
            }
            0
        }
        Command::Sample { common, resume, stop_after } => {
            let (config, dir) = load(&common)?;
            let runs = harness::cmd_sample(&config, &dir, SampleOptions { resume, stop_after })?;
            for s in &runs {
                println!("{}", s.line());
            }
            0
        }
        Command::Stats(common) => {
            let (config, dir) = load(&common)?;
            println!("{}", harness::commands::STATS_HEADER);
            for r in harness::cmd_stats(&config, &dir)? {
                println!("{}", r.csv());
            }
            0
        }
        Command::Compare(common) => {
            let (config, dir) = load(&common)?;
            let report = harness::cmd_compare(&config, &dir)?;
            for line in report.lines() {
                println!("{line}");
            }
            if report.passed {
                0
            } else {
                harness::EXIT_CHECKS_FAILED
            }
        }
        Command::Validate { threads, quick, only } => {
            set_threads(threads);
            let scale = if quick { Scale::Quick } else { Scale::Full };
            let reports = validation::run_criteria(scale, &only);
            for r in &reports {
                println!("{}", r.line());
            }
            if reports.iter().all(|r| r.passed) {
                0
            } else {
                harness::EXIT_CHECKS_FAILED
            }
        }
    };
    log::info!("finished in {:.1} s", start.elapsed().as_secs_f64());
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}
