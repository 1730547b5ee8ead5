use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pipeloc::config::{load_pipeline_config, load_sim_config, PipelineConfig};
use pipeloc::{CliError, Result};
use pipeloc_core::SimConfig;

#[derive(Parser)]
#[command(name = "pipeloc", version, about = "Localize an in-pipe robot from wheel encoders and a rangefinder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic run.
    Simulate {
        /// Simulation config (TOML). Defaults describe a 1210 in pipe.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Filter, calibrate and smooth a sensor log.
    Localize {
        log: PathBuf,
        /// Pipeline config (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a trajectory against ground truth and block crossings.
    Evaluate {
        trajectory: PathBuf,
        truth: PathBuf,
        blocks: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run simulate, localize and evaluate over consecutive seeds.
    Batch {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        pipeline: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 7)]
        runs: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn sim_config(path: Option<PathBuf>, seed: Option<u64>) -> Result<SimConfig> {
    let mut cfg = match path {
        Some(p) => load_sim_config(&p)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let cfg = sim_config(config, seed)?;
            let s = pipeloc::simulate(&cfg, &out)?;
            println!(
                "wrote {}: {} samples, {} false readings, {} blocks (seed {})",
                out.display(),
                s.samples,
                s.false_readings,
                s.blocks,
                cfg.seed
            );
        }
        Command::Localize { log, config, out } => {
            let cfg = load_pipeline_config(config.as_deref(), PipelineConfig::default())?;
            let loc = pipeloc::localize(&log, &cfg, &out)?;
            for w in &loc.filter.warnings {
                eprintln!("warning: {} consecutive readings rejected from sample {}", w.len, w.start);
            }
            println!(
                "wrote {}: {} samples, {} rejected readings, {} anchors",
                out.display(),
                loc.trajectory.len(),
                loc.filter.false_count(),
                loc.calibration.anchors.len()
            );
        }
        Command::Evaluate { trajectory, truth, blocks, out } => {
            let ev = pipeloc::evaluate(&trajectory, &truth, blocks.as_deref(), &out)?;
            print!("{}", pipeloc::report::render_run_report(&ev.e1, ev.e2.as_ref()));
        }
        Command::Batch { config, pipeline, seed, runs, out } => {
            let sim = sim_config(config, None)?;
            let base = PipelineConfig::for_sim(&sim);
            let pipe = load_pipeline_config(pipeline.as_deref(), base)?;
            let summary = pipeloc::batch(&sim, &pipe, seed.unwrap_or(sim.seed), runs, &out)?;
            print!("{}", pipeloc::report::render_table("Ground-truth error", "E1", &summary.e1));
            println!();
            print!("{}", pipeloc::report::render_table("Zippering error", "E2", &summary.e2));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            report_source(&e);
            ExitCode::from(e.exit_code())
        }
    }
}

fn report_source(e: &CliError) {
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
}
