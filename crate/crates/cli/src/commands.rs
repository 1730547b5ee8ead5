use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use pipeloc_core::eval::{ground_truth_error, summarize_runs, zippering_error, ErrorSeries, RunTable, ZipperingReport};
use pipeloc_core::sim::{generate_run, SimConfig};
use pipeloc_core::smoother::{localize as run_pipeline, Localization};
use pipeloc_core::Verdict;
use serde::Serialize;

use crate::config::{render_sim_config, sha256_hex, PipelineConfig};
use crate::error::{CliError, Result};
use crate::formats::{self, write_atomic, FLOAT_FORMAT};
use crate::report::{self, BatchJson, RunReportJson};

pub const BUNDLE_FILES: [&str; 6] =
    ["log.jsonl", "labels.jsonl", "truth.jsonl", "blocks.jsonl", "config.toml", "manifest.json"];

/// Tolerance when pairing trajectory and truth timestamps, seconds.
pub const TIME_MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    seed: u64,
    config_sha256: String,
    float_format: &'static str,
    samples: usize,
    blocks: usize,
    false_shifts_in: &'a [f64],
    files: &'a [&'a str],
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    write_atomic(&dir.join(name), text.as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub samples: usize,
    pub false_readings: usize,
    pub blocks: usize,
}

/// Generate one labeled run and write its bundle into `out`.
pub fn simulate(cfg: &SimConfig, out: &Path) -> Result<SimulateSummary> {
    let run = generate_run(cfg)?;
    create_dir(out)?;
    let config_text = render_sim_config(cfg);
    write_text(out, "log.jsonl", &formats::render_log(&run.log))?;
    write_text(out, "labels.jsonl", &formats::render_labels(&run.log, &run.range_labels))?;
    write_text(out, "truth.jsonl", &formats::render_truth(&run.truth))?;
    write_text(out, "blocks.jsonl", &formats::render_blocks(&run.block_events))?;
    write_text(out, "config.toml", &config_text)?;
    let manifest = Manifest {
        seed: cfg.seed,
        config_sha256: sha256_hex(&config_text),
        float_format: FLOAT_FORMAT,
        samples: run.log.len(),
        blocks: run.block_events.len(),
        false_shifts_in: &run.false_shifts,
        files: &BUNDLE_FILES,
    };
    write_text(out, "manifest.json", &report::to_json(&manifest))?;
    Ok(SimulateSummary {
        samples: run.log.len(),
        false_readings: run.range_labels.iter().filter(|v| **v == Verdict::False).count(),
        blocks: run.block_events.len(),
    })
}

#[derive(Debug, Serialize)]
struct StreakJson {
    start_index: usize,
    length: usize,
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    samples: usize,
    valid_readings: usize,
    false_readings: usize,
    apex_index: usize,
    anchors: usize,
    forward_anchors: usize,
    segment_scales: Vec<f64>,
    rejection_streaks: Vec<StreakJson>,
}

/// Filter, calibrate and smooth the log at `log_path`; write the results
/// into `out`.
pub fn localize(log_path: &Path, cfg: &PipelineConfig, out: &Path) -> Result<Localization> {
    let log = formats::read_log(log_path, cfg.meta)?;
    let loc = run_pipeline(&log, &cfg.filter, &cfg.calib, &cfg.fusion)?;
    create_dir(out)?;
    write_text(out, "trajectory.jsonl", &formats::render_trajectory(&loc.trajectory))?;
    write_text(out, "filter.jsonl", &formats::render_filter(&loc.filter, &log))?;
    let diag = Diagnostics {
        samples: log.len(),
        valid_readings: loc.filter.valid_count(),
        false_readings: loc.filter.false_count(),
        apex_index: loc.calibration.apex_index,
        anchors: loc.calibration.anchors.len(),
        forward_anchors: loc.calibration.forward_anchors,
        segment_scales: loc.calibration.segment_scales.clone(),
        rejection_streaks: loc.filter.warnings.iter().map(|w| StreakJson { start_index: w.start, length: w.len }).collect(),
    };
    write_text(out, "diagnostics.json", &report::to_json(&diag))?;
    Ok(loc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub e1: ErrorSeries,
    pub e2: Option<ZipperingReport>,
}

/// Compare a trajectory with ground truth and, if given, block crossings.
pub fn evaluate(traj_path: &Path, truth_path: &Path, blocks_path: Option<&Path>, out: &Path) -> Result<Evaluation> {
    let traj = formats::read_trajectory(traj_path)?;
    let truth = formats::read_truth(truth_path)?;
    let blocks = blocks_path.map(formats::read_blocks).transpose()?;
    if traj.len() != truth.positions.len() {
        return Err(CliError::Mismatch(format!(
            "trajectory has {} samples, ground truth has {}",
            traj.len(),
            truth.positions.len()
        )));
    }
    if let Some(i) = (0..traj.len()).find(|&i| (traj.times[i] - truth.times[i]).abs() > TIME_MATCH_TOL) {
        return Err(CliError::Mismatch(format!(
            "timestamp {} differs: trajectory {:.6} s, ground truth {:.6} s",
            i, traj.times[i], truth.times[i]
        )));
    }
    let e1 = ground_truth_error(&traj, &truth)?;
    let e2 = blocks.map(|b| zippering_error(&traj, &b)).transpose()?;
    create_dir(out)?;
    write_text(out, "report.txt", &report::render_run_report(&e1, e2.as_ref()))?;
    write_text(out, "e1.csv", &report::render_e1_csv(&traj.times, &e1))?;
    if let Some(z) = &e2 {
        write_text(out, "e2.csv", &report::render_e2_csv(z))?;
    }
    let json = RunReportJson {
        samples: e1.values.len(),
        e1: e1.stats.into(),
        blocks: e2.as_ref().map_or(0, |z| z.rows.len()),
        e2: e2.as_ref().map(|z| z.stats.into()),
    };
    write_text(out, "report.json", &report::to_json(&json))?;
    Ok(Evaluation { e1, e2 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub seeds: Vec<u64>,
    pub e1: RunTable,
    pub e2: RunTable,
}

pub fn run_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("run_{}", index + 1))
}

fn one_run(sim: &SimConfig, pipeline: &PipelineConfig, dir: &Path) -> Result<Evaluation> {
    simulate(sim, dir)?;
    localize(&dir.join("log.jsonl"), pipeline, dir)?;
    evaluate(&dir.join("trajectory.jsonl"), &dir.join("truth.jsonl"), Some(&dir.join("blocks.jsonl")), dir)
}

/// Simulate, localize and evaluate `runs` runs with seeds `seed`, `seed + 1`,
/// …, each in its own `run_<n>` directory, then write the summary tables.
pub fn batch(sim: &SimConfig, pipeline: &PipelineConfig, seed: u64, runs: usize, out: &Path) -> Result<BatchSummary> {
    if runs == 0 {
        return Err(CliError::Config("runs must be at least 1".into()));
    }
    create_dir(out)?;
    let seeds: Vec<u64> = (0..runs as u64).map(|i| seed.wrapping_add(i)).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(runs);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Evaluation>>>> = Mutex::new((0..runs).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= runs {
                    break;
                }
                let cfg = SimConfig { seed: seeds[i], ..sim.clone() };
                let r = one_run(&cfg, pipeline, &run_dir(out, i));
                results.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    let evals = results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every run index was claimed"))
        .collect::<Result<Vec<_>>>()?;
    let e1_rows: Vec<_> = evals.iter().map(|e| e.e1.stats).collect();
    let e2_rows: Vec<_> = evals.iter().map(|e| e.e2.as_ref().map(|z| z.stats).unwrap_or_default()).collect();
    let e1 = summarize_runs(&e1_rows)?;
    let e2 = summarize_runs(&e2_rows)?;
    let mut text = report::render_table("Ground-truth error", "E1", &e1);
    text.push('\n');
    text.push_str(&report::render_table("Zippering error", "E2", &e2));
    write_text(out, "summary.txt", &text)?;
    let json = BatchJson { first_seed: seed, seeds: seeds.clone(), e1: (&e1).into(), e2: (&e2).into() };
    write_text(out, "summary.json", &report::to_json(&json))?;
    Ok(BatchSummary { seeds, e1, e2 })
}
