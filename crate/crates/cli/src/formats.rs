//! JSON-lines record files.
//!
//! Every float is written in fixed notation with six decimals so that two
//! runs with the same inputs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use pipeloc_core::filter::FilterResult;
use pipeloc_core::sim::{BlockEvent, GroundTruth};
use pipeloc_core::{RunMeta, Sample, SensorLog, Trajectory, Verdict};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const FLOAT_FORMAT: &str = "fixed, 6 decimals";

#[derive(Debug, Deserialize)]
struct LogRecord {
    t_s: f64,
    left_counts: f64,
    right_counts: f64,
    range_in: f64,
}

#[derive(Debug, Deserialize)]
struct TruthRecord {
    t_s: f64,
    position_in: f64,
}

#[derive(Debug, Deserialize)]
struct BlockRecord {
    block_id: u32,
    t_f_s: f64,
    t_b_s: f64,
    true_position_in: f64,
}

#[derive(Debug, Deserialize)]
struct TrajectoryRecord {
    t_s: f64,
    position_in: f64,
    marginal_std_in: f64,
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Valid => "valid",
        Verdict::False => "false",
    }
}

/// Write `contents` next to `path` and rename it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents).map_err(CliError::io(path))?;
    std::fs::rename(&tmp, path).map_err(CliError::io(path))
}

fn lines<I: IntoIterator>(items: I, mut line: impl FnMut(&mut String, I::Item)) -> String {
    let mut out = String::new();
    for item in items {
        line(&mut out, item);
        out.push('\n');
    }
    out
}

pub fn render_log(log: &SensorLog) -> String {
    lines(log.samples(), |o, s| {
        let _ = write!(
            o,
            r#"{{"t_s":{:.6},"left_counts":{:.6},"right_counts":{:.6},"range_in":{:.6}}}"#,
            s.t, s.left, s.right, s.range
        );
    })
}

pub fn render_labels(log: &SensorLog, labels: &[Verdict]) -> String {
    lines(log.samples().iter().zip(labels), |o, (s, v)| {
        let _ = write!(o, r#"{{"t_s":{:.6},"label":"{}"}}"#, s.t, verdict_label(*v));
    })
}

pub fn render_truth(truth: &GroundTruth) -> String {
    lines(truth.times.iter().zip(&truth.positions), |o, (t, x)| {
        let _ = write!(o, r#"{{"t_s":{t:.6},"position_in":{x:.6}}}"#);
    })
}

pub fn render_blocks(blocks: &[BlockEvent]) -> String {
    lines(blocks, |o, b| {
        let _ = write!(
            o,
            r#"{{"block_id":{},"t_f_s":{:.6},"t_b_s":{:.6},"true_position_in":{:.6}}}"#,
            b.block_id, b.t_f, b.t_b, b.true_position
        );
    })
}

pub fn render_trajectory(traj: &Trajectory) -> String {
    lines(0..traj.len(), |o, i| {
        let _ = write!(
            o,
            r#"{{"t_s":{:.6},"position_in":{:.6},"marginal_std_in":{:.6}}}"#,
            traj.times[i], traj.positions[i], traj.marginal_std[i]
        );
    })
}

pub fn render_filter(filter: &FilterResult, log: &SensorLog) -> String {
    lines(0..filter.len(), |o, i| {
        let _ = write!(
            o,
            r#"{{"t_s":{:.6},"range_in":{:.6},"predicted_in":{:.6},"loc_est_in":{:.6},"verdict":"{}"}}"#,
            filter.times[i],
            log.samples()[i].range,
            filter.predicted[i],
            filter.loc_est[i],
            verdict_label(filter.verdicts[i])
        );
    })
}

fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CliError::parse(path, format!("line {}: {e}", i + 1))))
        .collect()
}

/// Read a sensor log; `meta` supplies the pipe and encoder scale, which the
/// file does not carry.
pub fn read_log(path: &Path, meta: RunMeta) -> Result<SensorLog> {
    let records: Vec<LogRecord> = read_records(path)?;
    let samples = records
        .into_iter()
        .map(|r| Sample { t: r.t_s, left: r.left_counts, right: r.right_counts, range: r.range_in })
        .collect();
    SensorLog::new(samples, meta).map_err(|e| CliError::parse(path, e))
}

pub fn read_truth(path: &Path) -> Result<GroundTruth> {
    let records: Vec<TruthRecord> = read_records(path)?;
    let (times, positions): (Vec<f64>, Vec<f64>) = records.into_iter().map(|r| (r.t_s, r.position_in)).unzip();
    let apex_index = positions
        .iter()
        .enumerate()
        .fold(0, |best, (i, &x)| if x > positions[best] { i } else { best });
    Ok(GroundTruth { times, positions, apex_index })
}

pub fn read_blocks(path: &Path) -> Result<Vec<BlockEvent>> {
    let records: Vec<BlockRecord> = read_records(path)?;
    Ok(records
        .into_iter()
        .map(|r| BlockEvent { block_id: r.block_id, t_f: r.t_f_s, t_b: r.t_b_s, true_position: r.true_position_in })
        .collect())
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let records: Vec<TrajectoryRecord> = read_records(path)?;
    if records.windows(2).any(|w| w[1].t_s.partial_cmp(&w[0].t_s) != Some(std::cmp::Ordering::Greater)) {
        return Err(CliError::parse(path, "timestamps must be strictly increasing"));
    }
    let mut traj = Trajectory { times: Vec::new(), positions: Vec::new(), marginal_std: Vec::new() };
    for r in records {
        traj.times.push(r.t_s);
        traj.positions.push(r.position_in);
        traj.marginal_std.push(r.marginal_std_in);
    }
    Ok(traj)
}
