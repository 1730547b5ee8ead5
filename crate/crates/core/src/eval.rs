//! Ground-truth error, zippering error and multi-run summary tables.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::sim::{BlockEvent, GroundTruth};
use crate::smoother::Trajectory;

/// Max / mean / variance / standard deviation of a series, inches.
///
/// Variance is the population variance (divides by n). An empty series has
/// all-zero statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats {
    pub max: f64,
    pub mean: f64,
    pub var: f64,
    pub std: f64,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { max, mean, var, std: math::sqrt(var) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub values: Vec<f64>,
    pub stats: Stats,
}

impl ErrorSeries {
    pub fn new(values: Vec<f64>) -> Self {
        let stats = Stats::from_values(&values);
        Self { values, stats }
    }
}

/// Absolute error of an estimate against a reference, sample by sample.
pub fn absolute_error(estimate: &[f64], reference: &[f64]) -> Result<ErrorSeries> {
    if estimate.len() != reference.len() {
        return Err(Error::MismatchedLengths { expected: reference.len(), actual: estimate.len() });
    }
    Ok(ErrorSeries::new(estimate.iter().zip(reference).map(|(a, b)| math::abs(a - b)).collect()))
}

/// |trajectory − truth| at every timestamp.
pub fn ground_truth_error(traj: &Trajectory, truth: &GroundTruth) -> Result<ErrorSeries> {
    absolute_error(&traj.positions, &truth.positions)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipperingRow {
    pub block_id: u32,
    pub forward_loc: f64,
    pub backward_loc: f64,
    /// Signed forward minus backward location.
    pub e2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZipperingReport {
    pub rows: Vec<ZipperingRow>,
    /// Statistics of |e2|.
    pub stats: Stats,
}

/// Linear interpolation of `values` sampled at strictly increasing `times`.
/// `None` outside `[times[0], times[last]]`.
pub fn interpolate(times: &[f64], values: &[f64], t: f64) -> Option<f64> {
    let (first, last) = (*times.first()?, *times.last()?);
    if !(t >= first && t <= last) {
        return None;
    }
    let hi = times.partition_point(|&x| x < t);
    if times[hi] == t {
        return Some(values[hi]);
    }
    let lo = hi - 1;
    let w = (t - times[lo]) / (times[hi] - times[lo]);
    Some(values[lo] + w * (values[hi] - values[lo]))
}

/// Location of each block on the forward and backward pass, and their
/// difference.
pub fn zippering_error(traj: &Trajectory, blocks: &[BlockEvent]) -> Result<ZipperingReport> {
    let mut rows = blocks
        .iter()
        .map(|b| {
            let at = |t| interpolate(&traj.times, &traj.positions, t).ok_or(Error::TimestampOutOfRange { block_id: b.block_id });
            let forward_loc = at(b.t_f)?;
            let backward_loc = at(b.t_b)?;
            Ok(ZipperingRow { block_id: b.block_id, forward_loc, backward_loc, e2: forward_loc - backward_loc })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.block_id);
    let abs: Vec<f64> = rows.iter().map(|r| math::abs(r.e2)).collect();
    Ok(ZipperingReport { stats: Stats::from_values(&abs), rows })
}

/// Per-run statistics with column-wise `Max.` and `Ave.` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTable {
    pub rows: Vec<Stats>,
    pub max: Stats,
    pub ave: Stats,
}

pub fn summarize_runs(runs: &[Stats]) -> Result<RunTable> {
    if runs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = runs.len() as f64;
    let column = |f: fn(&Stats) -> f64| -> (f64, f64) {
        let max = runs.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let ave = runs.iter().map(f).sum::<f64>() / n;
        (max, ave)
    };
    let (max_max, ave_max) = column(|s| s.max);
    let (max_mean, ave_mean) = column(|s| s.mean);
    let (max_var, ave_var) = column(|s| s.var);
    let (max_std, ave_std) = column(|s| s.std);
    Ok(RunTable {
        rows: runs.to_vec(),
        max: Stats { max: max_max, mean: max_mean, var: max_var, std: max_std },
        ave: Stats { max: ave_max, mean: ave_mean, var: ave_var, std: ave_std },
    })
}
