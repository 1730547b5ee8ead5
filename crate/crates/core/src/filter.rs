//! Encoder-referenced rangefinder filter.
//!
//! A location estimate is propagated with encoder increments and every range
//! reading is checked against it. Readings within `thres` of the estimate are
//! accepted and replace it; others are marked false and the estimate keeps the
//! encoder-propagated value. Encoder deltas go negative after the turnaround,
//! so one pass handles both legs.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{RangeSample, SensorLog};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Acceptance half-width around the predicted location, inches.
    pub thres: f64,
    pub counts_per_inch: f64,
    /// Length of a rejection streak that triggers a divergence warning.
    pub max_consecutive_rejections: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { thres: 6.0, counts_per_inch: 50.0, max_consecutive_rejections: 500 }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.thres > 0.0 && self.thres.is_finite()) {
            return Err(Error::InvalidConfig { field: "thres", reason: "must be positive and finite" });
        }
        if !(self.counts_per_inch > 0.0 && self.counts_per_inch.is_finite()) {
            return Err(Error::NonPositiveCoefficient(self.counts_per_inch));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Valid,
    False,
}

impl Verdict {
    pub fn is_valid(self) -> bool {
        self == Verdict::Valid
    }
}

/// A streak of consecutive rejections longer than the configured limit.
/// Usually means the encoder estimate has run away from the true trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RejectionStreak {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterResult {
    /// Sample timestamps, copied from the log.
    pub times: Vec<f64>,
    /// Reference location per sample (post-update).
    pub loc_est: Vec<f64>,
    pub verdicts: Vec<Verdict>,
    /// Encoder-only prediction per sample, before any range update.
    pub predicted: Vec<f64>,
    /// Accepted readings with their sample index, in time order.
    pub accepted_ranges: Vec<(usize, RangeSample)>,
    pub warnings: Vec<RejectionStreak>,
}

impl FilterResult {
    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_valid()).count()
    }

    pub fn false_count(&self) -> usize {
        self.len() - self.valid_count()
    }

    /// Index of the turnaround: the first maximum of `loc_est`.
    pub fn apex_index(&self) -> usize {
        let mut best = 0;
        for (i, &x) in self.loc_est.iter().enumerate() {
            if x > self.loc_est[best] {
                best = i;
            }
        }
        best
    }
}

/// One encoder propagation step.
pub fn predict_step(loc_prev: f64, ec_k: f64, ec_prev: f64, counts_per_inch: f64) -> Result<f64> {
    if !(counts_per_inch > 0.0) {
        return Err(Error::NonPositiveCoefficient(counts_per_inch));
    }
    Ok(loc_prev + (ec_k - ec_prev) / counts_per_inch)
}

/// Classify every range reading of `log` as valid or false.
///
/// The first sample is the launch point: its estimate is pinned at 0 and its
/// reading is judged against 0 without overwriting the estimate.
pub fn filter_rangefinder(log: &SensorLog, cfg: &FilterConfig) -> Result<FilterResult> {
    cfg.validate()?;
    let samples = log.samples();
    if samples.is_empty() {
        return Err(Error::EmptyLog);
    }
    let n = samples.len();
    let mut loc_est = Vec::with_capacity(n);
    let mut predicted = Vec::with_capacity(n);
    let mut verdicts = Vec::with_capacity(n);
    let mut accepted_ranges = Vec::new();
    let mut warnings = Vec::new();

    let mut streak_start = 0;
    let mut streak = 0usize;
    let close_streak = |streak: usize, start: usize, warnings: &mut Vec<RejectionStreak>| {
        if streak > cfg.max_consecutive_rejections {
            warnings.push(RejectionStreak { start, len: streak });
        }
    };

    let mut prev_counts = samples[0].counts();
    let mut loc = 0.0;
    for (k, s) in samples.iter().enumerate() {
        let counts = s.counts();
        let prediction = if k == 0 { 0.0 } else { predict_step(loc, counts, prev_counts, cfg.counts_per_inch)? };
        prev_counts = counts;
        predicted.push(prediction);

        let verdict = if math::abs(prediction - s.range) > cfg.thres { Verdict::False } else { Verdict::Valid };
        loc = match verdict {
            Verdict::Valid if k > 0 => s.range,
            _ => prediction,
        };
        if verdict.is_valid() {
            accepted_ranges.push((k, s.range_sample()));
            close_streak(streak, streak_start, &mut warnings);
            streak = 0;
        } else {
            if streak == 0 {
                streak_start = k;
            }
            streak += 1;
        }
        verdicts.push(verdict);
        loc_est.push(loc);
    }
    close_streak(streak, streak_start, &mut warnings);

    Ok(FilterResult { times: log.times().collect(), loc_est, verdicts, predicted, accepted_ranges, warnings })
}
