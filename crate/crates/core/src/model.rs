//! Shared domain types, stream synchronization and count/distance conversion.
//!
//! Distances are inches, times are seconds. Encoder counts are kept as `f64`
//! so they can be resampled onto rangefinder timestamps.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Cumulative left/right track encoder counts at one instant.
///
/// Counts are signed-cumulative: they decrease while the robot reverses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderSample {
    pub t: f64,
    pub left: f64,
    pub right: f64,
}

/// One rangefinder reading (distance from the robot back to the launch end).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSample {
    pub t: f64,
    pub range: f64,
}

/// A synced record: encoder counts and a range reading sharing one timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub left: f64,
    pub right: f64,
    pub range: f64,
}

impl Sample {
    pub fn encoder(&self) -> EncoderSample {
        EncoderSample { t: self.t, left: self.left, right: self.right }
    }

    pub fn range_sample(&self) -> RangeSample {
        RangeSample { t: self.t, range: self.range }
    }

    /// Mean of the two track counts.
    pub fn counts(&self) -> f64 {
        average_encoders(&self.encoder())
    }
}

/// Static description of the run: pipe geometry and encoder scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMeta {
    pub pipe_diameter: f64,
    pub pipe_length: f64,
    /// Encoder counts per inch of travel.
    pub counts_per_inch: f64,
}

impl RunMeta {
    pub fn validate(&self) -> Result<()> {
        positive("pipe_diameter", self.pipe_diameter)?;
        positive("pipe_length", self.pipe_length)?;
        positive("counts_per_inch", self.counts_per_inch)
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig { field, reason: "must be positive and finite" })
    }
}

/// How encoder counts are resampled onto rangefinder timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SyncPolicy {
    /// Keep every rangefinder timestamp inside the common span and linearly
    /// interpolate encoder counts to it. Never extrapolates.
    #[default]
    LinearInterpolation,
}

/// Time-synced sensor stream for one run. Always non-empty with strictly
/// increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorLog {
    samples: Vec<Sample>,
    meta: RunMeta,
}

impl SensorLog {
    pub fn new(samples: Vec<Sample>, meta: RunMeta) -> Result<Self> {
        meta.validate()?;
        if samples.is_empty() {
            return Err(Error::EmptyLog);
        }
        for (index, s) in samples.iter().enumerate() {
            if !s.t.is_finite() || s.t < 0.0 {
                return Err(Error::InvalidSample { index, reason: "timestamp must be finite and non-negative" });
            }
            if !s.left.is_finite() || !s.right.is_finite() {
                return Err(Error::InvalidSample { index, reason: "encoder counts must be finite" });
            }
            if !s.range.is_finite() || s.range < 0.0 {
                return Err(Error::InvalidSample { index, reason: "range must be finite and non-negative" });
            }
        }
        check_increasing("log", samples.iter().map(|s| s.t))?;
        Ok(Self { samples, meta })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn meta(&self) -> &RunMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn ranges(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.range)
    }

    /// Averaged encoder counts per sample.
    pub fn counts(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(Sample::counts)
    }

    /// Copy of this log keeping only the samples whose index passes `keep`.
    pub fn retain_indices(&self, mut keep: impl FnMut(usize) -> bool) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, s)| *s)
            .collect();
        Self::new(samples, self.meta)
    }
}

fn check_increasing(stream: &'static str, times: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for (index, t) in times.enumerate() {
        if !(t > prev) {
            return Err(Error::NonMonotoneInput { stream, index });
        }
        prev = t;
    }
    Ok(())
}

/// Resample the encoder stream onto the rangefinder timestamps that fall
/// inside both streams' time spans.
pub fn sync_streams(
    encoders: &[EncoderSample],
    ranges: &[RangeSample],
    policy: SyncPolicy,
    meta: RunMeta,
) -> Result<SensorLog> {
    check_increasing("encoder", encoders.iter().map(|e| e.t))?;
    check_increasing("range", ranges.iter().map(|r| r.t))?;
    let (Some(e0), Some(e1), Some(r0), Some(r1)) =
        (encoders.first(), encoders.last(), ranges.first(), ranges.last())
    else {
        return Err(Error::EmptyOverlap);
    };
    let lo = e0.t.max(r0.t);
    let hi = e1.t.min(r1.t);
    if lo > hi {
        return Err(Error::EmptyOverlap);
    }

    let SyncPolicy::LinearInterpolation = policy;
    let mut out = Vec::new();
    let mut j = 0;
    for r in ranges.iter().filter(|r| r.t >= lo && r.t <= hi) {
        while j + 1 < encoders.len() && encoders[j + 1].t <= r.t {
            j += 1;
        }
        let a = encoders[j];
        let (left, right) = if a.t == r.t {
            (a.left, a.right)
        } else {
            let b = encoders[j + 1];
            let w = (r.t - a.t) / (b.t - a.t);
            (a.left + w * (b.left - a.left), a.right + w * (b.right - a.right))
        };
        out.push(Sample { t: r.t, left, right, range: r.range });
    }
    if out.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    SensorLog::new(out, meta)
}

/// Robot-centre counts: the mean of the two tracks.
pub fn average_encoders(sample: &EncoderSample) -> f64 {
    (sample.left + sample.right) / 2.0
}

pub fn counts_to_distance(counts: f64, counts_per_inch: f64) -> Result<f64> {
    if !(counts_per_inch > 0.0) {
        return Err(Error::NonPositiveCoefficient(counts_per_inch));
    }
    Ok(counts / counts_per_inch)
}
