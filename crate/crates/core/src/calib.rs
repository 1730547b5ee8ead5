//! Anchored recalibration of encoder odometry.
//!
//! Accepted range readings spaced more than `dist_step` apart become anchors.
//! Between consecutive anchors the raw encoder trajectory is mapped affinely so
//! that it passes exactly through both anchor readings, which confines encoder
//! drift to a single short segment. The forward and backward legs are handled
//! separately, split at the turnaround of the filter's location estimate.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filter::FilterResult;
use crate::math;
use crate::model::{counts_to_distance, SensorLog};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibConfig {
    /// Minimum range change between consecutive anchors, inches.
    pub dist_step: f64,
    pub counts_per_inch: f64,
    /// Encoder displacement below which a segment cannot be rescaled.
    pub min_displacement: f64,
}

impl Default for CalibConfig {
    fn default() -> Self {
        Self { dist_step: 36.0, counts_per_inch: 50.0, min_displacement: 1e-6 }
    }
}

impl CalibConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dist_step > 0.0 && self.dist_step.is_finite()) {
            return Err(Error::InvalidConfig { field: "dist_step", reason: "must be positive and finite" });
        }
        if !(self.min_displacement >= 0.0) {
            return Err(Error::InvalidConfig { field: "min_displacement", reason: "must be non-negative" });
        }
        if !(self.counts_per_inch > 0.0) {
            return Err(Error::NonPositiveCoefficient(self.counts_per_inch));
        }
        Ok(())
    }
}

/// An accepted range reading used as an absolute landmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub index: usize,
    pub range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedOdometry {
    pub positions: Vec<f64>,
    /// Range anchors on both legs, in time order. The launch point (index 0,
    /// position 0) is an implicit extra anchor and is not listed.
    pub anchors: Vec<Anchor>,
    /// Number of entries of `anchors` on the forward leg.
    pub forward_anchors: usize,
    /// One scale per rescaled segment, in time order.
    pub segment_scales: Vec<f64>,
    pub apex_index: usize,
}

/// Rescaled positions of one segment plus the scale that was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub positions: Vec<f64>,
    pub scale: f64,
}

/// Walk the accepted readings and pick anchors.
///
/// On each leg a reading becomes the next anchor once it differs from the
/// previous anchor by more than `dist_step`. The origin anchor is the launch
/// point at 0 in. The walk continues across the turnaround, so consecutive
/// anchors are always more than `dist_step` apart.
pub fn select_anchors(filter: &FilterResult, cfg: &CalibConfig) -> Result<Vec<Anchor>> {
    cfg.validate()?;
    if filter.is_empty() {
        return Err(Error::EmptyLog);
    }
    if !filter.accepted_ranges.iter().any(|(i, _)| *i > 0) {
        return Err(Error::NoValidReadings);
    }
    let mut anchors = Vec::new();
    let mut reference = 0.0;
    for &(index, r) in filter.accepted_ranges.iter().filter(|(i, _)| *i > 0) {
        if math::abs(r.range - reference) > cfg.dist_step {
            anchors.push(Anchor { index, range: r.range });
            reference = r.range;
        }
    }
    Ok(anchors)
}

/// Affinely map `positions` so the first sample lands on `anchor_start` and
/// the last on `anchor_end`.
pub fn calibrate_segment(positions: &[f64], anchor_start: f64, anchor_end: f64, min_displacement: f64) -> Result<Segment> {
    segment_at(positions, 0, anchor_start, anchor_end, min_displacement)
}

fn segment_at(positions: &[f64], offset: usize, anchor_start: f64, anchor_end: f64, min_displacement: f64) -> Result<Segment> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::DegenerateSegment { start: offset, end: offset + n.saturating_sub(1), displacement: 0.0 });
    }
    let first = positions[0];
    let displacement = positions[n - 1] - first;
    let scale = (anchor_end - anchor_start) / displacement;
    if !(math::abs(displacement) >= min_displacement) || !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::DegenerateSegment { start: offset, end: offset + n - 1, displacement });
    }
    let mut out: Vec<f64> = positions.iter().map(|p| anchor_start + (p - first) * scale).collect();
    out[0] = anchor_start;
    out[n - 1] = anchor_end;
    Ok(Segment { positions: out, scale })
}

/// Raw encoder odometry relative to the first sample, inches.
pub fn encoder_positions(log: &SensorLog, counts_per_inch: f64) -> Result<Vec<f64>> {
    let c0 = log.samples()[0].counts();
    log.counts().map(|c| counts_to_distance(c - c0, counts_per_inch)).collect()
}

/// Force encoder odometry through every anchor, leg by leg.
///
/// Samples after the last anchor of a leg are carried with the most recent
/// segment scale (1 if the leg has not been rescaled yet).
pub fn calibrate_encoders(filter: &FilterResult, log: &SensorLog, cfg: &CalibConfig) -> Result<CalibratedOdometry> {
    if filter.len() != log.len() {
        return Err(Error::MismatchedLengths { expected: log.len(), actual: filter.len() });
    }
    let anchors = select_anchors(filter, cfg)?;
    let raw = encoder_positions(log, cfg.counts_per_inch)?;
    let n = raw.len();
    let apex = filter.apex_index();
    let forward_anchors = anchors.iter().take_while(|a| a.index <= apex).count();

    let mut positions = alloc::vec![0.0; n];
    let mut segment_scales = Vec::new();
    let mut scale = 1.0;

    let legs = [(0, apex, &anchors[..forward_anchors]), (apex, n - 1, &anchors[forward_anchors..])];
    for (start, end, leg_anchors) in legs {
        let mut prev = Anchor { index: start, range: positions[start] };
        for &a in leg_anchors {
            let seg = segment_at(&raw[prev.index..=a.index], prev.index, prev.range, a.range, cfg.min_displacement)?;
            positions[prev.index..=a.index].copy_from_slice(&seg.positions);
            segment_scales.push(seg.scale);
            scale = seg.scale;
            prev = a;
        }
        for i in prev.index + 1..=end {
            positions[i] = prev.range + (raw[i] - raw[prev.index]) * scale;
        }
    }

    Ok(CalibratedOdometry { positions, anchors, forward_anchors, segment_scales, apex_index: apex })
}
