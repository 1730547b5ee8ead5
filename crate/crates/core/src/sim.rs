//! Labeled synthetic out-and-back runs.
//!
//! The robot drives from the launch point to the far end of the pipe and back
//! with a piecewise-constant speed profile. Encoders over-read because of
//! steering and slip. The rangefinder returns the true distance plus Gaussian
//! noise, except that with a depth-dependent probability it hits an obstacle
//! instead and reports the true distance minus one of a few fixed offsets.
//! Every sample carries its valid/false label and blocks along the pipe are
//! reported as forward/backward detection times.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::filter::Verdict;
use crate::math;
use crate::model::{sync_streams, EncoderSample, RangeSample, RunMeta, SensorLog, SyncPolicy};

/// Constant speed from `from` (inches into the pipe) until the next segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedSegment {
    pub from: f64,
    pub speed: f64,
}

/// Probability of a false range reading as a function of true distance,
/// piecewise linear between knots and flat beyond the end knots.
#[derive(Debug, Clone, PartialEq)]
pub struct FalseRateCurve {
    pub knots: Vec<(f64, f64)>,
}

impl FalseRateCurve {
    pub fn constant(p: f64) -> Self {
        Self { knots: alloc::vec![(0.0, p)] }
    }

    /// Zero below 70 % of the validity horizon, then a logistic ramp that
    /// reaches `max_rate` at the pipe end.
    pub fn logistic(validity_horizon: f64, pipe_length: f64, max_rate: f64) -> Self {
        let onset = 0.7 * validity_horizon;
        if onset >= pipe_length || max_rate == 0.0 {
            return Self::constant(0.0);
        }
        let mid = 0.5 * (onset + pipe_length);
        let width = (pipe_length - onset) / 8.0;
        let sigmoid = |d: f64| 1.0 / (1.0 + math::exp(-(d - mid) / width));
        let (lo, hi) = (sigmoid(onset), sigmoid(pipe_length));
        let mut knots = alloc::vec![(0.0, 0.0)];
        let steps = 64;
        for i in 0..=steps {
            let d = onset + (pipe_length - onset) * i as f64 / steps as f64;
            knots.push((d, max_rate * (sigmoid(d) - lo) / (hi - lo)));
        }
        Self { knots }
    }

    pub fn rate(&self, distance: f64) -> f64 {
        let k = &self.knots;
        if distance <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((d0, p0), (d1, p1)) = (w[0], w[1]);
            if distance <= d1 {
                return p0 + (distance - d0) / (d1 - d0) * (p1 - p0);
            }
        }
        k[k.len() - 1].1
    }

    fn validate(&self) -> Result<()> {
        const FIELD: &str = "false_rate_curve";
        if self.knots.is_empty() {
            return Err(Error::InvalidConfig { field: FIELD, reason: "needs at least one knot" });
        }
        if self.knots.iter().any(|&(d, p)| !d.is_finite() || !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidConfig { field: FIELD, reason: "probabilities must lie in [0, 1]" });
        }
        if self.knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidConfig { field: FIELD, reason: "knot distances must be strictly increasing" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub pipe_length: f64,
    pub pipe_diameter: f64,
    /// Speed by depth, applied on both legs. First segment starts at 0.
    pub speed_profile: Vec<SpeedSegment>,
    pub sample_period: f64,
    pub counts_per_inch: f64,
    /// Systematic encoder over-read per step, as a fraction of the step.
    pub encoder_bias: f64,
    /// Std of the random slip per step, as a fraction of the step.
    pub encoder_slip_std: f64,
    pub range_noise_std: f64,
    /// Depth beyond which valid returns become sparse.
    pub validity_horizon: f64,
    /// Explicit false-rate curve; `None` uses [`FalseRateCurve::logistic`].
    pub false_rate_curve: Option<FalseRateCurve>,
    /// False rate reached at the pipe end by the default curve.
    pub false_rate_max: f64,
    /// Offsets of false readings below truth; `None` draws 3 to 6 offsets in
    /// [24, 600] in once per run.
    pub false_shifts: Option<Vec<f64>>,
    pub block_spacing: f64,
    pub block_count: usize,
    pub seed: u64,
}

/// Constant speed covering `pipe_length` out and back in `duration` seconds.
pub fn speed_for_duration(pipe_length: f64, duration: f64) -> f64 {
    2.0 * pipe_length / duration
}

impl Default for SimConfig {
    /// 30 in diameter, 1210 in pipe driven out and back in 1235 s.
    fn default() -> Self {
        Self {
            pipe_length: 1210.0,
            pipe_diameter: 30.0,
            speed_profile: alloc::vec![SpeedSegment { from: 0.0, speed: speed_for_duration(1210.0, 1235.0) }],
            sample_period: 0.1,
            counts_per_inch: 50.0,
            encoder_bias: 0.005,
            encoder_slip_std: 0.002,
            range_noise_std: 0.05,
            validity_horizon: 840.0,
            false_rate_curve: None,
            false_rate_max: 0.9,
            false_shifts: None,
            block_spacing: 48.0,
            block_count: 25,
            seed: 0,
        }
    }
}

/// Draw range for default false shifts, inches.
pub const DEFAULT_SHIFT_RANGE: (f64, f64) = (24.0, 600.0);
const MAX_SAMPLES: f64 = 5.0e7;
/// Noise draws are truncated at this many standard deviations.
pub const NOISE_CLIP_SIGMAS: f64 = 6.0;

impl SimConfig {
    /// Zero noise, no false readings, constant speed.
    pub fn noiseless() -> Self {
        Self {
            encoder_bias: 0.0,
            encoder_slip_std: 0.0,
            range_noise_std: 0.0,
            false_rate_curve: Some(FalseRateCurve::constant(0.0)),
            ..Self::default()
        }
    }

    pub fn meta(&self) -> RunMeta {
        RunMeta { pipe_diameter: self.pipe_diameter, pipe_length: self.pipe_length, counts_per_inch: self.counts_per_inch }
    }

    pub fn false_rate(&self) -> FalseRateCurve {
        self.false_rate_curve
            .clone()
            .unwrap_or_else(|| FalseRateCurve::logistic(self.validity_horizon, self.pipe_length, self.false_rate_max))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig { field, reason: "must be positive and finite" })
            }
        };
        let non_negative = |field: &'static str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig { field, reason: "must be non-negative and finite" })
            }
        };
        positive("pipe_length", self.pipe_length)?;
        positive("pipe_diameter", self.pipe_diameter)?;
        positive("sample_period", self.sample_period)?;
        positive("counts_per_inch", self.counts_per_inch)?;
        positive("validity_horizon", self.validity_horizon)?;
        positive("block_spacing", self.block_spacing)?;
        non_negative("encoder_bias", self.encoder_bias)?;
        non_negative("encoder_slip_std", self.encoder_slip_std)?;
        non_negative("range_noise_std", self.range_noise_std)?;
        if !(0.0..=1.0).contains(&self.false_rate_max) {
            return Err(Error::InvalidConfig { field: "false_rate_max", reason: "must lie in [0, 1]" });
        }

        const SPEED: &str = "speed_profile";
        match self.speed_profile.first() {
            Some(s) if s.from == 0.0 => {}
            _ => return Err(Error::InvalidConfig { field: SPEED, reason: "first segment must start at 0" }),
        }
        if self.speed_profile.iter().any(|s| !(s.speed > 0.0 && s.speed.is_finite())) {
            return Err(Error::InvalidConfig { field: SPEED, reason: "speeds must be positive and finite" });
        }
        if self.speed_profile.windows(2).any(|w| !(w[1].from > w[0].from)) {
            return Err(Error::InvalidConfig { field: SPEED, reason: "segment starts must be strictly increasing" });
        }

        if let Some(curve) = &self.false_rate_curve {
            curve.validate()?;
        }
        if let Some(shifts) = &self.false_shifts {
            if shifts.is_empty() {
                return Err(Error::InvalidConfig { field: "false_shifts", reason: "must not be empty" });
            }
            let floor = NOISE_CLIP_SIGMAS * self.range_noise_std;
            if shifts.iter().any(|&s| !(s > floor && s.is_finite())) {
                return Err(Error::InvalidConfig { field: "false_shifts", reason: "must exceed 6 range-noise std" });
            }
        }
        if self.block_spacing * self.block_count as f64 > self.pipe_length {
            return Err(Error::BlocksExceedPipe {
                count: self.block_count,
                spacing: self.block_spacing,
                pipe_length: self.pipe_length,
            });
        }
        if 2.0 * self.leg_duration() / self.sample_period > MAX_SAMPLES {
            return Err(Error::InvalidConfig { field: "sample_period", reason: "run would exceed 5e7 samples" });
        }
        Ok(())
    }

    /// Segments clipped to the pipe: (start, end, speed, time at start).
    fn legs(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut out = Vec::new();
        let mut t = 0.0;
        for (i, s) in self.speed_profile.iter().enumerate() {
            if s.from >= self.pipe_length {
                break;
            }
            let end = self.speed_profile.get(i + 1).map_or(self.pipe_length, |n| n.from.min(self.pipe_length));
            out.push((s.from, end, s.speed, t));
            t += (end - s.from) / s.speed;
        }
        out
    }

    /// Time to drive from the launch point to the far end.
    pub fn leg_duration(&self) -> f64 {
        self.legs().iter().map(|&(a, b, v, _)| (b - a) / v).sum()
    }

    /// Depth at time `t` on the forward leg.
    fn forward_position(&self, segments: &[(f64, f64, f64, f64)], t: f64) -> f64 {
        for &(start, end, speed, t0) in segments.iter().rev() {
            if t >= t0 {
                return (start + speed * (t - t0)).min(end);
            }
        }
        0.0
    }
}

/// True depth per timestamp. Rises to the pipe end, then returns to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub apex_index: usize,
}

/// A block along the pipe and the times it was passed on each leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEvent {
    pub block_id: u32,
    pub t_f: f64,
    pub t_b: f64,
    pub true_position: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledLog {
    pub log: SensorLog,
    pub truth: GroundTruth,
    pub range_labels: Vec<Verdict>,
    pub block_events: Vec<BlockEvent>,
    /// False-reading offsets used for this run.
    pub false_shifts: Vec<f64>,
}

/// Sample the noise-free trajectory. Samples fall on a fixed grid, plus the
/// exact turnaround and end times.
pub fn ground_truth(cfg: &SimConfig) -> Result<GroundTruth> {
    cfg.validate()?;
    let segments = cfg.legs();
    let leg = cfg.leg_duration();
    let total = 2.0 * leg;
    let dt = cfg.sample_period;
    let eps = 1e-9 * dt;

    let mut times = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * dt;
        if t >= total - eps {
            break;
        }
        if math::abs(t - leg) > eps {
            times.push(t);
        }
        k += 1;
    }
    let apex_index = times.partition_point(|&t| t < leg);
    times.insert(apex_index, leg);
    times.push(total);

    let positions = times
        .iter()
        .enumerate()
        .map(|(i, &t)| match i.cmp(&apex_index) {
            core::cmp::Ordering::Less => cfg.forward_position(&segments, t),
            core::cmp::Ordering::Equal => cfg.pipe_length,
            core::cmp::Ordering::Greater => cfg.forward_position(&segments, (total - t).max(0.0)),
        })
        .collect();
    Ok(GroundTruth { times, positions, apex_index })
}

fn crossing_time(truth: &GroundTruth, range: core::ops::RangeInclusive<usize>, target: f64, forward: bool) -> Option<f64> {
    let (t, x) = (&truth.times, &truth.positions);
    let reached = |v: f64| if forward { v >= target } else { v <= target };
    let start = *range.start();
    for k in range {
        if reached(x[k]) {
            if x[k] == target || k == start {
                return Some(t[k]);
            }
            let w = (target - x[k - 1]) / (x[k] - x[k - 1]);
            return Some(t[k - 1] + w * (t[k] - t[k - 1]));
        }
    }
    None
}

/// Blocks at `spacing, 2·spacing, …` and the times the true trajectory passes
/// them on each leg, linearly interpolated between samples. A block exactly
/// at the turnaround is passed once, so its two times coincide.
pub fn place_blocks(cfg: &SimConfig, spacing: f64, count: usize) -> Result<Vec<BlockEvent>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidConfig { field: "block_spacing", reason: "must be positive and finite" });
    }
    if spacing * count as f64 > cfg.pipe_length {
        return Err(Error::BlocksExceedPipe { count, spacing, pipe_length: cfg.pipe_length });
    }
    let truth = ground_truth(cfg)?;
    blocks_on(&truth, spacing, count)
}

fn blocks_on(truth: &GroundTruth, spacing: f64, count: usize) -> Result<Vec<BlockEvent>> {
    let apex = truth.apex_index;
    let last = truth.times.len() - 1;
    (1..=count)
        .map(|n| {
            let p = n as f64 * spacing;
            let block_id = n as u32;
            let t_f = crossing_time(truth, 0..=apex, p, true);
            let t_b = crossing_time(truth, apex..=last, p, false);
            match (t_f, t_b) {
                (Some(t_f), Some(t_b)) => Ok(BlockEvent { block_id, t_f, t_b, true_position: p }),
                _ => Err(Error::TimestampOutOfRange { block_id }),
            }
        })
        .collect()
}

fn clipped_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if math::abs(z) <= NOISE_CLIP_SIGMAS {
            return z;
        }
    }
}

/// Generate one labeled run. Deterministic in `cfg` (including its seed).
pub fn generate_run(cfg: &SimConfig) -> Result<LabeledLog> {
    let truth = ground_truth(cfg)?;
    let curve = cfg.false_rate();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let false_shifts = match &cfg.false_shifts {
        Some(s) => s.clone(),
        None => {
            let count = rng.random_range(3..=6);
            let (lo, hi) = DEFAULT_SHIFT_RANGE;
            (0..count).map(|_| rng.random_range(lo..=hi)).collect()
        }
    };

    let n = truth.times.len();
    let mut encoders = Vec::with_capacity(n);
    let mut ranges = Vec::with_capacity(n);
    let mut range_labels = Vec::with_capacity(n);
    // Track odometry is truth plus accumulated over-read, so a noiseless
    // encoder reproduces truth exactly.
    let mut excess = [0.0f64; 2];
    let mut candidates = Vec::with_capacity(false_shifts.len());
    for k in 0..n {
        let x = truth.positions[k];
        if k > 0 {
            let step = x - truth.positions[k - 1];
            for e in excess.iter_mut() {
                let factor = (1.0 + cfg.encoder_bias + cfg.encoder_slip_std * clipped_normal(&mut rng)).max(1.0);
                *e += step * (factor - 1.0);
            }
        }
        encoders.push(EncoderSample {
            t: truth.times[k],
            left: (x + excess[0]) * cfg.counts_per_inch,
            right: (x + excess[1]) * cfg.counts_per_inch,
        });

        let is_false = rng.random::<f64>() < curve.rate(x);
        candidates.clear();
        candidates.extend(false_shifts.iter().copied().filter(|&s| s < x));
        let noise = cfg.range_noise_std * clipped_normal(&mut rng);
        let (range, label) = if is_false && !candidates.is_empty() {
            let shift = candidates[rng.random_range(0..candidates.len())];
            ((x - shift + noise).max(0.0), Verdict::False)
        } else {
            ((x + noise).max(0.0), Verdict::Valid)
        };
        ranges.push(RangeSample { t: truth.times[k], range });
        range_labels.push(label);
    }

    let log = sync_streams(&encoders, &ranges, SyncPolicy::LinearInterpolation, cfg.meta())?;
    let block_events = blocks_on(&truth, cfg.block_spacing, cfg.block_count)?;
    Ok(LabeledLog { log, truth, range_labels, block_events, false_shifts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn short_cfg() -> SimConfig {
        SimConfig {
            pipe_length: 240.0,
            speed_profile: vec![SpeedSegment { from: 0.0, speed: 2.0 }],
            validity_horizon: 150.0,
            block_count: 4,
            ..SimConfig::default()
        }
    }

    #[test]
    fn noiseless_run_matches_truth() {
        let run = generate_run(&SimConfig::noiseless()).unwrap();
        assert!(run.range_labels.iter().all(|l| l.is_valid()));
        for (s, x) in run.log.samples().iter().zip(&run.truth.positions) {
            assert!((s.counts() / 50.0 - x).abs() < 1e-9);
            assert_eq!(s.range, *x);
        }
    }

    #[test]
    fn full_length_truth_is_v_shaped() {
        let truth = ground_truth(&SimConfig::default()).unwrap();
        let apex = truth.apex_index;
        assert_eq!(truth.positions[0], 0.0);
        assert!(truth.positions[truth.positions.len() - 1].abs() < 1e-9);
        assert!((truth.positions[apex] - 1210.0).abs() < 1.0);
        assert!((truth.times[truth.times.len() - 1] - 1235.0).abs() < 1e-6);
        assert!(truth.positions[..=apex].windows(2).all(|w| w[1] > w[0]));
        assert!(truth.positions[apex..].windows(2).all(|w| w[1] < w[0]));
        assert!(truth.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn piecewise_speed_profile() {
        let cfg = SimConfig {
            pipe_length: 100.0,
            speed_profile: vec![SpeedSegment { from: 0.0, speed: 2.0 }, SpeedSegment { from: 40.0, speed: 1.0 }],
            block_count: 2,
            ..SimConfig::default()
        };
        // 40 in at 2 in/s plus 60 in at 1 in/s.
        assert!((cfg.leg_duration() - 80.0).abs() < 1e-12);
        let truth = ground_truth(&cfg).unwrap();
        let at = |t: f64| truth.positions[truth.times.iter().position(|&x| (x - t).abs() < 1e-9).unwrap()];
        assert!((at(10.0) - 20.0).abs() < 1e-9);
        assert!((at(30.0) - 50.0).abs() < 1e-9);
        assert!((at(150.0) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn blocks_on_default_layout() {
        let cfg = SimConfig { pipe_length: 1200.0, ..SimConfig::default() };
        let blocks = place_blocks(&cfg, 48.0, 25).unwrap();
        assert_eq!(blocks.len(), 25);
        for (i, b) in blocks.iter().enumerate() {
            assert_eq!(b.block_id, i as u32 + 1);
            assert_eq!(b.true_position, 48.0 * (i + 1) as f64);
            assert!(b.t_f <= b.t_b);
        }
        // The last block sits at the turnaround.
        assert_eq!(blocks[24].t_f, blocks[24].t_b);
        assert!(place_blocks(&cfg, 48.0, 0).unwrap().is_empty());
        assert!(matches!(place_blocks(&cfg, 48.0, 26), Err(Error::BlocksExceedPipe { .. })));
    }

    #[test]
    fn block_times_are_symmetric_about_apex() {
        let cfg = SimConfig::default();
        let leg = cfg.leg_duration();
        let v = cfg.speed_profile[0].speed;
        for b in place_blocks(&cfg, 48.0, 25).unwrap() {
            // Closed form for constant speed.
            assert!((b.t_f - b.true_position / v).abs() < 1e-9);
            assert!((b.t_b - (2.0 * leg - b.true_position / v)).abs() < 1e-9);
            assert!(((b.t_f + b.t_b) / 2.0 - leg).abs() < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_run() {
        let cfg = SimConfig { seed: 11, ..short_cfg() };
        let a = generate_run(&cfg).unwrap();
        let b = generate_run(&cfg).unwrap();
        assert_eq!(a, b);
        let c = generate_run(&SimConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.log, c.log);
    }

    #[test]
    fn default_shifts_are_drawn_in_range() {
        for seed in 0..20 {
            let run = generate_run(&SimConfig { seed, ..short_cfg() }).unwrap();
            assert!((3..=6).contains(&run.false_shifts.len()));
            assert!(run.false_shifts.iter().all(|s| (24.0..=600.0).contains(s)));
        }
    }

    #[test]
    fn default_curve_shape() {
        let c = FalseRateCurve::logistic(840.0, 1210.0, 0.9);
        assert_eq!(c.rate(0.0), 0.0);
        assert_eq!(c.rate(587.9), 0.0);
        assert!((c.rate(1210.0) - 0.9).abs() < 1e-12);
        let mut prev = 0.0;
        for d in (588..=1210).step_by(10) {
            let p = c.rate(d as f64);
            assert!(p >= prev);
            prev = p;
        }
        assert_eq!(FalseRateCurve::constant(0.3).rate(1e6), 0.3);
    }

    #[test]
    fn validation_names_fields() {
        let field = |cfg: SimConfig| match cfg.validate() {
            Err(Error::InvalidConfig { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field(SimConfig { pipe_length: 0.0, ..SimConfig::default() }), "pipe_length");
        assert_eq!(field(SimConfig { false_rate_max: 1.5, ..SimConfig::default() }), "false_rate_max");
        assert_eq!(field(SimConfig { false_shifts: Some(vec![0.1]), ..SimConfig::default() }), "false_shifts");
        assert_eq!(field(SimConfig { speed_profile: vec![], ..SimConfig::default() }), "speed_profile");
        assert_eq!(
            field(SimConfig { false_rate_curve: Some(FalseRateCurve { knots: vec![(0.0, 2.0)] }), ..SimConfig::default() }),
            "false_rate_curve"
        );
        assert!(matches!(
            SimConfig { block_count: 30, ..SimConfig::default() }.validate(),
            Err(Error::BlocksExceedPipe { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn label_and_encoder_invariants(seed in any::<u64>(), bias in 0.0f64..0.02, noise in 0.0f64..0.3) {
            let cfg = SimConfig { seed, encoder_bias: bias, range_noise_std: noise, ..short_cfg() };
            let run = generate_run(&cfg).unwrap();
            prop_assert_eq!(run.range_labels.len(), run.log.len());
            for ((s, x), l) in run.log.samples().iter().zip(&run.truth.positions).zip(&run.range_labels) {
                match l {
                    Verdict::Valid => prop_assert!((s.range - x).abs() <= 6.0 * noise + 1e-12),
                    Verdict::False => prop_assert!(s.range < *x),
                }
            }
            let apex = run.truth.apex_index;
            for (s, x) in run.log.samples()[..=apex].iter().zip(&run.truth.positions) {
                prop_assert!(s.counts() / cfg.counts_per_inch >= x - 1e-9);
            }
        }
    }
}
