//! Flat key-value config files (TOML syntax, unit-suffixed keys).
//!
//! Simulation config: `pipe_length_in` is required, everything else falls
//! back to the defaults of [`SimConfig`]. Pipeline config: every key is
//! optional.

use std::fmt::Write as _;
use std::path::Path;

use pipeloc_core::calib::CalibConfig;
use pipeloc_core::filter::FilterConfig;
use pipeloc_core::sim::{FalseRateCurve, SimConfig, SpeedSegment};
use pipeloc_core::smoother::FusionConfig;
use pipeloc_core::RunMeta;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimConfigFile {
    pipe_length_in: f64,
    pipe_diameter_in: Option<f64>,
    speed_in_per_s: Option<f64>,
    /// `[[from_in, speed_in_per_s], …]`
    speed_profile: Option<Vec<(f64, f64)>>,
    sample_period_s: Option<f64>,
    counts_per_inch: Option<f64>,
    encoder_bias_frac: Option<f64>,
    encoder_slip_std_frac: Option<f64>,
    range_noise_std_in: Option<f64>,
    validity_horizon_in: Option<f64>,
    false_rate_max: Option<f64>,
    /// `[[distance_in, probability], …]`
    false_rate_curve: Option<Vec<(f64, f64)>>,
    false_shifts_in: Option<Vec<f64>>,
    block_spacing_in: Option<f64>,
    block_count: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineConfigFile {
    counts_per_inch: Option<f64>,
    pipe_length_in: Option<f64>,
    pipe_diameter_in: Option<f64>,
    thres_in: Option<f64>,
    max_consecutive_rejections: Option<usize>,
    dist_step_in: Option<f64>,
    min_displacement_in: Option<f64>,
    sigma_odom_in: Option<f64>,
    sigma_range_in: Option<f64>,
    sigma_prior_in: Option<f64>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(CliError::io(path))
}

/// Parse and validate a simulation config.
pub fn parse_sim_config(text: &str) -> std::result::Result<SimConfig, String> {
    let file: SimConfigFile = toml::from_str(text).map_err(|e| e.message().to_string())?;
    if file.speed_in_per_s.is_some() && file.speed_profile.is_some() {
        return Err("set either speed_in_per_s or speed_profile, not both".into());
    }
    let d = SimConfig::default();
    let pipe_length = file.pipe_length_in;
    let speed_profile = match (file.speed_profile, file.speed_in_per_s) {
        (Some(p), _) => p.into_iter().map(|(from, speed)| SpeedSegment { from, speed }).collect(),
        (None, Some(speed)) => vec![SpeedSegment { from: 0.0, speed }],
        (None, None) => d.speed_profile.clone(),
    };
    let cfg = SimConfig {
        pipe_length,
        pipe_diameter: file.pipe_diameter_in.unwrap_or(d.pipe_diameter),
        speed_profile,
        sample_period: file.sample_period_s.unwrap_or(d.sample_period),
        counts_per_inch: file.counts_per_inch.unwrap_or(d.counts_per_inch),
        encoder_bias: file.encoder_bias_frac.unwrap_or(d.encoder_bias),
        encoder_slip_std: file.encoder_slip_std_frac.unwrap_or(d.encoder_slip_std),
        range_noise_std: file.range_noise_std_in.unwrap_or(d.range_noise_std),
        validity_horizon: file.validity_horizon_in.unwrap_or(d.validity_horizon),
        false_rate_curve: file.false_rate_curve.map(|knots| FalseRateCurve { knots }),
        false_rate_max: file.false_rate_max.unwrap_or(d.false_rate_max),
        false_shifts: file.false_shifts_in,
        block_spacing: file.block_spacing_in.unwrap_or(d.block_spacing),
        block_count: file.block_count.unwrap_or(d.block_count),
        seed: file.seed.unwrap_or(d.seed),
    };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

pub fn load_sim_config(path: &Path) -> Result<SimConfig> {
    parse_sim_config(&read(path)?).map_err(|m| CliError::Config(format!("{}: {m}", path.display())))
}

/// Render a simulation config so that parsing it gives back the same values.
pub fn render_sim_config(cfg: &SimConfig) -> String {
    let mut s = String::new();
    let pairs = |v: &[(f64, f64)]| {
        let items: Vec<String> = v.iter().map(|(a, b)| format!("[{a:?}, {b:?}]")).collect();
        format!("[{}]", items.join(", "))
    };
    let _ = writeln!(s, "pipe_length_in = {:?}", cfg.pipe_length);
    let _ = writeln!(s, "pipe_diameter_in = {:?}", cfg.pipe_diameter);
    let profile: Vec<(f64, f64)> = cfg.speed_profile.iter().map(|p| (p.from, p.speed)).collect();
    let _ = writeln!(s, "speed_profile = {}", pairs(&profile));
    let _ = writeln!(s, "sample_period_s = {:?}", cfg.sample_period);
    let _ = writeln!(s, "counts_per_inch = {:?}", cfg.counts_per_inch);
    let _ = writeln!(s, "encoder_bias_frac = {:?}", cfg.encoder_bias);
    let _ = writeln!(s, "encoder_slip_std_frac = {:?}", cfg.encoder_slip_std);
    let _ = writeln!(s, "range_noise_std_in = {:?}", cfg.range_noise_std);
    let _ = writeln!(s, "validity_horizon_in = {:?}", cfg.validity_horizon);
    let _ = writeln!(s, "false_rate_max = {:?}", cfg.false_rate_max);
    if let Some(curve) = &cfg.false_rate_curve {
        let _ = writeln!(s, "false_rate_curve = {}", pairs(&curve.knots));
    }
    if let Some(shifts) = &cfg.false_shifts {
        let items: Vec<String> = shifts.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "false_shifts_in = [{}]", items.join(", "));
    }
    let _ = writeln!(s, "block_spacing_in = {:?}", cfg.block_spacing);
    let _ = writeln!(s, "block_count = {}", cfg.block_count);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    s
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Resolved settings for `localize`.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub meta: RunMeta,
    pub filter: FilterConfig,
    pub calib: CalibConfig,
    pub fusion: FusionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self { meta: sim.meta(), filter: FilterConfig::default(), calib: CalibConfig::default(), fusion: FusionConfig::default() }
    }
}

impl PipelineConfig {
    /// Pipeline settings matching a simulated run's encoder scale and pipe.
    pub fn for_sim(sim: &SimConfig) -> Self {
        let mut p = Self::default();
        p.set_counts_per_inch(sim.counts_per_inch);
        p.meta = sim.meta();
        p
    }

    fn set_counts_per_inch(&mut self, c: f64) {
        self.meta.counts_per_inch = c;
        self.filter.counts_per_inch = c;
        self.calib.counts_per_inch = c;
    }

    pub fn validate(&self) -> std::result::Result<(), pipeloc_core::Error> {
        self.meta.validate()?;
        self.filter.validate()?;
        self.calib.validate()?;
        self.fusion.validate()
    }
}

/// Apply the keys present in `text` on top of `base`.
pub fn parse_pipeline_config(text: &str, base: PipelineConfig) -> std::result::Result<PipelineConfig, String> {
    let file: PipelineConfigFile = toml::from_str(text).map_err(|e| e.message().to_string())?;
    let mut p = base;
    if let Some(c) = file.counts_per_inch {
        p.set_counts_per_inch(c);
    }
    if let Some(v) = file.pipe_length_in {
        p.meta.pipe_length = v;
    }
    if let Some(v) = file.pipe_diameter_in {
        p.meta.pipe_diameter = v;
    }
    if let Some(v) = file.thres_in {
        p.filter.thres = v;
    }
    if let Some(v) = file.max_consecutive_rejections {
        p.filter.max_consecutive_rejections = v;
    }
    if let Some(v) = file.dist_step_in {
        p.calib.dist_step = v;
    }
    if let Some(v) = file.min_displacement_in {
        p.calib.min_displacement = v;
    }
    if let Some(v) = file.sigma_odom_in {
        p.fusion.sigma_odom = v;
    }
    if let Some(v) = file.sigma_range_in {
        p.fusion.sigma_range = v;
    }
    if let Some(v) = file.sigma_prior_in {
        p.fusion.sigma_prior = v;
    }
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

pub fn load_pipeline_config(path: Option<&Path>, base: PipelineConfig) -> Result<PipelineConfig> {
    match path {
        None => Ok(base),
        Some(path) => parse_pipeline_config(&read(path)?, base).map_err(|m| CliError::Config(format!("{}: {m}", path.display()))),
    }
}
