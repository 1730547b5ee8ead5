#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Localization of an out-and-back in-pipe robot from track encoders and a
//! laser rangefinder.
//!
//! The pipeline has three reciprocal stages:
//!
//! 1. [`filter`] propagates an encoder-based location estimate and uses it to
//!    reject rangefinder returns that bounced off the pipe wall.
//! 2. [`calib`] rescales encoder odometry between accepted range readings
//!    (anchors) so drift stays confined to short segments.
//! 3. [`smoother`] fuses the calibrated odometry increments with the accepted
//!    ranges in a 1-D Gaussian factor graph and solves for the MAP trajectory.
//!
//! [`sim`] produces labeled synthetic runs with the pathologies seen on real
//! hardware, and [`eval`] implements the ground-truth and zippering metrics.
//!
//! The crate is `no_std` and only needs `alloc`. Distances are inches and
//! times are seconds throughout.

extern crate alloc;

pub mod calib;
pub mod error;
pub mod eval;
pub mod filter;
mod math;
pub mod model;
pub mod sim;
pub mod smoother;

pub use calib::{CalibConfig, CalibratedOdometry};
pub use error::{Error, Result};
pub use eval::{ErrorSeries, RunTable, Stats, ZipperingReport};
pub use filter::{FilterConfig, FilterResult, Verdict};
pub use model::{EncoderSample, RangeSample, RunMeta, Sample, SensorLog, SyncPolicy};
pub use sim::{BlockEvent, GroundTruth, LabeledLog, SimConfig};
pub use smoother::{FactorGraph1D, FusionConfig, Localization, Trajectory};
