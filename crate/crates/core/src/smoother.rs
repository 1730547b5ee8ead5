//! 1-D Gaussian factor graph over per-timestamp positions.
//!
//! Every factor is linear in the scalar positions, so the MAP estimate is a
//! single solve of the information system `H x = g`. `H` is tridiagonal: the
//! odometry chain only couples neighbouring nodes while the prior and range
//! factors add to the diagonal. The solve is an LDLᵀ sweep and the marginal
//! variances come from the diagonal of `H⁻¹` via forward and backward pivots.

use alloc::vec::Vec;

use crate::calib::{calibrate_encoders, CalibConfig, CalibratedOdometry};
use crate::error::{Error, Result};
use crate::filter::{filter_rangefinder, FilterConfig, FilterResult};
use crate::math;
use crate::model::SensorLog;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    /// Std of each odometry increment factor, inches.
    pub sigma_odom: f64,
    /// Std of each range factor, inches.
    pub sigma_range: f64,
    /// Std of the launch-point prior, inches.
    pub sigma_prior: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self { sigma_odom: 0.05, sigma_range: 0.02, sigma_prior: 1e-4 }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("sigma_odom", self.sigma_odom), ("sigma_range", self.sigma_range), ("sigma_prior", self.sigma_prior)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig { field, reason: "must be positive and finite" });
            }
        }
        if !(self.sigma_range < self.sigma_odom) {
            return Err(Error::InvalidConfig { field: "sigma_range", reason: "must be smaller than sigma_odom" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorFactor {
    pub node: usize,
    pub mean: f64,
    pub sigma: f64,
}

/// Measured increment between node `from` and `from + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometryFactor {
    pub from: usize,
    pub delta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeFactor {
    pub node: usize,
    pub range: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph1D {
    times: Vec<f64>,
    prior: PriorFactor,
    odometry: Vec<OdometryFactor>,
    ranges: Vec<RangeFactor>,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig { field: "sigma", reason: "must be positive and finite" })
    }
}

impl FactorGraph1D {
    /// Graph with one node per timestamp and a prior on one node.
    pub fn new(times: Vec<f64>, prior: PriorFactor) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyLog);
        }
        if prior.node >= times.len() {
            return Err(Error::MismatchedLengths { expected: times.len(), actual: prior.node + 1 });
        }
        check_sigma(prior.sigma)?;
        Ok(Self { times, prior, odometry: Vec::new(), ranges: Vec::new() })
    }

    /// Graph whose node "times" are just the node indices.
    pub fn with_nodes(node_count: usize, prior: PriorFactor) -> Result<Self> {
        Self::new((0..node_count).map(|i| i as f64).collect(), prior)
    }

    pub fn add_odometry(&mut self, from: usize, delta: f64, sigma: f64) -> Result<()> {
        if from + 1 >= self.node_count() {
            return Err(Error::MismatchedLengths { expected: self.node_count(), actual: from + 2 });
        }
        check_sigma(sigma)?;
        self.odometry.push(OdometryFactor { from, delta, sigma });
        Ok(())
    }

    pub fn add_range(&mut self, node: usize, range: f64, sigma: f64) -> Result<()> {
        if node >= self.node_count() {
            return Err(Error::MismatchedLengths { expected: self.node_count(), actual: node + 1 });
        }
        check_sigma(sigma)?;
        self.ranges.push(RangeFactor { node, range, sigma });
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn prior(&self) -> &PriorFactor {
        &self.prior
    }

    pub fn odometry(&self) -> &[OdometryFactor] {
        &self.odometry
    }

    pub fn ranges(&self) -> &[RangeFactor] {
        &self.ranges
    }

    /// Weighted sum of squared residuals.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let sq = |r: f64, s: f64| (r / s) * (r / s);
        let mut f = sq(x[self.prior.node] - self.prior.mean, self.prior.sigma);
        for o in &self.odometry {
            f += sq(x[o.from + 1] - x[o.from] - o.delta, o.sigma);
        }
        for r in &self.ranges {
            f += sq(x[r.node] - r.range, r.sigma);
        }
        f
    }

    /// Analytic gradient of [`objective`](Self::objective).
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = alloc::vec![0.0; x.len()];
        let p = &self.prior;
        g[p.node] += 2.0 * (x[p.node] - p.mean) / (p.sigma * p.sigma);
        for o in &self.odometry {
            let r = 2.0 * (x[o.from + 1] - x[o.from] - o.delta) / (o.sigma * o.sigma);
            g[o.from + 1] += r;
            g[o.from] -= r;
        }
        for r in &self.ranges {
            g[r.node] += 2.0 * (x[r.node] - r.range) / (r.sigma * r.sigma);
        }
        g
    }

    /// Information system: diagonal, super-diagonal and right-hand side.
    fn information(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.node_count();
        let mut diag = alloc::vec![0.0; n];
        let mut off = alloc::vec![0.0; n.saturating_sub(1)];
        let mut rhs = alloc::vec![0.0; n];
        let w = 1.0 / (self.prior.sigma * self.prior.sigma);
        diag[self.prior.node] += w;
        rhs[self.prior.node] += w * self.prior.mean;
        for o in &self.odometry {
            let w = 1.0 / (o.sigma * o.sigma);
            diag[o.from] += w;
            diag[o.from + 1] += w;
            off[o.from] -= w;
            rhs[o.from] -= w * o.delta;
            rhs[o.from + 1] += w * o.delta;
        }
        for r in &self.ranges {
            let w = 1.0 / (r.sigma * r.sigma);
            diag[r.node] += w;
            rhs[r.node] += w * r.range;
        }
        (diag, off, rhs)
    }
}

/// MAP trajectory with per-node marginal standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub marginal_std: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// LDLᵀ factors of a symmetric tridiagonal matrix.
struct Ldl {
    pivots: Vec<f64>,
    lower: Vec<f64>,
}

impl Ldl {
    fn factor(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let d = if i == 0 {
                diag[0]
            } else {
                let l = off[i - 1] / pivots[i - 1];
                lower.push(l);
                diag[i] - l * off[i - 1]
            };
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::SingularSystem(i));
            }
            pivots.push(d);
        }
        Ok(Self { pivots, lower })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut z = rhs.to_vec();
        for i in 1..n {
            z[i] -= self.lower[i - 1] * z[i - 1];
        }
        for (zi, d) in z.iter_mut().zip(&self.pivots) {
            *zi /= d;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            z[i] -= self.lower[i] * z[i + 1];
        }
        z
    }
}

fn tridiag_mul(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += off[i] * x[i + 1];
            }
            v
        })
        .collect()
}

/// Solve for the minimizer of the graph objective.
pub fn solve_map(graph: &FactorGraph1D) -> Result<Trajectory> {
    let (diag, off, rhs) = graph.information();
    let n = diag.len();
    let ldl = Ldl::factor(&diag, &off)?;
    let mut x = ldl.solve(&rhs);

    // One refinement pass against the assembled system.
    let hx = tridiag_mul(&diag, &off, &x);
    let residual: Vec<f64> = rhs.iter().zip(&hx).map(|(g, h)| g - h).collect();
    for (xi, d) in x.iter_mut().zip(ldl.solve(&residual)) {
        *xi += d;
    }

    // diag(H⁻¹)_i = 1 / (d_i - b_i² / e_{i+1}), with d the forward pivots and
    // e the pivots of the same elimination run from the bottom.
    let mut back = alloc::vec![0.0; n];
    back[n - 1] = diag[n - 1];
    for i in (0..n - 1).rev() {
        back[i] = diag[i] - off[i] * off[i] / back[i + 1];
    }
    let marginal_std = (0..n)
        .map(|i| {
            let info = if i + 1 < n { ldl.pivots[i] - off[i] * off[i] / back[i + 1] } else { ldl.pivots[i] };
            if info > 0.0 {
                Ok(math::sqrt(1.0 / info))
            } else {
                Err(Error::SingularSystem(i))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Trajectory { times: graph.times.clone(), positions: x, marginal_std })
}

/// Odometry chain from calibrated position deltas, range factors at every
/// accepted reading and a tight prior pinning node 0 at the launch point.
pub fn build_graph(calib: &CalibratedOdometry, filter: &FilterResult, cfg: &FusionConfig) -> Result<FactorGraph1D> {
    if calib.positions.len() != filter.len() || filter.times.len() != filter.len() {
        return Err(Error::MismatchedLengths { expected: filter.len(), actual: calib.positions.len() });
    }
    cfg.validate()?;
    let mut graph = FactorGraph1D::new(filter.times.clone(), PriorFactor { node: 0, mean: 0.0, sigma: cfg.sigma_prior })?;
    graph.odometry.reserve(calib.positions.len().saturating_sub(1));
    for (i, w) in calib.positions.windows(2).enumerate() {
        graph.odometry.push(OdometryFactor { from: i, delta: w[1] - w[0], sigma: cfg.sigma_odom });
    }
    for &(node, r) in &filter.accepted_ranges {
        graph.add_range(node, r.range, cfg.sigma_range)?;
    }
    Ok(graph)
}

/// Everything the pipeline produced for one log.
#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    pub filter: FilterResult,
    pub calibration: CalibratedOdometry,
    pub trajectory: Trajectory,
}

/// Filter, calibrate, build the graph and solve it.
pub fn localize(log: &SensorLog, f_cfg: &FilterConfig, c_cfg: &CalibConfig, fusion: &FusionConfig) -> Result<Localization> {
    let filter = filter_rangefinder(log, f_cfg)?;
    let calibration = calibrate_encoders(&filter, log, c_cfg)?;
    let graph = build_graph(&calibration, &filter, fusion)?;
    let trajectory = solve_map(&graph)?;
    Ok(Localization { filter, calibration, trajectory })
}

pub fn estimate_trajectory(log: &SensorLog, f_cfg: &FilterConfig, c_cfg: &CalibConfig, fusion: &FusionConfig) -> Result<Trajectory> {
    localize(log, f_cfg, c_cfg, fusion).map(|l| l.trajectory)
}
