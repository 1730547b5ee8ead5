use pipeloc_core::calib::{calibrate_encoders, CalibConfig};
use pipeloc_core::eval::{absolute_error, ground_truth_error, zippering_error};
use pipeloc_core::filter::{filter_rangefinder, FilterConfig, Verdict};
use pipeloc_core::sim::{generate_run, FalseRateCurve, SimConfig, SpeedSegment};
use pipeloc_core::smoother::{build_graph, estimate_trajectory, localize, solve_map, FusionConfig};
use pipeloc_core::Error;

fn defaults() -> (FilterConfig, CalibConfig, FusionConfig) {
    (FilterConfig::default(), CalibConfig::default(), FusionConfig::default())
}

#[test]
fn noiseless_pipeline_reproduces_truth() {
    let run = generate_run(&SimConfig::noiseless()).unwrap();
    let (f, c, s) = defaults();
    let loc = localize(&run.log, &f, &c, &s).unwrap();
    assert!(loc.filter.verdicts.iter().all(|v| v.is_valid()));
    let filter_err = absolute_error(&loc.filter.loc_est, &run.truth.positions).unwrap();
    assert!(filter_err.stats.max < 1e-9, "{:?}", filter_err.stats);
    let cal_err = absolute_error(&loc.calibration.positions, &run.truth.positions).unwrap();
    assert!(cal_err.stats.max < 1e-9, "{:?}", cal_err.stats);
    let e1 = ground_truth_error(&loc.trajectory, &run.truth).unwrap();
    assert!(e1.stats.max <= 1e-6, "{:?}", e1.stats);
    let e2 = zippering_error(&loc.trajectory, &run.block_events).unwrap();
    assert!(e2.stats.max <= 1e-6);
}

#[test]
fn zippering_truth_is_exact() {
    let run = generate_run(&SimConfig { seed: 3, ..SimConfig::default() }).unwrap();
    let truth_traj = pipeloc_core::Trajectory {
        times: run.truth.times.clone(),
        positions: run.truth.positions.clone(),
        marginal_std: vec![0.0; run.truth.times.len()],
    };
    let rep = zippering_error(&truth_traj, &run.block_events).unwrap();
    assert_eq!(rep.rows.len(), 25);
    assert!(rep.rows.iter().all(|r| r.e2.abs() < 1e-9));
}

#[test]
fn graph_counts_and_single_node() {
    let run = generate_run(&SimConfig::noiseless()).unwrap();
    let (f, c, s) = defaults();
    let fr = filter_rangefinder(&run.log, &f).unwrap();
    let cal = calibrate_encoders(&fr, &run.log, &c).unwrap();
    let g = build_graph(&cal, &fr, &s).unwrap();
    let n = run.log.len();
    assert_eq!(g.node_count(), n);
    assert_eq!(g.odometry().len(), n - 1);
    assert_eq!(g.ranges().len(), n);

    let one = run.log.retain_indices(|i| i == 0).unwrap();
    let fr1 = filter_rangefinder(&one, &f).unwrap();
    let cal1 = pipeloc_core::CalibratedOdometry {
        positions: vec![0.0],
        anchors: vec![],
        forward_anchors: 0,
        segment_scales: vec![],
        apex_index: 0,
    };
    let mut fr1_no_range = fr1.clone();
    fr1_no_range.accepted_ranges.clear();
    let g1 = build_graph(&cal1, &fr1_no_range, &s).unwrap();
    assert_eq!((g1.node_count(), g1.odometry().len(), g1.ranges().len()), (1, 0, 0));
    let t = solve_map(&g1).unwrap();
    assert_eq!(t.positions, vec![0.0]);

    let mut short = cal.clone();
    short.positions.pop();
    assert!(matches!(build_graph(&short, &fr, &s), Err(Error::MismatchedLengths { .. })));
}

#[test]
fn without_range_factors_the_output_is_calibrated_odometry() {
    let run = generate_run(&SimConfig { seed: 5, ..SimConfig::default() }).unwrap();
    let (f, c, s) = defaults();
    let fr = filter_rangefinder(&run.log, &f).unwrap();
    let cal = calibrate_encoders(&fr, &run.log, &c).unwrap();
    let mut no_ranges = fr.clone();
    no_ranges.accepted_ranges.clear();
    let t = solve_map(&build_graph(&cal, &no_ranges, &s).unwrap()).unwrap();
    let diff = absolute_error(&t.positions, &cal.positions).unwrap();
    assert!(diff.stats.max < 1e-6, "{:?}", diff.stats);
}

#[test]
fn all_false_after_origin_is_an_error() {
    let run = generate_run(&SimConfig { false_rate_curve: Some(FalseRateCurve::constant(0.0)), ..SimConfig::noiseless() }).unwrap();
    let samples: Vec<_> = run
        .log
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| if i == 0 { *s } else { pipeloc_core::Sample { range: s.range + 100.0, ..*s } })
        .collect();
    let log = pipeloc_core::SensorLog::new(samples, *run.log.meta()).unwrap();
    let (f, c, s) = defaults();
    assert_eq!(estimate_trajectory(&log, &f, &c, &s), Err(Error::NoValidReadings));
}

#[test]
fn drift_is_confined_between_anchors() {
    let bias = 0.005;
    let noise = 0.05;
    for seed in 0..5 {
        let cfg = SimConfig {
            seed,
            encoder_bias: bias,
            encoder_slip_std: 0.0,
            range_noise_std: noise,
            false_rate_curve: Some(FalseRateCurve::constant(0.0)),
            ..SimConfig::default()
        };
        let run = generate_run(&cfg).unwrap();
        let (f, c, _) = defaults();
        let fr = filter_rangefinder(&run.log, &f).unwrap();
        let cal = calibrate_encoders(&fr, &run.log, &c).unwrap();
        assert!(cal.forward_anchors >= 30, "forward anchors {}", cal.forward_anchors);
        let mut bounds = vec![0usize];
        bounds.extend(cal.anchors.iter().map(|a| a.index));
        for w in bounds.windows(2) {
            let (j, k) = (w[0], w[1]);
            let seg_len = (run.truth.positions[k] - run.truth.positions[j]).abs();
            let limit = seg_len * bias + 6.0 * noise;
            for i in j..=k {
                let err = (cal.positions[i] - run.truth.positions[i]).abs();
                assert!(err <= limit, "seed {seed} segment {j}..{k}: {err} > {limit}");
            }
        }
        for a in &cal.anchors {
            assert!((cal.positions[a.index] - a.range).abs() <= 1e-9);
        }
    }
}

#[test]
fn false_label_frequency_follows_curve() {
    // Binomial 3-sigma check per 50 in depth bin, pooled over several seeds.
    let cfg = SimConfig::default();
    let curve = cfg.false_rate();
    let bins = 30;
    let width = cfg.pipe_length / bins as f64;
    let mut observed = vec![0.0; bins];
    let mut expected = vec![0.0; bins];
    let mut variance = vec![0.0; bins];
    for seed in 0..4 {
        let run = generate_run(&SimConfig { seed, ..cfg.clone() }).unwrap();
        for (x, l) in run.truth.positions.iter().zip(&run.range_labels) {
            if *x < 600.0 {
                continue;
            }
            let b = ((x / width) as usize).min(bins - 1);
            let p = curve.rate(*x);
            expected[b] += p;
            variance[b] += p * (1.0 - p);
            if *l == Verdict::False {
                observed[b] += 1.0;
            }
        }
    }
    for b in 0..bins {
        if expected[b] == 0.0 {
            continue;
        }
        let dev = (observed[b] - expected[b]).abs();
        assert!(dev <= 3.0 * variance[b].sqrt() + 1e-9, "bin {b}: observed {} expected {}", observed[b], expected[b]);
    }
}

#[test]
fn piecewise_speed_run_localizes() {
    let cfg = SimConfig {
        seed: 9,
        speed_profile: vec![
            SpeedSegment { from: 0.0, speed: 2.5 },
            SpeedSegment { from: 300.0, speed: 1.5 },
            SpeedSegment { from: 900.0, speed: 2.0 },
        ],
        ..SimConfig::default()
    };
    let run = generate_run(&cfg).unwrap();
    let (f, c, s) = defaults();
    let t = estimate_trajectory(&run.log, &f, &c, &s).unwrap();
    let e1 = ground_truth_error(&t, &run.truth).unwrap();
    assert!(e1.stats.mean < 0.3 && e1.stats.max < 2.0, "{:?}", e1.stats);
}
