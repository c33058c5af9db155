#![allow(clippy::needless_range_loop)]

mod support;

use proptest::prelude::*;

use exsmi_core::metrics::{session_score, travel_distance};
use exsmi_core::trace::{
    generate_synthetic, normalize, parse_grid_csv, parse_raw_log, resample_to_grid, write_grid_csv,
    write_raw_log,
};
use exsmi_core::{PairedSeries, RawSample, SynthConfig, TraceMeta, Vec3};
use support::oracle;

fn vec3() -> impl Strategy<Value = Vec3> {
    [-50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64]
}

fn positions(min: usize, max: usize) -> impl Strategy<Value = Vec<Vec3>> {
    prop::collection::vec(vec3(), min..max)
}

/// Strictly increasing timestamps with gaps of 20 to 60 ms.
fn raw_times(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(20.0..60.0f64, 2..max).prop_map(|gaps| {
        let mut t = 1234.5;
        gaps.into_iter()
            .map(|g| {
                let now = t;
                t += g;
                now
            })
            .collect()
    })
}

fn rotate(p: Vec3, (a, b): (f64, f64)) -> Vec3 {
    // z rotation by a, then x rotation by b
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let q = [ca * p[0] - sa * p[1], sa * p[0] + ca * p[1], p[2]];
    [q[0], cb * q[1] - sb * q[2], sb * q[1] + cb * q[2]]
}

fn series(truth: Vec<Vec3>, pred: Vec<Vec3>, start: usize) -> PairedSeries {
    PairedSeries::new(truth, pred, 0.1, start).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn resample_is_exact_on_affine_signals(
        times in raw_times(200),
        a in vec3(),
        slope in [-0.05..0.05f64, -0.05..0.05f64, -0.05..0.05f64],
    ) {
        let line = |t: f64| [a[0] + slope[0] * t, a[1] + slope[1] * t, a[2] + slope[2] * t];
        let raw: Vec<RawSample> = times
            .iter()
            .enumerate()
            .map(|(i, &t)| RawSample { frame: i as u64, time_ms: t, pos: line(t) })
            .collect();
        let trace = resample_to_grid(&raw, 0.1).unwrap();
        let span = times[times.len() - 1] - times[0];
        prop_assert_eq!(trace.len(), (span / 100.0 + 1e-9).floor() as usize + 1);
        prop_assert_eq!(trace.samples[0].pos, raw[0].pos);
        for s in &trace.samples {
            let want = line(times[0] + s.index as f64 * 100.0);
            for i in 0..3 {
                prop_assert!((s.pos[i] - want[i]).abs() < 1e-9, "{} vs {}", s.pos[i], want[i]);
            }
        }
    }

    #[test]
    fn resample_passes_through_knots(pts in positions(2, 60)) {
        // raw samples exactly on the grid come back unchanged
        let raw: Vec<RawSample> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| RawSample { frame: i as u64, time_ms: 200.0 * i as f64, pos: *p })
            .collect();
        let trace = resample_to_grid(&raw, 0.2).unwrap();
        prop_assert_eq!(trace.positions(), pts);
    }

    #[test]
    fn normalize_is_idempotent_and_keeps_distances(pts in positions(1, 80)) {
        let trace = support::trace_of(pts.clone());
        let once = normalize(&trace).unwrap();
        let twice = normalize(&once).unwrap();
        prop_assert_eq!(&once, &twice);
        for axis in 0..3 {
            let min = once.samples.iter().map(|s| s.pos[axis]).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(min, 0.0);
        }
        let d = |p: Vec3, q: Vec3| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        let moved = once.positions();
        for i in 1..pts.len() {
            prop_assert!((d(pts[i], pts[0]) - d(moved[i], moved[0])).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_csv_round_trip(pts in positions(1, 80)) {
        let trace = support::trace_of(pts.clone());
        let back = parse_grid_csv(&write_grid_csv(&trace), 0.1, TraceMeta::named("test")).unwrap();
        prop_assert_eq!(back.len(), pts.len());
        for (s, p) in back.samples.iter().zip(&pts) {
            for i in 0..3 {
                prop_assert!((s.pos[i] - p[i]).abs() <= 5e-7);
            }
        }
        // a second round trip is exact
        let again = parse_grid_csv(&write_grid_csv(&back), 0.1, TraceMeta::named("test")).unwrap();
        prop_assert_eq!(again, back);
    }

    #[test]
    fn raw_log_round_trip(times in raw_times(50), p in vec3()) {
        let raw: Vec<RawSample> = times
            .iter()
            .enumerate()
            .map(|(i, &t)| RawSample { frame: i as u64, time_ms: t, pos: [p[0], p[1] + i as f64, p[2]] })
            .collect();
        let back = parse_raw_log(&write_raw_log(&raw)).unwrap();
        prop_assert_eq!(back.len(), raw.len());
        for (a, b) in back.iter().zip(&raw) {
            prop_assert_eq!(a.frame, b.frame);
            prop_assert!((a.time_ms - b.time_ms).abs() < 1e-3);
            for i in 0..3 {
                prop_assert!((a.pos[i] - b.pos[i]).abs() <= 5e-7);
            }
        }
    }

    #[test]
    fn score_matches_plain_loops(truth in positions(10, 60), noise in positions(10, 60), start in 0usize..8) {
        let n = truth.len().min(noise.len());
        let truth = truth[..n].to_vec();
        let pred: Vec<Vec3> = truth.iter().zip(&noise).map(|(t, e)| [t[0] + e[0] / 10.0, t[1] + e[1] / 10.0, t[2] + e[2] / 10.0]).collect();
        let s = session_score(&series(truth.clone(), pred.clone(), start)).unwrap();
        let (e, j) = oracle::session_means(&truth, &pred, start, 0.1);
        prop_assert!((s.mean_error_mm_s - e).abs() < 1e-9 * (1.0 + e));
        prop_assert!((s.mean_jitter_mm_s - j).abs() < 1e-9 * (1.0 + j));
    }

    #[test]
    fn score_is_rigid_motion_invariant(
        truth in positions(10, 40),
        pred in positions(10, 40),
        shift in vec3(),
        angles in (0.0..6.3f64, 0.0..6.3f64),
    ) {
        let n = truth.len().min(pred.len());
        let (truth, pred) = (truth[..n].to_vec(), pred[..n].to_vec());
        let base = session_score(&series(truth.clone(), pred.clone(), 2)).unwrap();
        let mv = |v: &Vec<Vec3>| -> Vec<Vec3> {
            v.iter().map(|p| { let r = rotate(*p, angles); [r[0] + shift[0], r[1] + shift[1], r[2] + shift[2]] }).collect()
        };
        let moved = session_score(&series(mv(&truth), mv(&pred), 2)).unwrap();
        prop_assert!((base.mean_error_mm_s - moved.mean_error_mm_s).abs() < 1e-9 * (1.0 + base.mean_error_mm_s));
        prop_assert!((base.mean_jitter_mm_s - moved.mean_jitter_mm_s).abs() < 1e-9 * (1.0 + base.mean_jitter_mm_s));
    }

    #[test]
    fn score_is_axis_permutation_invariant(truth in positions(5, 40), pred in positions(5, 40)) {
        let n = truth.len().min(pred.len());
        let (truth, pred) = (truth[..n].to_vec(), pred[..n].to_vec());
        let perm = |v: &[Vec3]| -> Vec<Vec3> { v.iter().map(|p| [p[1], p[2], p[0]]).collect() };
        let a = session_score(&series(truth.clone(), pred.clone(), 1)).unwrap();
        let b = session_score(&series(perm(&truth), perm(&pred), 1)).unwrap();
        prop_assert!((a.combined - b.combined).abs() < 1e-12 * (1.0 + a.combined));
    }

    #[test]
    fn travel_scales_with_window(pred in positions(3, 50), window in 0.05..0.2f64) {
        let span = (pred.len() - 1) as f64 * 0.1;
        let w = window.min(span);
        let full = travel_distance(&pred, 0.1, span).unwrap();
        let part = travel_distance(&pred, 0.1, w).unwrap();
        prop_assert!((part - full * w / span).abs() < 1e-9 * (1.0 + full));
    }
}

#[test]
fn synthetic_is_deterministic_per_seed() {
    let cfg = SynthConfig {
        duration_s: 60.0,
        event_rate_per_min: 3.0,
        event_magnitude_mm: 5.0,
        seed: 9,
        ..SynthConfig::default()
    };
    let a = generate_synthetic(&cfg).unwrap();
    let b = generate_synthetic(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), cfg.sample_count());
    let c = generate_synthetic(&SynthConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.positions(), c.positions());
}
