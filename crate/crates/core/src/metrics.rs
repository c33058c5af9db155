//! Error and jitter of a prediction stream.
//!
//! Pointwise error is the 3D distance between truth and prediction, pointwise
//! jitter the 3D distance between consecutive predictions. Session scores are
//! the means of both over the evaluated range divided by the grid spacing, so
//! they read as mm/s and do not depend on session length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Samples excluded from scoring at the start of a session (30 s at 10 Hz).
pub const DEFAULT_EVAL_START: usize = 300;

/// Truth and prediction streams aligned by position, plus the first position
/// that counts towards session aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    pub truth: Vec<Vec3>,
    pub predicted: Vec<Vec3>,
    pub delta_s: f64,
    pub eval_start: usize,
}

impl PairedSeries {
    pub fn new(
        truth: Vec<Vec3>,
        predicted: Vec<Vec3>,
        delta_s: f64,
        eval_start: usize,
    ) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Config(format!(
                "truth has {} points but prediction has {}",
                truth.len(),
                predicted.len()
            )));
        }
        if !(delta_s > 0.0) {
            return Err(Error::Config(format!("delta_s {delta_s} must be positive")));
        }
        if eval_start >= truth.len() {
            return Err(Error::InsufficientData(format!(
                "evaluation starts at {eval_start} but the series has {} points",
                truth.len()
            )));
        }
        Ok(PairedSeries {
            truth,
            predicted,
            delta_s,
            eval_start,
        })
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    pub fn evaluated_len(&self) -> usize {
        self.len().saturating_sub(self.eval_start)
    }

    pub fn evaluated_predictions(&self) -> &[Vec3] {
        &self.predicted[self.eval_start..]
    }

    /// Writes `position,truth_x,truth_y,truth_z,pred_x,pred_y,pred_z,error_mm,evaluated`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from(
            "position,truth_x,truth_y,truth_z,pred_x,pred_y,pred_z,error_mm,evaluated\n",
        );
        for (i, (t, p)) in self.truth.iter().zip(&self.predicted).enumerate() {
            let _ = writeln!(
                out,
                "{i},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                t[0],
                t[1],
                t[2],
                p[0],
                p[1],
                p[2],
                pointwise_error(*t, *p),
                u8::from(i >= self.eval_start)
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionScore {
    pub mean_error_mm_s: f64,
    pub mean_jitter_mm_s: f64,
    pub combined: f64,
}

impl SessionScore {
    pub fn new(mean_error_mm_s: f64, mean_jitter_mm_s: f64) -> Self {
        SessionScore {
            mean_error_mm_s,
            mean_jitter_mm_s,
            combined: mean_error_mm_s + mean_jitter_mm_s,
        }
    }
}

#[inline]
pub fn pointwise_error(truth: Vec3, pred: Vec3) -> f64 {
    vec3::dist(truth, pred)
}

#[inline]
pub fn pointwise_jitter(pred_now: Vec3, pred_prev: Vec3) -> f64 {
    vec3::dist(pred_now, pred_prev)
}

/// Mean error and mean jitter over the evaluated range, in mm/s. Jitter pairs
/// only consecutive predictions that both lie inside the range.
pub fn session_score(series: &PairedSeries) -> Result<SessionScore> {
    let n = series.evaluated_len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "session score needs at least 2 evaluated points, got {n}"
        )));
    }
    let start = series.eval_start;
    let err_sum: f64 = series.truth[start..]
        .iter()
        .zip(&series.predicted[start..])
        .map(|(t, p)| pointwise_error(*t, *p))
        .sum();
    let preds = &series.predicted[start..];
    let jit_sum: f64 = preds.windows(2).map(|w| pointwise_jitter(w[1], w[0])).sum();
    let mean_error = err_sum / n as f64 / series.delta_s;
    let mean_jitter = jit_sum / (n - 1) as f64 / series.delta_s;
    Ok(SessionScore::new(mean_error, mean_jitter))
}

/// Path length of the prediction stream, rescaled to `window_s` seconds.
pub fn travel_distance(pred: &[Vec3], delta_s: f64, window_s: f64) -> Result<f64> {
    if pred.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "travel distance needs at least 2 predictions, got {}",
            pred.len()
        )));
    }
    let span = (pred.len() - 1) as f64 * delta_s;
    if window_s > span + 1e-9 * span {
        return Err(Error::InsufficientData(format!(
            "window {window_s} s exceeds the series span {span} s"
        )));
    }
    let path: f64 = pred.windows(2).map(|w| vec3::dist(w[1], w[0])).sum();
    Ok(path / span * window_s)
}

/// Prediction minus truth projected on two axes, over the evaluated range.
pub fn residual_scatter(series: &PairedSeries, axes: (usize, usize)) -> Result<Vec<[f64; 2]>> {
    if axes.0 > 2 || axes.1 > 2 {
        return Err(Error::Config(format!("axes {axes:?} must be in 0..=2")));
    }
    let start = series.eval_start;
    Ok(series.truth[start..]
        .iter()
        .zip(&series.predicted[start..])
        .map(|(t, p)| {
            let r = vec3::sub(*p, *t);
            [r[axes.0], r[axes.1]]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_examples() {
        assert_eq!(pointwise_error([0.0; 3], [3.0, 4.0, 0.0]), 5.0);
        assert_eq!(pointwise_error([2.5; 3], [2.5; 3]), 0.0);
        assert!((pointwise_error([1.0; 3], [2.0; 3]) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jitter_examples() {
        assert_eq!(pointwise_jitter([0.0, 0.0, 2.0], [0.0; 3]), 2.0);
        assert_eq!(pointwise_jitter([1.0; 3], [1.0; 3]), 0.0);
    }

    #[test]
    fn session_mean_error() {
        let truth = vec![[0.0; 3]; 3];
        let pred = vec![[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]];
        let s = session_score(&PairedSeries::new(truth, pred, 0.1, 0).unwrap()).unwrap();
        assert!((s.mean_error_mm_s - 20.0).abs() < 1e-9);
        assert!((s.mean_jitter_mm_s - 10.0).abs() < 1e-9);
        assert_eq!(s.combined, s.mean_error_mm_s + s.mean_jitter_mm_s);
    }

    #[test]
    fn constant_prediction_has_no_jitter() {
        let truth: Vec<Vec3> = (0..50).map(|i| [(i as f64).sin(), 0.0, 1.0]).collect();
        let s =
            session_score(&PairedSeries::new(truth, vec![[0.3; 3]; 50], 0.1, 10).unwrap()).unwrap();
        assert_eq!(s.mean_jitter_mm_s, 0.0);
        assert_eq!(s.combined, s.mean_error_mm_s);
    }

    #[test]
    fn session_needs_two_points() {
        let series = PairedSeries::new(vec![[0.0; 3]; 3], vec![[0.0; 3]; 3], 0.1, 2).unwrap();
        assert!(matches!(
            session_score(&series),
            Err(Error::InsufficientData(_))
        ));
        assert!(PairedSeries::new(vec![[0.0; 3]; 3], vec![[0.0; 3]; 3], 0.1, 3).is_err());
        assert!(PairedSeries::new(vec![[0.0; 3]; 3], vec![[0.0; 3]; 2], 0.1, 0).is_err());
    }

    #[test]
    fn travel_examples() {
        let moving: Vec<Vec3> = (0..=100).map(|i| [i as f64, 0.0, 0.0]).collect();
        assert!((travel_distance(&moving, 0.1, 10.0).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(travel_distance(&[[1.0; 3]; 200], 0.1, 10.0).unwrap(), 0.0);
        assert!(travel_distance(&[], 0.1, 10.0).is_err());
        assert!(travel_distance(&moving[..10], 0.1, 10.0).is_err());
    }

    #[test]
    fn scatter_examples() {
        let truth: Vec<Vec3> = (0..5).map(|i| [i as f64, 2.0, -1.0]).collect();
        let perfect = PairedSeries::new(truth.clone(), truth.clone(), 0.1, 1).unwrap();
        let r = residual_scatter(&perfect, (0, 2)).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|p| *p == [0.0, 0.0]));
        let shifted: Vec<Vec3> = truth.iter().map(|t| [t[0] + 1.0, t[1], t[2]]).collect();
        let off = PairedSeries::new(truth, shifted, 0.1, 0).unwrap();
        assert!(residual_scatter(&off, (0, 2))
            .unwrap()
            .iter()
            .all(|p| *p == [1.0, 0.0]));
        assert!(residual_scatter(&off, (0, 3)).is_err());
    }
}
