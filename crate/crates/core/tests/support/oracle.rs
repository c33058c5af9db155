//! Batch reference recursions. Each model is written over whole time-indexed
//! arrays, straight from its defining recurrences, with no rings or caches.

use exsmi_core::{PredictorKind, Vec3};

/// Prediction made at every sample `t` for `t + h`.
pub fn predict_all(kind: PredictorKind, h: usize, xs: &[Vec3]) -> Vec<Vec3> {
    let mut out = vec![[0.0; 3]; xs.len()];
    for axis in 0..3 {
        let x: Vec<f64> = xs.iter().map(|p| p[axis]).collect();
        for (o, v) in out.iter_mut().zip(scalar(kind, h, &x)) {
            o[axis] = v;
        }
    }
    out
}

fn scalar(kind: PredictorKind, h: usize, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    match kind {
        PredictorKind::Pp => x.to_vec(),
        PredictorKind::Le => (0..n)
            .map(|t| {
                if t >= h {
                    x[t] + (x[t] - x[t - h])
                } else {
                    x[t]
                }
            })
            .collect(),
        PredictorKind::Mulin { alpha, k } => {
            // delta[i][t] is the order i+1 difference, defined once t >= (i+1) h
            let mut delta = vec![vec![None::<f64>; n]; k];
            for t in h..n {
                delta[0][t] = Some(x[t] - x[t - h]);
            }
            for i in 1..k {
                for t in h..n {
                    if let (Some(a), Some(b)) = (delta[i - 1][t], delta[i - 1][t - h]) {
                        delta[i][t] = Some(a - b);
                    }
                }
            }
            let mut out = vec![0.0; n];
            for t in 0..n {
                out[t] = match delta[k - 1][t] {
                    Some(_) if t > 0 => {
                        let raw = x[t] + (0..k).map(|i| delta[i][t].unwrap()).sum::<f64>();
                        alpha * raw + (1.0 - alpha) * out[t - 1]
                    }
                    _ => x[t],
                };
            }
            out
        }
        PredictorKind::Es1 { alpha } => {
            let mut s = vec![0.0; n];
            for t in 0..n {
                s[t] = if t == 0 {
                    x[0]
                } else {
                    alpha * x[t] + (1.0 - alpha) * s[t - 1]
                };
            }
            s
        }
        PredictorKind::Es2 { alpha, beta } => {
            let (mut l, mut b, mut out) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            for t in 0..n {
                if t == 0 {
                    l[0] = x[0];
                    out[0] = x[0];
                    continue;
                }
                l[t] = alpha * x[t] + (1.0 - alpha) * (l[t - 1] + b[t - 1]);
                b[t] = beta * (l[t] - l[t - 1]) + (1.0 - beta) * b[t - 1];
                out[t] = l[t] + h as f64 * b[t];
            }
            out
        }
        PredictorKind::Es3 {
            alpha,
            beta,
            gamma,
            period_samples: p,
        } => {
            let (mut l, mut b, mut s, mut out) =
                (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            // seasonal components before the first update are 1 mm
            let season = |s: &[f64], j: isize| if j <= 0 { 1.0 } else { s[j as usize] };
            for t in 0..n {
                if t == 0 {
                    l[0] = x[0];
                    out[0] = x[0];
                    continue;
                }
                let back = season(&s, t as isize - p as isize);
                l[t] = alpha * (x[t] - back) + (1.0 - alpha) * (l[t - 1] + b[t - 1]);
                b[t] = beta * (l[t] - l[t - 1]) + (1.0 - beta) * b[t - 1];
                s[t] = gamma * (x[t] - l[0]) + (1.0 - gamma) * back;
                out[t] = l[t] + h as f64 * b[t] + season(&s, (t + h) as isize - p as isize);
            }
            out
        }
    }
}

/// Mean error and mean jitter in mm/s of `pred[k]` against `truth[k]` over
/// `start..`, summed in plain loops.
pub fn session_means(truth: &[Vec3], pred: &[Vec3], start: usize, delta_s: f64) -> (f64, f64) {
    let dist = |a: Vec3, b: Vec3| {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    };
    let mut e = 0.0;
    let mut j = 0.0;
    for k in start..truth.len() {
        e += dist(truth[k], pred[k]);
        if k > start {
            j += dist(pred[k], pred[k - 1]);
        }
    }
    let n = (truth.len() - start) as f64;
    (e / n / delta_s, j / (n - 1.0) / delta_s)
}
