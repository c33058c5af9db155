//! Streaming base predictors.
//!
//! Every predictor consumes one grid sample at a time and emits one
//! `horizon`-step-ahead position. All recursions are applied per axis and the
//! state is a fixed set of scalars and fixed-capacity rings, so work and memory
//! per sample do not grow with the session length.
//!
//! ```text
//! PP     x̂(t+h) = x(t)
//! LE     x̂(t+h) = x(t) + (x(t) - x(t-h))
//! MULIN  x̂(t+h) = α (x(t) + Σ_{i=1..k} δⁱ(t)) + (1-α) x̂(t+h-1)
//!        δ¹(t) = x(t) - x(t-h),  δⁱ⁺¹(t) = δⁱ(t) - δⁱ(t-h)
//! ES1    ŝ(t) = α x(t) + (1-α) ŝ(t-1),           x̂(t+h) = ŝ(t)
//! ES2    l(t) = α x(t) + (1-α)(l(t-1) + b(t-1))
//!        b(t) = β (l(t) - l(t-1)) + (1-β) b(t-1),  x̂(t+h) = l(t) + h b(t)
//! ES3    l(t) = α (x(t) - s(t-p)) + (1-α)(l(t-1) + b(t-1))
//!        b(t) as ES2
//!        s(t) = γ (x(t) - l(0)) + (1-γ) s(t-p)
//!        x̂(t+h) = l(t) + h b(t) + s(t-p+h)
//! ```
//!
//! Until a model has seen the history its recursion needs it emits the
//! persistent prediction.

use std::fmt;

use crate::error::{Error, Result};
use crate::metrics::PairedSeries;
use crate::trace::{Sample, Trace};
use crate::vec3::{self, Vec3};

pub const DEFAULT_MULIN_ALPHA: f64 = 0.9;
pub const DEFAULT_MULIN_ORDER: usize = 2;
pub const RESPIRATORY_PERIOD_S: f64 = 5.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictorKind {
    Pp,
    Le,
    Mulin {
        alpha: f64,
        k: usize,
    },
    Es1 {
        alpha: f64,
    },
    Es2 {
        alpha: f64,
        beta: f64,
    },
    Es3 {
        alpha: f64,
        beta: f64,
        gamma: f64,
        period_samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingModel {
    Es1,
    Es2,
    Es3,
}

/// Recommended smoothing constants, tuned on respiratory traces.
pub fn recommended_params(model: SmoothingModel, delta_s: f64) -> PredictorKind {
    match model {
        SmoothingModel::Es1 => PredictorKind::Es1 { alpha: 0.7 },
        SmoothingModel::Es2 => PredictorKind::Es2 {
            alpha: 0.7,
            beta: 0.6,
        },
        SmoothingModel::Es3 => PredictorKind::Es3 {
            alpha: 0.7,
            beta: 0.3,
            gamma: 0.3,
            period_samples: (RESPIRATORY_PERIOD_S / delta_s).round() as usize,
        },
    }
}

impl PredictorKind {
    pub fn mulin_default() -> Self {
        PredictorKind::Mulin {
            alpha: DEFAULT_MULIN_ALPHA,
            k: DEFAULT_MULIN_ORDER,
        }
    }

    /// PP, LE, MULIN and the three smoothers with their recommended settings.
    pub fn standard_set(delta_s: f64) -> Vec<PredictorKind> {
        vec![
            PredictorKind::Pp,
            PredictorKind::Le,
            PredictorKind::mulin_default(),
            recommended_params(SmoothingModel::Es1, delta_s),
            recommended_params(SmoothingModel::Es2, delta_s),
            recommended_params(SmoothingModel::Es3, delta_s),
        ]
    }

    /// Short model label used in reports: `PP`, `LE`, `MULIN`, `ES1`, ...
    pub fn label(&self) -> &'static str {
        match self {
            PredictorKind::Pp => "PP",
            PredictorKind::Le => "LE",
            PredictorKind::Mulin { .. } => "MULIN",
            PredictorKind::Es1 { .. } => "ES1",
            PredictorKind::Es2 { .. } => "ES2",
            PredictorKind::Es3 { .. } => "ES3",
        }
    }

    /// Smoothing constants are accepted on the closed interval [0, 1] so the
    /// boundary cases (ES1 with α = 1 is PP, and so on) stay expressible.
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} must lie in [0, 1]")))
            }
        };
        match *self {
            PredictorKind::Pp | PredictorKind::Le => Ok(()),
            PredictorKind::Mulin { alpha, k } => {
                unit("alpha", alpha)?;
                if k == 0 {
                    return Err(Error::Config("MULIN order k must be at least 1".into()));
                }
                Ok(())
            }
            PredictorKind::Es1 { alpha } => unit("alpha", alpha),
            PredictorKind::Es2 { alpha, beta } => {
                unit("alpha", alpha)?;
                unit("beta", beta)
            }
            PredictorKind::Es3 {
                alpha,
                beta,
                gamma,
                period_samples,
            } => {
                unit("alpha", alpha)?;
                unit("beta", beta)?;
                unit("gamma", gamma)?;
                if period_samples < 2 {
                    return Err(Error::Config(format!(
                        "seasonal period {period_samples} must be at least 2 samples"
                    )));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PredictorKind::Pp | PredictorKind::Le => f.write_str(self.label()),
            PredictorKind::Mulin { alpha, k } => write!(f, "MULIN(alpha={alpha}, k={k})"),
            PredictorKind::Es1 { alpha } => write!(f, "ES1(alpha={alpha})"),
            PredictorKind::Es2 { alpha, beta } => write!(f, "ES2(alpha={alpha}, beta={beta})"),
            PredictorKind::Es3 {
                alpha,
                beta,
                gamma,
                period_samples,
            } => write!(
                f,
                "ES3(alpha={alpha}, beta={beta}, gamma={gamma}, p={period_samples})"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub target_index: u64,
    pub pos: Vec3,
}

/// Fixed-capacity history, newest element at lag 0.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct History {
    buf: Box<[Vec3]>,
    head: usize,
    len: usize,
}

impl History {
    pub(crate) fn new(capacity: usize) -> Self {
        History {
            buf: vec![[0.0; 3]; capacity.max(1)].into_boxed_slice(),
            head: 0,
            len: 0,
        }
    }

    pub(crate) fn push(&mut self, v: Vec3) {
        self.head = (self.head + 1) % self.buf.len();
        self.buf[self.head] = v;
        self.len = (self.len + 1).min(self.buf.len());
    }

    pub(crate) fn lag(&self, lag: usize) -> Option<Vec3> {
        if lag >= self.len {
            return None;
        }
        let n = self.buf.len();
        Some(self.buf[(self.head + n - lag) % n])
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn is_full(&self) -> bool {
        self.len == self.buf.len()
    }

    pub(crate) fn capacity(&self) -> usize {
        self.buf.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Pp,
    Le {
        obs: History,
    },
    Mulin {
        alpha: f64,
        obs: History,
        /// `deltas[i]` holds δ^(i+1) values.
        deltas: Vec<History>,
        prev_pred: Option<Vec3>,
    },
    Es1 {
        alpha: f64,
        smoothed: Option<Vec3>,
    },
    Es2 {
        alpha: f64,
        beta: f64,
        level: Vec3,
        trend: Vec3,
    },
    Es3 {
        alpha: f64,
        beta: f64,
        gamma: f64,
        level: Vec3,
        trend: Vec3,
        initial_level: Vec3,
        season: Box<[Vec3]>,
    },
}

/// Streaming state of one base predictor on one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorState {
    kind: PredictorKind,
    horizon: usize,
    model: Model,
    seen: u64,
    last_index: Option<u64>,
}

/// Seasonal components start at 1 mm.
const SEASON_INIT: Vec3 = [1.0; 3];

fn lerp(w: f64, a: Vec3, b: Vec3) -> Vec3 {
    // w·a + (1-w)·b, written out so w = 1 and w = 0 are exact
    let v = 1.0 - w;
    [
        w * a[0] + v * b[0],
        w * a[1] + v * b[1],
        w * a[2] + v * b[2],
    ]
}

fn scale_add(a: Vec3, h: f64, b: Vec3) -> Vec3 {
    [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]]
}

impl PredictorState {
    pub fn new(kind: PredictorKind, horizon: usize) -> Result<Self> {
        kind.validate()?;
        if horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        let model = match kind {
            PredictorKind::Pp => Model::Pp,
            PredictorKind::Le => Model::Le {
                obs: History::new(horizon + 1),
            },
            PredictorKind::Mulin { alpha, k } => Model::Mulin {
                alpha,
                obs: History::new(horizon + 1),
                deltas: (0..k).map(|_| History::new(horizon + 1)).collect(),
                prev_pred: None,
            },
            PredictorKind::Es1 { alpha } => Model::Es1 {
                alpha,
                smoothed: None,
            },
            PredictorKind::Es2 { alpha, beta } => Model::Es2 {
                alpha,
                beta,
                level: [0.0; 3],
                trend: [0.0; 3],
            },
            PredictorKind::Es3 {
                alpha,
                beta,
                gamma,
                period_samples,
            } => {
                if period_samples <= horizon {
                    return Err(Error::Config(format!(
                        "seasonal period {period_samples} must exceed the horizon {horizon}"
                    )));
                }
                Model::Es3 {
                    alpha,
                    beta,
                    gamma,
                    level: [0.0; 3],
                    trend: [0.0; 3],
                    initial_level: [0.0; 3],
                    season: vec![SEASON_INIT; period_samples].into_boxed_slice(),
                }
            }
        };
        Ok(PredictorState {
            kind,
            horizon,
            model,
            seen: 0,
            last_index: None,
        })
    }

    pub fn kind(&self) -> PredictorKind {
        self.kind
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of samples ingested so far.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Whether the model has the history its own recursion needs; before that
    /// it emits the persistent prediction.
    pub fn is_primed(&self) -> bool {
        match &self.model {
            Model::Pp => self.seen > 0,
            Model::Le { obs } => obs.is_full(),
            Model::Mulin { deltas, .. } => deltas.last().is_some_and(|d| d.len() > 0),
            Model::Es1 { .. } => self.seen > 0,
            Model::Es2 { .. } | Model::Es3 { .. } => self.seen >= 2,
        }
    }

    /// Number of finite-difference orders MULIN keeps history for.
    pub fn delta_orders(&self) -> usize {
        match &self.model {
            Model::Mulin { deltas, .. } => deltas.len(),
            _ => 0,
        }
    }

    /// Seasonal components of ES3, in ring order.
    pub fn season(&self) -> Option<&[Vec3]> {
        match &self.model {
            Model::Es3 { season, .. } => Some(season),
            _ => None,
        }
    }

    /// Bytes held by this state, stack and heap. Constant after construction.
    pub fn state_bytes(&self) -> usize {
        let v = std::mem::size_of::<Vec3>();
        let heap = match &self.model {
            Model::Pp | Model::Es1 { .. } | Model::Es2 { .. } => 0,
            Model::Le { obs } => obs.capacity() * v,
            Model::Mulin { obs, deltas, .. } => {
                obs.capacity() * v
                    + deltas.capacity() * std::mem::size_of::<History>()
                    + deltas.iter().map(|d| d.capacity() * v).sum::<usize>()
            }
            Model::Es3 { season, .. } => season.len() * v,
        };
        std::mem::size_of::<Self>() + heap
    }

    /// Ingests the next grid sample and returns the prediction for
    /// `sample.index + horizon`. Samples must arrive with contiguous indices;
    /// a rejected sample leaves the state untouched.
    pub fn update_and_predict(&mut self, sample: Sample) -> Result<Prediction> {
        if let Some(last) = self.last_index {
            if sample.index != last + 1 {
                return Err(Error::Sequencing {
                    expected: last + 1,
                    got: sample.index,
                });
            }
        }
        if !vec3::is_finite(sample.pos) {
            return Err(Error::NonFinite(sample.index));
        }
        let pos = self.step(sample.pos);
        self.last_index = Some(sample.index);
        self.seen += 1;
        Ok(Prediction {
            target_index: sample.index + self.horizon as u64,
            pos,
        })
    }

    fn step(&mut self, x: Vec3) -> Vec3 {
        let h = self.horizon;
        let first = self.seen == 0;
        let t = self.seen as usize;
        match &mut self.model {
            Model::Pp => x,
            Model::Le { obs } => {
                obs.push(x);
                match obs.lag(h) {
                    Some(past) => vec3::add(x, vec3::sub(x, past)),
                    None => x,
                }
            }
            Model::Mulin {
                alpha,
                obs,
                deltas,
                prev_pred,
            } => {
                obs.push(x);
                if let Some(past) = obs.lag(h) {
                    deltas[0].push(vec3::sub(x, past));
                    for i in 1..deltas.len() {
                        let lower = &deltas[i - 1];
                        match (lower.lag(0), lower.lag(h)) {
                            (Some(now), Some(then)) => {
                                let d = vec3::sub(now, then);
                                deltas[i].push(d);
                            }
                            _ => break,
                        }
                    }
                }
                let primed = deltas.last().is_some_and(|d| d.len() > 0);
                let pred = match *prev_pred {
                    Some(prev) if primed => {
                        let mut raw = x;
                        for d in deltas.iter() {
                            raw = vec3::add(raw, d.lag(0).expect("primed"));
                        }
                        lerp(*alpha, raw, prev)
                    }
                    _ => x,
                };
                *prev_pred = Some(pred);
                pred
            }
            Model::Es1 { alpha, smoothed } => {
                let s = match *smoothed {
                    Some(prev) => lerp(*alpha, x, prev),
                    None => x,
                };
                *smoothed = Some(s);
                s
            }
            Model::Es2 {
                alpha,
                beta,
                level,
                trend,
            } => {
                if first {
                    *level = x;
                    *trend = [0.0; 3];
                    return x;
                }
                let prev_level = *level;
                let l = lerp(*alpha, x, vec3::add(prev_level, *trend));
                let b = lerp(*beta, vec3::sub(l, prev_level), *trend);
                *level = l;
                *trend = b;
                scale_add(l, h as f64, b)
            }
            Model::Es3 {
                alpha,
                beta,
                gamma,
                level,
                trend,
                initial_level,
                season,
            } => {
                if first {
                    *level = x;
                    *trend = [0.0; 3];
                    *initial_level = x;
                    return x;
                }
                let p = season.len();
                let slot = t % p;
                let s_old = season[slot];
                let prev_level = *level;
                let l = lerp(*alpha, vec3::sub(x, s_old), vec3::add(prev_level, *trend));
                let b = lerp(*beta, vec3::sub(l, prev_level), *trend);
                season[slot] = lerp(*gamma, vec3::sub(x, *initial_level), s_old);
                *level = l;
                *trend = b;
                vec3::add(scale_add(l, h as f64, b), season[(t + h) % p])
            }
        }
    }
}

/// Runs a standalone predictor over a trace. Position `k` of the returned
/// series pairs the prediction made at sample `k` with the true position at
/// `k + horizon`.
pub fn run_predictor(
    trace: &Trace,
    kind: PredictorKind,
    horizon: usize,
    eval_start: usize,
) -> Result<PairedSeries> {
    let mut state = PredictorState::new(kind, horizon)?;
    let n = trace.len();
    if n <= horizon {
        return Err(Error::InsufficientData(format!(
            "trace of {n} samples is too short for horizon {horizon}"
        )));
    }
    let mut predicted = Vec::with_capacity(n - horizon);
    for s in &trace.samples[..n - horizon] {
        predicted.push(state.update_and_predict(*s)?.pos);
    }
    let truth = trace.samples[horizon..].iter().map(|s| s.pos).collect();
    PairedSeries::new(truth, predicted, trace.delta_s, eval_start)
}
