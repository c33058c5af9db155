//! ExSmi: online switching between a main smoothing model and a simple
//! extrapolation baseline.
//!
//! Per incoming sample the runtime
//!
//! 1. gates implausible jumps (3D displacement from the last accepted sample
//!    of at least `gate_mm`),
//! 2. updates both candidates and buffers their `h`-step-ahead predictions,
//! 3. once warm-up is over, scores each candidate's matured prediction with
//!    exponentially decayed error and jitter estimates,
//! 4. emits the fresh prediction of the candidate with the lower
//!    error + jitter estimate (ties go to the main model).
//!
//! A rejected sample changes nothing but the reject bookkeeping; the previous
//! emission is repeated. After `max_consecutive_rejects` rejections in a row
//! the next finite sample is accepted regardless of the gate, so a genuine
//! baseline shift cannot lock the stream out.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{pointwise_error, pointwise_jitter, PairedSeries};
use crate::predictors::{History, Prediction, PredictorKind, PredictorState};
use crate::trace::{Sample, Trace};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoringMode {
    /// Each candidate is scored on its own buffered prediction stream.
    Consistent,
    /// The baseline is scored on the lagged raw signal (error of `r(t-h)`
    /// against `r(t)`, jitter of `r(t-h)` against `r(t-h-1)`) while its
    /// emitted prediction is still linear extrapolation.
    LaggedBaseline,
}

/// Which candidate may be emitted after warm-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selection {
    Adaptive,
    ForceMain,
    ForceBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Candidate {
    Main,
    Baseline,
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Candidate::Main => "Main",
            Candidate::Baseline => "Baseline",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExsmiConfig {
    pub horizon: usize,
    pub warmup_samples: usize,
    pub decay: f64,
    pub gate_mm: f64,
    pub max_consecutive_rejects: usize,
    pub scoring_mode: ScoringMode,
    pub baseline: PredictorKind,
    pub selection: Selection,
}

impl Default for ExsmiConfig {
    fn default() -> Self {
        ExsmiConfig {
            horizon: 2,
            warmup_samples: 300,
            decay: 0.1,
            gate_mm: 10.0,
            max_consecutive_rejects: 10,
            scoring_mode: ScoringMode::Consistent,
            baseline: PredictorKind::Le,
            selection: Selection::Adaptive,
        }
    }
}

impl ExsmiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.warmup_samples == 0 {
            return Err(Error::Config("warm-up must be at least 1 sample".into()));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::Config(format!(
                "decay {} must lie in (0, 1)",
                self.decay
            )));
        }
        if !(self.gate_mm > 0.0) {
            return Err(Error::Config(format!(
                "gate {} mm must be positive",
                self.gate_mm
            )));
        }
        if self.max_consecutive_rejects == 0 {
            return Err(Error::Config(
                "max_consecutive_rejects must be at least 1".into(),
            ));
        }
        self.baseline.validate()
    }
}

/// One step of an exponentially decayed running mean.
#[inline]
pub fn decayed(decay: f64, previous: f64, value: f64) -> f64 {
    decay * value + (1.0 - decay) * previous
}

/// Decayed error and jitter estimates of both candidates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub error_main: f64,
    pub error_base: f64,
    pub jitter_main: f64,
    pub jitter_base: f64,
}

impl Estimates {
    pub fn main_total(&self) -> f64 {
        self.error_main + self.jitter_main
    }

    pub fn base_total(&self) -> f64 {
        self.error_base + self.jitter_base
    }

    /// Lower combined estimate wins; ties keep the main model.
    pub fn preferred(&self) -> Candidate {
        if self.main_total() <= self.base_total() {
            Candidate::Main
        } else {
            Candidate::Baseline
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepSource {
    Main,
    Baseline,
    Hold,
    WarmingUp,
}

impl StepSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepSource::Main => "Main",
            StepSource::Baseline => "Baseline",
            StepSource::Hold => "Hold",
            StepSource::WarmingUp => "WarmingUp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub index: u64,
    pub prediction: Prediction,
    pub source: StepSource,
    pub rejected: bool,
    pub estimates: Estimates,
    pub active: Candidate,
}

/// Matured prediction of one candidate and the one matured before it.
#[derive(Debug, Clone, PartialEq)]
struct Pipeline {
    pending: VecDeque<Prediction>,
    last_matured: Option<Vec3>,
}

impl Pipeline {
    fn new(horizon: usize) -> Self {
        Pipeline {
            pending: VecDeque::with_capacity(horizon),
            last_matured: None,
        }
    }

    /// Pushes a fresh prediction and returns the one it displaces, together
    /// with the previously matured position.
    fn cycle(&mut self, fresh: Prediction, depth: usize) -> Option<(Prediction, Option<Vec3>)> {
        let matured = if self.pending.len() == depth {
            self.pending.pop_front()
        } else {
            None
        };
        self.pending.push_back(fresh);
        matured.map(|m| {
            let prev = self.last_matured.replace(m.pos);
            (m, prev)
        })
    }
}

/// Runtime state for one signal stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ExsmiState {
    cfg: ExsmiConfig,
    main: PredictorState,
    baseline: PredictorState,
    main_pipe: Pipeline,
    base_pipe: Pipeline,
    /// Accepted observations, for literal baseline scoring.
    accepted_hist: History,
    accepted: u64,
    last_accepted: Option<Vec3>,
    estimates: Estimates,
    active: Candidate,
    last_emitted: Option<Prediction>,
    last_index: Option<u64>,
    reject_streak: usize,
}

impl ExsmiState {
    pub fn new(cfg: ExsmiConfig, main_kind: PredictorKind) -> Result<Self> {
        cfg.validate()?;
        let h = cfg.horizon;
        Ok(ExsmiState {
            cfg,
            main: PredictorState::new(main_kind, h)?,
            baseline: PredictorState::new(cfg.baseline, h)?,
            main_pipe: Pipeline::new(h),
            base_pipe: Pipeline::new(h),
            accepted_hist: History::new(h + 2),
            accepted: 0,
            last_accepted: None,
            estimates: Estimates::default(),
            active: Candidate::Main,
            last_emitted: None,
            last_index: None,
            reject_streak: 0,
        })
    }

    pub fn config(&self) -> &ExsmiConfig {
        &self.cfg
    }

    pub fn main(&self) -> &PredictorState {
        &self.main
    }

    pub fn baseline(&self) -> &PredictorState {
        &self.baseline
    }

    pub fn estimates(&self) -> Estimates {
        self.estimates
    }

    pub fn active(&self) -> Candidate {
        self.active
    }

    pub fn reject_streak(&self) -> usize {
        self.reject_streak
    }

    pub fn last_emitted(&self) -> Option<Prediction> {
        self.last_emitted
    }

    /// Compares everything except the reject bookkeeping (streak, last seen
    /// index, last emission).
    pub fn same_model_state(&self, other: &ExsmiState) -> bool {
        self.main == other.main
            && self.baseline == other.baseline
            && self.main_pipe == other.main_pipe
            && self.base_pipe == other.base_pipe
            && self.accepted_hist == other.accepted_hist
            && self.accepted == other.accepted
            && self.last_accepted == other.last_accepted
            && self.estimates == other.estimates
            && self.active == other.active
    }

    pub fn state_bytes(&self) -> usize {
        std::mem::size_of::<Self>() + self.main.state_bytes() + self.baseline.state_bytes()
            - 2 * std::mem::size_of::<PredictorState>()
            + (self.main_pipe.pending.capacity() + self.base_pipe.pending.capacity())
                * std::mem::size_of::<Prediction>()
            + self.accepted_hist.capacity() * std::mem::size_of::<Vec3>()
    }

    fn gate_rejects(&self, pos: Vec3) -> bool {
        if !vec3::is_finite(pos) {
            return true;
        }
        if self.reject_streak >= self.cfg.max_consecutive_rejects {
            return false;
        }
        match self.last_accepted {
            Some(prev) => vec3::dist(pos, prev) >= self.cfg.gate_mm,
            None => false,
        }
    }

    /// Processes one grid sample.
    pub fn step(&mut self, sample: Sample) -> Result<StepOutput> {
        if let Some(last) = self.last_index {
            if sample.index != last + 1 {
                return Err(Error::Sequencing {
                    expected: last + 1,
                    got: sample.index,
                });
            }
        }
        let h = self.cfg.horizon as u64;
        let t = sample.index;

        if self.gate_rejects(sample.pos) {
            let held = self.last_emitted.ok_or_else(|| {
                Error::InsufficientData(format!(
                    "sample {t} rejected before any prediction was emitted"
                ))
            })?;
            self.last_index = Some(t);
            self.reject_streak += 1;
            let prediction = Prediction {
                target_index: t + h,
                pos: held.pos,
            };
            self.last_emitted = Some(prediction);
            return Ok(StepOutput {
                index: t,
                prediction,
                source: StepSource::Hold,
                rejected: true,
                estimates: self.estimates,
                active: self.active,
            });
        }

        self.last_index = Some(t);
        self.reject_streak = 0;
        self.last_accepted = Some(sample.pos);
        self.accepted_hist.push(sample.pos);
        let inner = Sample::new(self.accepted, sample.pos);
        self.accepted += 1;

        let retarget = |p: Prediction| Prediction {
            target_index: t + h,
            pos: p.pos,
        };
        let fresh_main = retarget(self.main.update_and_predict(inner)?);
        let fresh_base = retarget(self.baseline.update_and_predict(inner)?);

        let depth = self.cfg.horizon;
        let matured_main = self.main_pipe.cycle(fresh_main, depth);
        let matured_base = self.base_pipe.cycle(fresh_base, depth);

        let scoring = t >= self.cfg.warmup_samples as u64;
        if scoring {
            self.score(sample.pos, t, matured_main, matured_base);
        }

        let (prediction, source) = if scoring {
            self.active = match self.cfg.selection {
                Selection::Adaptive => self.estimates.preferred(),
                Selection::ForceMain => Candidate::Main,
                Selection::ForceBaseline => Candidate::Baseline,
            };
            match self.active {
                Candidate::Main => (fresh_main, StepSource::Main),
                Candidate::Baseline => (fresh_base, StepSource::Baseline),
            }
        } else {
            (fresh_main, StepSource::WarmingUp)
        };
        self.last_emitted = Some(prediction);
        Ok(StepOutput {
            index: t,
            prediction,
            source,
            rejected: false,
            estimates: self.estimates,
            active: self.active,
        })
    }

    fn score(
        &mut self,
        truth: Vec3,
        t: u64,
        main: Option<(Prediction, Option<Vec3>)>,
        base: Option<(Prediction, Option<Vec3>)>,
    ) {
        let d = self.cfg.decay;
        let est = &mut self.estimates;
        // predictions buffered across a rejection target a different index
        let on_time = |m: &(Prediction, Option<Vec3>)| m.0.target_index == t;

        if let Some(m) = main.filter(on_time) {
            est.error_main = decayed(d, est.error_main, pointwise_error(m.0.pos, truth));
            if let Some(prev) = m.1 {
                est.jitter_main = decayed(d, est.jitter_main, pointwise_jitter(m.0.pos, prev));
            }
        }
        match self.cfg.scoring_mode {
            ScoringMode::Consistent => {
                if let Some(b) = base.filter(on_time) {
                    est.error_base = decayed(d, est.error_base, pointwise_error(b.0.pos, truth));
                    if let Some(prev) = b.1 {
                        est.jitter_base =
                            decayed(d, est.jitter_base, pointwise_jitter(b.0.pos, prev));
                    }
                }
            }
            ScoringMode::LaggedBaseline => {
                let h = self.cfg.horizon;
                if let Some(lagged) = self.accepted_hist.lag(h) {
                    est.error_base = decayed(d, est.error_base, pointwise_error(lagged, truth));
                    if let Some(before) = self.accepted_hist.lag(h + 1) {
                        est.jitter_base =
                            decayed(d, est.jitter_base, pointwise_jitter(lagged, before));
                    }
                }
            }
        }
    }
}

/// Output of a full ExSmi session over a trace.
#[derive(Debug, Clone)]
pub struct SessionRun {
    /// Position `k` pairs the emission at sample `k` with the truth at `k + h`.
    pub series: PairedSeries,
    pub log: Vec<StepOutput>,
}

pub const STEP_LOG_HEADER: &str = "index,source,rejected,pred_x,pred_y,pred_z,EL,EB,JL,JB,active";

impl SessionRun {
    pub fn log_csv(&self) -> String {
        step_log_csv(&self.log)
    }
}

pub fn step_log_csv(log: &[StepOutput]) -> String {
    let mut out = String::with_capacity(96 * (log.len() + 1));
    out.push_str(STEP_LOG_HEADER);
    out.push('\n');
    for s in log {
        let p = s.prediction.pos;
        let e = s.estimates;
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            s.index,
            s.source.as_str(),
            u8::from(s.rejected),
            p[0],
            p[1],
            p[2],
            e.error_main,
            e.error_base,
            e.jitter_main,
            e.jitter_base,
            s.active
        );
    }
    out
}

/// Runs ExSmi over a whole trace, scoring from `warmup_samples` on.
pub fn run_session(
    trace: &Trace,
    cfg: &ExsmiConfig,
    main_kind: PredictorKind,
) -> Result<SessionRun> {
    let n = trace.len();
    let need = cfg.warmup_samples + cfg.horizon + 2;
    if n < need {
        return Err(Error::InsufficientData(format!(
            "trace has {n} samples, ExSmi needs at least {need}"
        )));
    }
    let mut state = ExsmiState::new(*cfg, main_kind)?;
    let mut log = Vec::with_capacity(n);
    for s in &trace.samples {
        log.push(state.step(*s)?);
    }
    let predicted = log[..n - cfg.horizon]
        .iter()
        .map(|s| s.prediction.pos)
        .collect();
    let truth = trace.samples[cfg.horizon..].iter().map(|s| s.pos).collect();
    let series = PairedSeries::new(truth, predicted, trace.delta_s, cfg.warmup_samples)?;
    Ok(SessionRun { series, log })
}
