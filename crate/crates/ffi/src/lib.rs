//! C ABI over `exsmi-core`.
//!
//! Every fallible function returns an [`ExsmiStatus`]. On failure the message
//! is kept per thread and can be copied out with [`exsmi_last_error_message`].
//! Handles are opaque; free them with the matching `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use exsmi_core::exsmi::StepSource;
use exsmi_core::predictors::{recommended_params, SmoothingModel};
use exsmi_core::{
    Candidate, Error, ErrorCategory, ExsmiConfig, ExsmiState, Prediction, PredictorKind,
    PredictorState, Sample, ScoringMode, Selection,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExsmiStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Config = 3,
    InsufficientData = 4,
    Sequencing = 5,
    Value = 6,
    Report = 7,
    Io = 8,
    Panic = 9,
}

/// Values of `ExsmiPredictorSpec::model`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExsmiModel {
    Pp = 0,
    Le = 1,
    Mulin = 2,
    Es1 = 3,
    Es2 = 4,
    Es3 = 5,
}

/// Values of `ExsmiSessionConfig::scoring_mode`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExsmiScoringMode {
    Consistent = 0,
    LaggedBaseline = 1,
}

/// Values of `ExsmiSessionConfig::selection`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExsmiSelection {
    Adaptive = 0,
    ForceMain = 1,
    ForceBaseline = 2,
}

/// Values of `ExsmiStepResult::source`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExsmiSource {
    Main = 0,
    Baseline = 1,
    Hold = 2,
    WarmingUp = 3,
}

/// Predictor choice. Fields a model does not use are ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExsmiPredictorSpec {
    /// One of `ExsmiModel`.
    pub model: u32,
    /// ES smoothing factor, or the MULIN blend factor.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mulin_k: u32,
    pub period_samples: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExsmiPrediction {
    pub target_index: u64,
    pub pos: [f64; 3],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExsmiSessionConfig {
    pub horizon: u32,
    pub warmup_samples: u32,
    pub decay: f64,
    /// Gate threshold in mm; use infinity to disable the gate.
    pub gate_mm: f64,
    pub max_consecutive_rejects: u32,
    /// One of `ExsmiScoringMode`.
    pub scoring_mode: u32,
    /// One of `ExsmiSelection`.
    pub selection: u32,
    pub baseline: ExsmiPredictorSpec,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExsmiStepResult {
    pub index: u64,
    pub prediction: ExsmiPrediction,
    /// One of `ExsmiSource`.
    pub source: u32,
    pub rejected: bool,
    /// 0 for the main model, 1 for the baseline.
    pub active: u32,
    pub error_main: f64,
    pub error_base: f64,
    pub jitter_main: f64,
    pub jitter_base: f64,
}

/// Opaque streaming predictor.
pub struct ExsmiPredictor(PredictorState);

/// Opaque ExSmi session.
pub struct ExsmiSession(ExsmiState);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> ExsmiStatus {
    match err.category() {
        ErrorCategory::Parse => ExsmiStatus::Parse,
        ErrorCategory::Config => ExsmiStatus::Config,
        ErrorCategory::InsufficientData => ExsmiStatus::InsufficientData,
        ErrorCategory::Sequencing => ExsmiStatus::Sequencing,
        ErrorCategory::Value => ExsmiStatus::Value,
        ErrorCategory::Report => ExsmiStatus::Report,
        ErrorCategory::Io => ExsmiStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ExsmiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ExsmiStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            ExsmiStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            ExsmiStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn read_pos(pos: *const f64) -> Result<[f64; 3], Failure> {
    if pos.is_null() {
        return Err(Failure::Null("pos"));
    }
    Ok([*pos, *pos.add(1), *pos.add(2)])
}

fn model_from_code(code: u32) -> Result<ExsmiModel, Error> {
    Ok(match code {
        0 => ExsmiModel::Pp,
        1 => ExsmiModel::Le,
        2 => ExsmiModel::Mulin,
        3 => ExsmiModel::Es1,
        4 => ExsmiModel::Es2,
        5 => ExsmiModel::Es3,
        other => return Err(Error::Config(format!("unknown model code {other}"))),
    })
}

fn kind_from_spec(spec: &ExsmiPredictorSpec) -> Result<PredictorKind, Error> {
    let kind = match model_from_code(spec.model)? {
        ExsmiModel::Pp => PredictorKind::Pp,
        ExsmiModel::Le => PredictorKind::Le,
        ExsmiModel::Mulin => PredictorKind::Mulin {
            alpha: spec.alpha,
            k: spec.mulin_k as usize,
        },
        ExsmiModel::Es1 => PredictorKind::Es1 { alpha: spec.alpha },
        ExsmiModel::Es2 => PredictorKind::Es2 {
            alpha: spec.alpha,
            beta: spec.beta,
        },
        ExsmiModel::Es3 => PredictorKind::Es3 {
            alpha: spec.alpha,
            beta: spec.beta,
            gamma: spec.gamma,
            period_samples: spec.period_samples as usize,
        },
    };
    kind.validate()?;
    Ok(kind)
}

fn spec_from_kind(kind: PredictorKind) -> ExsmiPredictorSpec {
    let mut spec = ExsmiPredictorSpec {
        model: 0,
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
        mulin_k: 0,
        period_samples: 0,
    };
    match kind {
        PredictorKind::Pp => spec.model = ExsmiModel::Pp as u32,
        PredictorKind::Le => spec.model = ExsmiModel::Le as u32,
        PredictorKind::Mulin { alpha, k } => {
            spec.model = ExsmiModel::Mulin as u32;
            spec.alpha = alpha;
            spec.mulin_k = k as u32;
        }
        PredictorKind::Es1 { alpha } => {
            spec.model = ExsmiModel::Es1 as u32;
            spec.alpha = alpha;
        }
        PredictorKind::Es2 { alpha, beta } => {
            spec.model = ExsmiModel::Es2 as u32;
            spec.alpha = alpha;
            spec.beta = beta;
        }
        PredictorKind::Es3 {
            alpha,
            beta,
            gamma,
            period_samples,
        } => {
            spec.model = ExsmiModel::Es3 as u32;
            spec.alpha = alpha;
            spec.beta = beta;
            spec.gamma = gamma;
            spec.period_samples = period_samples as u32;
        }
    }
    spec
}

fn prediction_out(p: Prediction) -> ExsmiPrediction {
    ExsmiPrediction {
        target_index: p.target_index,
        pos: p.pos,
    }
}

fn config_from_c(c: &ExsmiSessionConfig) -> Result<ExsmiConfig, Error> {
    let scoring_mode = match c.scoring_mode {
        0 => ScoringMode::Consistent,
        1 => ScoringMode::LaggedBaseline,
        other => return Err(Error::Config(format!("unknown scoring mode {other}"))),
    };
    let selection = match c.selection {
        0 => Selection::Adaptive,
        1 => Selection::ForceMain,
        2 => Selection::ForceBaseline,
        other => return Err(Error::Config(format!("unknown selection {other}"))),
    };
    Ok(ExsmiConfig {
        horizon: c.horizon as usize,
        warmup_samples: c.warmup_samples as usize,
        decay: c.decay,
        gate_mm: c.gate_mm,
        max_consecutive_rejects: c.max_consecutive_rejects as usize,
        scoring_mode,
        baseline: kind_from_spec(&c.baseline)?,
        selection,
    })
}

/// Short name of a status code. The string is static.
#[no_mangle]
pub extern "C" fn exsmi_status_name(status: ExsmiStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        ExsmiStatus::Ok => b"ok\0",
        ExsmiStatus::NullPointer => b"null pointer\0",
        ExsmiStatus::Parse => b"parse\0",
        ExsmiStatus::Config => b"config\0",
        ExsmiStatus::InsufficientData => b"insufficient data\0",
        ExsmiStatus::Sequencing => b"sequencing\0",
        ExsmiStatus::Value => b"value\0",
        ExsmiStatus::Report => b"report\0",
        ExsmiStatus::Io => b"io\0",
        ExsmiStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the size needed including the terminator.
#[no_mangle]
pub unsafe extern "C" fn exsmi_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Fills `out` with the default parameters of `model` at grid spacing `delta_s`.
#[no_mangle]
pub unsafe extern "C" fn exsmi_predictor_spec_default(
    model: u32,
    delta_s: f64,
    out: *mut ExsmiPredictorSpec,
) -> ExsmiStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        if !(delta_s > 0.0 && delta_s.is_finite()) {
            return Err(Error::Config(format!("delta_s {delta_s} must be positive")).into());
        }
        let kind = match model_from_code(model)? {
            ExsmiModel::Pp => PredictorKind::Pp,
            ExsmiModel::Le => PredictorKind::Le,
            ExsmiModel::Mulin => PredictorKind::mulin_default(),
            ExsmiModel::Es1 => recommended_params(SmoothingModel::Es1, delta_s),
            ExsmiModel::Es2 => recommended_params(SmoothingModel::Es2, delta_s),
            ExsmiModel::Es3 => recommended_params(SmoothingModel::Es3, delta_s),
        };
        *out = spec_from_kind(kind);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn exsmi_predictor_new(
    spec: *const ExsmiPredictorSpec,
    horizon: u32,
    out: *mut *mut ExsmiPredictor,
) -> ExsmiStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let kind = kind_from_spec(deref(spec, "spec")?)?;
        let state = PredictorState::new(kind, horizon as usize)?;
        *out = Box::into_raw(Box::new(ExsmiPredictor(state)));
        Ok(())
    })
}

/// Feeds sample `index` at `pos` (three values, mm) and writes the prediction
/// for `index + horizon`.
#[no_mangle]
pub unsafe extern "C" fn exsmi_predictor_step(
    predictor: *mut ExsmiPredictor,
    index: u64,
    pos: *const f64,
    out: *mut ExsmiPrediction,
) -> ExsmiStatus {
    guard(|| {
        let p = deref_mut(predictor, "predictor")?;
        let out = deref_mut(out, "out")?;
        let pos = read_pos(pos)?;
        *out = prediction_out(p.0.update_and_predict(Sample::new(index, pos))?);
        Ok(())
    })
}

/// True once the predictor has seen enough samples to leave its fallback.
#[no_mangle]
pub unsafe extern "C" fn exsmi_predictor_is_primed(predictor: *const ExsmiPredictor) -> bool {
    predictor.as_ref().is_some_and(|p| p.0.is_primed())
}

#[no_mangle]
pub unsafe extern "C" fn exsmi_predictor_free(predictor: *mut ExsmiPredictor) {
    if !predictor.is_null() {
        drop(Box::from_raw(predictor));
    }
}

#[no_mangle]
pub unsafe extern "C" fn exsmi_session_config_default(out: *mut ExsmiSessionConfig) -> ExsmiStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let d = ExsmiConfig::default();
        *out = ExsmiSessionConfig {
            horizon: d.horizon as u32,
            warmup_samples: d.warmup_samples as u32,
            decay: d.decay,
            gate_mm: d.gate_mm,
            max_consecutive_rejects: d.max_consecutive_rejects as u32,
            scoring_mode: match d.scoring_mode {
                ScoringMode::Consistent => ExsmiScoringMode::Consistent as u32,
                ScoringMode::LaggedBaseline => ExsmiScoringMode::LaggedBaseline as u32,
            },
            selection: match d.selection {
                Selection::Adaptive => ExsmiSelection::Adaptive as u32,
                Selection::ForceMain => ExsmiSelection::ForceMain as u32,
                Selection::ForceBaseline => ExsmiSelection::ForceBaseline as u32,
            },
            baseline: spec_from_kind(d.baseline),
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn exsmi_session_new(
    config: *const ExsmiSessionConfig,
    main: *const ExsmiPredictorSpec,
    out: *mut *mut ExsmiSession,
) -> ExsmiStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let cfg = config_from_c(deref(config, "config")?)?;
        let main = kind_from_spec(deref(main, "main")?)?;
        let state = ExsmiState::new(cfg, main)?;
        *out = Box::into_raw(Box::new(ExsmiSession(state)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn exsmi_session_step(
    session: *mut ExsmiSession,
    index: u64,
    pos: *const f64,
    out: *mut ExsmiStepResult,
) -> ExsmiStatus {
    guard(|| {
        let s = deref_mut(session, "session")?;
        let out = deref_mut(out, "out")?;
        let pos = read_pos(pos)?;
        let step = s.0.step(Sample::new(index, pos))?;
        *out = ExsmiStepResult {
            index: step.index,
            prediction: prediction_out(step.prediction),
            source: match step.source {
                StepSource::Main => ExsmiSource::Main,
                StepSource::Baseline => ExsmiSource::Baseline,
                StepSource::Hold => ExsmiSource::Hold,
                StepSource::WarmingUp => ExsmiSource::WarmingUp,
            } as u32,
            rejected: step.rejected,
            active: match step.active {
                Candidate::Main => 0,
                Candidate::Baseline => 1,
            },
            error_main: step.estimates.error_main,
            error_base: step.estimates.error_base,
            jitter_main: step.estimates.jitter_main,
            jitter_base: step.estimates.jitter_base,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn exsmi_session_free(session: *mut ExsmiSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}
