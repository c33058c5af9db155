//! Streaming prediction of 3D respiratory marker motion.
//!
//! The crate is organised bottom-up:
//!
//! * [`trace`] ingests raw marker logs, resamples them onto a uniform grid and
//!   generates synthetic breathing traces.
//! * [`predictors`] holds the six base forecasters (PP, LE, MULIN, ES1, ES2,
//!   ES3), each updated in constant work per sample.
//! * [`metrics`] scores a prediction stream by error and jitter.
//! * [`exsmi`] is the switching runtime: outlier gate, warm-up, decayed
//!   performance tracking and per-step choice between a main model and a
//!   baseline.
//! * [`harness`] evaluates predictors over trace sets and writes reports.

// `!(x > 0.0)` is used on purpose so NaN fails range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exsmi;
pub mod harness;
pub mod metrics;
pub mod predictors;
pub mod trace;
pub mod vec3;

pub use error::{Error, ErrorCategory, Result};
pub use exsmi::{
    run_session, Candidate, ExsmiConfig, ExsmiState, ScoringMode, Selection, SessionRun,
    StepOutput, StepSource,
};
pub use metrics::{PairedSeries, SessionScore};
pub use predictors::{run_predictor, Prediction, PredictorKind, PredictorState};
pub use trace::{Activity, RawSample, Sample, SynthConfig, Trace, TraceMeta};
pub use vec3::Vec3;
