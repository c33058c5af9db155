//! Batch evaluation of predictors and ExSmi over sets of traces.

pub mod bench;
pub mod config;
pub mod plots;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exsmi::{run_session, ExsmiConfig, StepOutput};
use crate::metrics::{session_score, PairedSeries, SessionScore};
use crate::predictors::{run_predictor, PredictorKind};
use crate::trace::{generate_synthetic, load_grid_trace, Activity, SynthConfig, Trace};

/// Session error (mm/s) of persistent prediction above which a trace counts
/// as difficult to predict.
pub const DIFFICULTY_THRESHOLD_MM_S: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub delta_s: f64,
    pub horizon: usize,
    pub warmup: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            delta_s: 0.1,
            horizon: 2,
            warmup: 300,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TraceSource {
    GridFile(PathBuf),
    Synthetic(SynthConfig),
    Loaded(Trace),
}

#[derive(Debug, Clone, Copy)]
pub struct ExsmiSpec {
    pub cfg: ExsmiConfig,
    pub main: PredictorKind,
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub traces: Vec<TraceSource>,
    pub models: Vec<PredictorKind>,
    /// ExSmi variants to run; each contributes one row per trace.
    pub exsmi: Vec<ExsmiSpec>,
    pub protocol: Protocol,
    pub output_dir: Option<PathBuf>,
    /// Added to the seed of every synthetic trace source.
    pub seed: u64,
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        if self.traces.is_empty() {
            return Err(Error::Config("run needs at least one trace".into()));
        }
        if self.models.is_empty() && self.exsmi.is_empty() {
            return Err(Error::Config("run needs at least one model".into()));
        }
        let p = &self.protocol;
        if !(p.delta_s > 0.0) || p.horizon == 0 || p.warmup == 0 {
            return Err(Error::Config(format!(
                "protocol values must be positive: {p:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Difficulty {
    Difficult,
    Easy,
}

impl Difficulty {
    pub fn classify(reference_error_mm_s: f64, threshold_mm_s: f64) -> Difficulty {
        if reference_error_mm_s > threshold_mm_s {
            Difficulty::Difficult
        } else {
            Difficulty::Easy
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub trace: String,
    pub model: String,
    pub mean_error_mm_s: f64,
    pub mean_jitter_mm_s: f64,
    pub combined: f64,
    /// PP session error on the same trace; the difficulty key.
    pub reference_error_mm_s: f64,
    pub group_difficulty: Difficulty,
    pub group_activity: Activity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFailure {
    pub trace: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAggregate {
    pub group: String,
    pub model: String,
    pub count: usize,
    pub mean_error_mm_s: f64,
    pub std_error_mm_s: f64,
    pub mean_jitter_mm_s: f64,
    pub std_jitter_mm_s: f64,
    pub mean_combined: f64,
    pub std_combined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeRow {
    pub model: String,
    pub relative_error: f64,
    pub relative_jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub rows: Vec<ReportRow>,
    pub failures: Vec<TraceFailure>,
}

/// Per-trace prediction streams kept for plot data.
#[derive(Debug, Clone)]
pub struct TraceRuns {
    pub trace: String,
    pub series: Vec<(String, PairedSeries)>,
    pub exsmi_logs: Vec<(String, Vec<StepOutput>)>,
}

/// `ExSmi(<main>/<baseline>)`, e.g. `ExSmi(ES2/PP)`.
pub fn exsmi_label(main: PredictorKind, baseline: PredictorKind) -> String {
    format!("ExSmi({}/{})", main.label(), baseline.label())
}

fn model_labels(models: &[PredictorKind]) -> Vec<String> {
    models
        .iter()
        .map(|m| {
            let ambiguous = models.iter().filter(|o| o.label() == m.label()).count() > 1;
            if ambiguous {
                m.to_string()
            } else {
                m.label().to_string()
            }
        })
        .collect()
}

fn load(source: &TraceSource, seed: u64) -> Result<Trace> {
    match source {
        TraceSource::GridFile(path) => load_grid_trace(path),
        TraceSource::Synthetic(cfg) => generate_synthetic(&SynthConfig {
            seed: cfg.seed.wrapping_add(seed),
            ..cfg.clone()
        }),
        TraceSource::Loaded(trace) => Ok(trace.clone()),
    }
}

fn source_name(source: &TraceSource) -> String {
    match source {
        TraceSource::GridFile(p) => p.display().to_string(),
        TraceSource::Synthetic(cfg) => format!("synthetic(seed={})", cfg.seed),
        TraceSource::Loaded(t) => t.meta.name.clone(),
    }
}

fn evaluate_trace(
    trace: &Trace,
    spec: &RunSpec,
    labels: &[String],
) -> Result<(Vec<ReportRow>, TraceRuns)> {
    trace.validate()?;
    let p = spec.protocol;
    if (trace.delta_s - p.delta_s).abs() > 1e-9 * p.delta_s {
        return Err(Error::Config(format!(
            "trace `{}` has spacing {} s, protocol expects {} s",
            trace.meta.name, trace.delta_s, p.delta_s
        )));
    }
    let reference = session_score(&run_predictor(
        trace,
        PredictorKind::Pp,
        p.horizon,
        p.warmup,
    )?)?;
    let difficulty = Difficulty::classify(reference.mean_error_mm_s, DIFFICULTY_THRESHOLD_MM_S);

    let row = |model: &str, s: SessionScore| ReportRow {
        trace: trace.meta.name.clone(),
        model: model.to_string(),
        mean_error_mm_s: s.mean_error_mm_s,
        mean_jitter_mm_s: s.mean_jitter_mm_s,
        combined: s.combined,
        reference_error_mm_s: reference.mean_error_mm_s,
        group_difficulty: difficulty,
        group_activity: trace.meta.activity,
    };

    let mut rows = Vec::new();
    let mut runs = TraceRuns {
        trace: trace.meta.name.clone(),
        series: Vec::new(),
        exsmi_logs: Vec::new(),
    };
    for (kind, label) in spec.models.iter().zip(labels) {
        let series = run_predictor(trace, *kind, p.horizon, p.warmup)?;
        rows.push(row(label, session_score(&series)?));
        runs.series.push((label.clone(), series));
    }
    for ex in &spec.exsmi {
        let cfg = ExsmiConfig {
            horizon: p.horizon,
            warmup_samples: p.warmup,
            ..ex.cfg
        };
        let run = run_session(trace, &cfg, ex.main)?;
        let label = exsmi_label(ex.main, ex.cfg.baseline);
        rows.push(row(&label, session_score(&run.series)?));
        runs.series.push((label.clone(), run.series));
        runs.exsmi_logs.push((label, run.log));
    }
    Ok((rows, runs))
}

/// Evaluates every model on every trace. A trace that fails to load or
/// score is recorded in `failures` and the run continues.
pub fn evaluate_all(spec: &RunSpec) -> Result<EvalReport> {
    evaluate_all_detailed(spec).map(|(report, _)| report)
}

pub fn evaluate_all_detailed(spec: &RunSpec) -> Result<(EvalReport, Vec<TraceRuns>)> {
    spec.validate()?;
    let labels = model_labels(&spec.models);
    let outcomes: Vec<Result<(Vec<ReportRow>, TraceRuns)>> = spec
        .traces
        .par_iter()
        .map(|src| {
            let trace = load(src, spec.seed)?;
            evaluate_trace(&trace, spec, &labels)
        })
        .collect();

    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (src, outcome) in spec.traces.iter().zip(outcomes) {
        match outcome {
            Ok((r, tr)) => {
                rows.extend(r);
                runs.push(tr);
            }
            Err(e) => failures.push(TraceFailure {
                trace: source_name(src),
                error: e.to_string(),
            }),
        }
    }
    if rows.is_empty() {
        let detail = failures
            .iter()
            .map(|f| format!("{}: {}", f.trace, f.error))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Report(format!(
            "no trace produced results ({detail})"
        )));
    }
    Ok((
        EvalReport {
            protocol: spec.protocol,
            rows,
            failures,
        },
        runs,
    ))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl EvalReport {
    /// Model names in order of first appearance.
    pub fn models(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.model) {
                out.push(r.model.clone());
            }
        }
        out
    }

    pub fn rows_for<'a>(&'a self, model: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.model == model)
    }

    /// Unweighted mean and sample standard deviation per model over `rows`.
    pub fn aggregate(&self, group: &str, rows: &[&ReportRow]) -> Vec<GroupAggregate> {
        self.models()
            .into_iter()
            .filter_map(|model| {
                let members: Vec<&&ReportRow> = rows.iter().filter(|r| r.model == model).collect();
                if members.is_empty() {
                    return None;
                }
                let err: Vec<f64> = members.iter().map(|r| r.mean_error_mm_s).collect();
                let jit: Vec<f64> = members.iter().map(|r| r.mean_jitter_mm_s).collect();
                let comb: Vec<f64> = members.iter().map(|r| r.combined).collect();
                let (me, se) = mean_std(&err);
                let (mj, sj) = mean_std(&jit);
                let (mc, sc) = mean_std(&comb);
                Some(GroupAggregate {
                    group: group.to_string(),
                    model,
                    count: members.len(),
                    mean_error_mm_s: me,
                    std_error_mm_s: se,
                    mean_jitter_mm_s: mj,
                    std_jitter_mm_s: sj,
                    mean_combined: mc,
                    std_combined: sc,
                })
            })
            .collect()
    }

    /// Aggregates over all rows, one entry per model.
    pub fn overall(&self) -> Vec<GroupAggregate> {
        let all: Vec<&ReportRow> = self.rows.iter().collect();
        self.aggregate("All", &all)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "trace,model,mean_error_mm_s,mean_jitter_mm_s,combined,reference_error_mm_s,group_difficulty,group_activity\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:?},{}",
                r.trace,
                r.model,
                r.mean_error_mm_s,
                r.mean_jitter_mm_s,
                r.combined,
                r.reference_error_mm_s,
                r.group_difficulty,
                r.group_activity.as_str()
            );
        }
        out
    }

    /// Full report including all grouped and relative tables.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Full<'a> {
            protocol: &'a Protocol,
            rows: &'a [ReportRow],
            failures: &'a [TraceFailure],
            overall: Vec<GroupAggregate>,
            difficulty: Vec<GroupAggregate>,
            activity: Vec<GroupAggregate>,
            relative: Option<Vec<RelativeRow>>,
        }
        let full = Full {
            protocol: &self.protocol,
            rows: &self.rows,
            failures: &self.failures,
            overall: self.overall(),
            difficulty: split_difficulty(self, DIFFICULTY_THRESHOLD_MM_S),
            activity: split_activity(self),
            relative: relative_table(self).ok(),
        };
        Ok(serde_json::to_string_pretty(&full)?)
    }

    /// Writes `report.csv`, `report.json` and `aggregates.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display(), e))?;
        let write = |name: &str, body: String| {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(path.display(), e))
        };
        write("report.csv", self.to_csv())?;
        write("report.json", self.to_json()?)?;
        let mut groups = self.overall();
        groups.extend(split_difficulty(self, DIFFICULTY_THRESHOLD_MM_S));
        groups.extend(split_activity(self));
        write("aggregates.csv", aggregates_csv(&groups))?;
        if let Ok(rel) = relative_table(self) {
            write("relative.csv", relative_csv(&rel))?;
        }
        Ok(())
    }
}

pub fn aggregates_csv(groups: &[GroupAggregate]) -> String {
    let mut out = String::from(
        "group,model,count,mean_error_mm_s,std_error_mm_s,mean_jitter_mm_s,std_jitter_mm_s,mean_combined,std_combined\n",
    );
    for g in groups {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            g.group,
            g.model,
            g.count,
            g.mean_error_mm_s,
            g.std_error_mm_s,
            g.mean_jitter_mm_s,
            g.std_jitter_mm_s,
            g.mean_combined,
            g.std_combined
        );
    }
    out
}

pub fn relative_csv(rows: &[RelativeRow]) -> String {
    let mut out = String::from("model,relative_error,relative_jitter\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.4},{:.4}",
            r.model, r.relative_error, r.relative_jitter
        );
    }
    out
}

/// Splits rows by the PP session error of their trace. Empty groups are
/// omitted.
pub fn split_difficulty(report: &EvalReport, threshold_mm_s: f64) -> Vec<GroupAggregate> {
    let mut out = Vec::new();
    for group in [Difficulty::Difficult, Difficulty::Easy] {
        let members: Vec<&ReportRow> = report
            .rows
            .iter()
            .filter(|r| Difficulty::classify(r.reference_error_mm_s, threshold_mm_s) == group)
            .collect();
        out.extend(report.aggregate(&format!("{group:?}"), &members));
    }
    out
}

pub fn split_activity(report: &EvalReport) -> Vec<GroupAggregate> {
    let mut by_activity: BTreeMap<Activity, Vec<&ReportRow>> = BTreeMap::new();
    for r in &report.rows {
        by_activity.entry(r.group_activity).or_default().push(r);
    }
    by_activity
        .into_iter()
        .flat_map(|(a, rows)| report.aggregate(a.as_str(), &rows))
        .collect()
}

/// Mean error and jitter of each model divided by those of PP.
pub fn relative_table(report: &EvalReport) -> Result<Vec<RelativeRow>> {
    let overall = report.overall();
    let pp = overall
        .iter()
        .find(|g| g.model == "PP")
        .ok_or_else(|| Error::Report("relative table needs PP rows".into()))?;
    let pp_traces: Vec<&str> = report.rows_for("PP").map(|r| r.trace.as_str()).collect();
    if let Some(missing) = report
        .rows
        .iter()
        .find(|r| !pp_traces.contains(&r.trace.as_str()))
    {
        return Err(Error::Report(format!(
            "trace `{}` has no PP row",
            missing.trace
        )));
    }
    Ok(overall
        .iter()
        .map(|g| RelativeRow {
            model: g.model.clone(),
            relative_error: g.mean_error_mm_s / pp.mean_error_mm_s,
            relative_jitter: g.mean_jitter_mm_s / pp.mean_jitter_mm_s,
        })
        .collect())
}
