//! Marker traces: raw camera logs, the uniform prediction grid, on-disk
//! formats and a synthetic breathing generator.
//!
//! Two text formats are supported:
//!
//! * **RawLog**: `frame,time_ms,x_mm,y_mm,z_mm`, one marker per file with
//!   camera timestamps that are not exactly equally spaced. A multi-marker
//!   variant with a `marker` column after `time_ms` can be split into
//!   per-marker logs with [`split_multi_marker`].
//! * **GridCsv**: `index,x_mm,y_mm,z_mm` on a uniform grid, accompanied by a
//!   `<base>.meta.json` sidecar holding name, activity, placement, `delta_s`
//!   and `duration_s`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Camera frames are resampled in units of six 60 Hz frames.
pub const GRID_UNIT_S: f64 = 0.1;
pub const DEFAULT_DELTA_S: f64 = 0.1;

pub const RAW_HEADER: &str = "frame,time_ms,x_mm,y_mm,z_mm";
pub const MULTI_RAW_HEADER: &str = "frame,time_ms,marker,x_mm,y_mm,z_mm";
pub const GRID_HEADER: &str = "index,x_mm,y_mm,z_mm";

/// One camera reading before resampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSample {
    pub frame: u64,
    pub time_ms: f64,
    pub pos: Vec3,
}

/// One position on the uniform grid, indexed by arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub index: u64,
    pub pos: Vec3,
}

impl Sample {
    pub fn new(index: u64, pos: Vec3) -> Self {
        Sample { index, pos }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Activity {
    Normal,
    NormalOther,
    Talking,
    LaughingTalking,
    Other,
    Unknown,
}

impl Activity {
    pub const ALL: [Activity; 6] = [
        Activity::Normal,
        Activity::NormalOther,
        Activity::Talking,
        Activity::LaughingTalking,
        Activity::Other,
        Activity::Unknown,
    ];

    /// Extracts the activity code from a trace name such as
    /// `201205101519-LACUACUCC-3-T-222`. The first dash-separated token that
    /// is a known code wins.
    pub fn from_name(name: &str) -> Activity {
        name.split(['-', '_', '.'])
            .find_map(Activity::from_code)
            .unwrap_or(Activity::Unknown)
    }

    pub fn from_code(code: &str) -> Option<Activity> {
        match code {
            "N" => Some(Activity::Normal),
            "NO" => Some(Activity::NormalOther),
            "T" => Some(Activity::Talking),
            "LT" | "TL" => Some(Activity::LaughingTalking),
            "O" => Some(Activity::Other),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Activity::Normal => "Normal",
            Activity::NormalOther => "NormalOther",
            Activity::Talking => "Talking",
            Activity::LaughingTalking => "LaughingTalking",
            Activity::Other => "Other",
            Activity::Unknown => "Unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub name: String,
    pub activity: Activity,
    pub placement: String,
    pub duration_s: f64,
}

impl TraceMeta {
    pub fn named(name: &str) -> Self {
        TraceMeta {
            name: name.to_string(),
            activity: Activity::from_name(name),
            placement: String::new(),
            duration_s: 0.0,
        }
    }
}

/// A uniformly sampled marker trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub samples: Vec<Sample>,
    pub delta_s: f64,
    pub meta: TraceMeta,
}

impl Trace {
    /// Builds a trace from grid positions, indexing them from zero.
    pub fn from_positions(positions: Vec<Vec3>, delta_s: f64, mut meta: TraceMeta) -> Trace {
        meta.duration_s = positions.len().saturating_sub(1) as f64 * delta_s;
        let samples = positions
            .into_iter()
            .enumerate()
            .map(|(i, pos)| Sample::new(i as u64, pos))
            .collect();
        Trace {
            samples,
            delta_s,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.samples.iter().map(|s| s.pos).collect()
    }

    /// Checks the grid invariants: positive spacing, contiguous indices from
    /// zero and finite positions.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_s > 0.0 && self.delta_s.is_finite()) {
            return Err(Error::Config(format!(
                "grid spacing {} must be positive",
                self.delta_s
            )));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if s.index != i as u64 {
                return Err(Error::Ordering {
                    line: i + 2,
                    msg: format!("expected index {i}, found {}", s.index),
                });
            }
            if !vec3::is_finite(s.pos) {
                return Err(Error::Value {
                    line: i + 2,
                    msg: format!("sample {i} has a non-finite coordinate"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    RawLog,
    GridCsv,
}

/// Result of parsing a trace file. Raw logs still need [`resample_to_grid`].
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Raw(Vec<RawSample>),
    Grid(Trace),
}

/// Parses a trace in the declared format. Grid traces get the default
/// 100 ms spacing and name-less metadata; use [`load_grid_trace`] to pick up
/// the sidecar.
pub fn parse_trace(bytes: &[u8], format: TraceFormat) -> Result<Parsed> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("input is not UTF-8: {e}"),
    })?;
    match format {
        TraceFormat::RawLog => parse_raw_log(text).map(Parsed::Raw),
        TraceFormat::GridCsv => {
            parse_grid_csv(text, DEFAULT_DELTA_S, TraceMeta::named("")).map(Parsed::Grid)
        }
    }
}

fn header_matches(line: &str, expected: &str) -> bool {
    let got: Vec<&str> = line.split(',').map(str::trim).collect();
    let want: Vec<&str> = expected.split(',').collect();
    got == want
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn field<T: std::str::FromStr>(line: usize, name: &str, s: Option<&str>) -> Result<T> {
    let s = s.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing column `{name}`"),
    })?;
    s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse `{}` as {name}", s.trim()),
    })
}

fn coords<'a>(line: usize, cols: &mut impl Iterator<Item = &'a str>) -> Result<Vec3> {
    let x: f64 = field(line, "x_mm", cols.next())?;
    let y: f64 = field(line, "y_mm", cols.next())?;
    let z: f64 = field(line, "z_mm", cols.next())?;
    if cols.next().is_some() {
        return Err(Error::Parse {
            line,
            msg: "too many columns".into(),
        });
    }
    let pos = [x, y, z];
    if !vec3::is_finite(pos) {
        return Err(Error::Value {
            line,
            msg: format!("row {line} has a non-finite coordinate"),
        });
    }
    Ok(pos)
}

pub fn parse_raw_log(text: &str) -> Result<Vec<RawSample>> {
    let header = text.lines().next().unwrap_or("");
    if !header_matches(header, RAW_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{RAW_HEADER}`"),
        });
    }
    let mut out: Vec<RawSample> = Vec::new();
    for (line, row) in data_lines(text) {
        let mut cols = row.split(',');
        let frame: u64 = field(line, "frame", cols.next())?;
        let time_ms: f64 = field(line, "time_ms", cols.next())?;
        if !time_ms.is_finite() || time_ms < 0.0 {
            return Err(Error::Value {
                line,
                msg: format!("row {line} has invalid time {time_ms}"),
            });
        }
        let pos = coords(line, &mut cols)?;
        if let Some(prev) = out.last() {
            if time_ms <= prev.time_ms || frame <= prev.frame {
                return Err(Error::Ordering {
                    line,
                    msg: "frame and time must be strictly increasing".into(),
                });
            }
        }
        out.push(RawSample {
            frame,
            time_ms,
            pos,
        });
    }
    Ok(out)
}

/// Splits a multi-marker raw log into per-marker logs keyed by marker id.
pub fn split_multi_marker(text: &str) -> Result<BTreeMap<String, Vec<RawSample>>> {
    let header = text.lines().next().unwrap_or("");
    if !header_matches(header, MULTI_RAW_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{MULTI_RAW_HEADER}`"),
        });
    }
    let mut per_marker: BTreeMap<String, String> = BTreeMap::new();
    for (line, row) in data_lines(text) {
        let cols: Vec<&str> = row.split(',').map(str::trim).collect();
        if cols.len() != 6 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 6 columns, found {}", cols.len()),
            });
        }
        let buf = per_marker
            .entry(cols[2].to_string())
            .or_insert_with(|| format!("{RAW_HEADER}\n"));
        let _ = writeln!(
            buf,
            "{},{},{},{},{}",
            cols[0], cols[1], cols[3], cols[4], cols[5]
        );
    }
    per_marker
        .into_iter()
        .map(|(marker, body)| parse_raw_log(&body).map(|raw| (marker, raw)))
        .collect()
}

pub fn parse_grid_csv(text: &str, delta_s: f64, meta: TraceMeta) -> Result<Trace> {
    let header = text.lines().next().unwrap_or("");
    if !header_matches(header, GRID_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{GRID_HEADER}`"),
        });
    }
    let mut positions = Vec::new();
    for (line, row) in data_lines(text) {
        let mut cols = row.split(',');
        let index: u64 = field(line, "index", cols.next())?;
        if index != positions.len() as u64 {
            return Err(Error::Ordering {
                line,
                msg: format!("expected index {}, found {index}", positions.len()),
            });
        }
        positions.push(coords(line, &mut cols)?);
    }
    if !(delta_s > 0.0 && delta_s.is_finite()) {
        return Err(Error::Config(format!(
            "grid spacing {delta_s} must be positive"
        )));
    }
    Ok(Trace::from_positions(positions, delta_s, meta))
}

/// Serialises the grid positions with six decimals.
pub fn write_grid_csv(trace: &Trace) -> String {
    let mut out = String::with_capacity(32 * (trace.len() + 1));
    out.push_str(GRID_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6}",
            s.index, s.pos[0], s.pos[1], s.pos[2]
        );
    }
    out
}

pub fn write_raw_log(raw: &[RawSample]) -> String {
    let mut out = String::from(RAW_HEADER);
    out.push('\n');
    for r in raw {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.frame, r.time_ms, r.pos[0], r.pos[1], r.pos[2]
        );
    }
    out
}

/// Contents of the `<base>.meta.json` sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub name: String,
    pub activity: Activity,
    #[serde(default)]
    pub placement: String,
    pub delta_s: f64,
    pub duration_s: f64,
}

impl GridMeta {
    pub fn of(trace: &Trace) -> GridMeta {
        GridMeta {
            name: trace.meta.name.clone(),
            activity: trace.meta.activity,
            placement: trace.meta.placement.clone(),
            delta_s: trace.delta_s,
            duration_s: trace.meta.duration_s,
        }
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}.meta.json"))
}

/// Loads a GridCsv file together with its sidecar. Without a sidecar the
/// trace is named after the file, its activity is read from the name and the
/// spacing defaults to 100 ms.
pub fn load_grid_trace(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    let sidecar = sidecar_path(path);
    let (delta_s, meta) = if sidecar.exists() {
        let json =
            std::fs::read_to_string(&sidecar).map_err(|e| Error::io(sidecar.display(), e))?;
        let gm: GridMeta = serde_json::from_str(&json)?;
        let meta = TraceMeta {
            name: gm.name,
            activity: gm.activity,
            placement: gm.placement,
            duration_s: gm.duration_s,
        };
        (gm.delta_s, meta)
    } else {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        (DEFAULT_DELTA_S, TraceMeta::named(&stem))
    };
    let declared = meta.duration_s;
    let trace = parse_grid_csv(&text, delta_s, meta)?;
    if declared > 0.0 && (declared - trace.meta.duration_s).abs() > delta_s + 1e-9 {
        return Err(Error::Config(format!(
            "{}: sidecar duration {declared} s disagrees with {} samples at {delta_s} s",
            path.display(),
            trace.len()
        )));
    }
    Ok(trace)
}

/// Writes `<dir>/<name>.csv` and its sidecar, returning the CSV path.
pub fn save_grid_trace(trace: &Trace, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display(), e))?;
    let name = if trace.meta.name.is_empty() {
        "trace"
    } else {
        trace.meta.name.as_str()
    };
    let csv = dir.join(format!("{name}.csv"));
    std::fs::write(&csv, write_grid_csv(trace)).map_err(|e| Error::io(csv.display(), e))?;
    let sidecar = sidecar_path(&csv);
    let json = serde_json::to_string_pretty(&GridMeta::of(trace))?;
    std::fs::write(&sidecar, json).map_err(|e| Error::io(sidecar.display(), e))?;
    Ok(csv)
}

/// Linear resampling of a raw log onto a grid anchored at the first raw
/// timestamp. Grid points past the last raw timestamp are dropped.
pub fn resample_to_grid(raw: &[RawSample], delta_s: f64) -> Result<Trace> {
    let units = delta_s / GRID_UNIT_S;
    let whole = units.round();
    if !(delta_s > 0.0) || whole < 1.0 || (units - whole).abs() > 1e-9 * units {
        return Err(Error::Config(format!(
            "grid spacing {delta_s} s is not a positive multiple of {GRID_UNIT_S} s"
        )));
    }
    if raw.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "resampling needs at least 2 raw samples, got {}",
            raw.len()
        )));
    }
    let step_ms = whole * GRID_UNIT_S * 1000.0;
    let t0 = raw[0].time_ms;
    let t_last = raw[raw.len() - 1].time_ms;
    // absorb rounding in k * step so a knot at t_last is not lost
    let slack = 1e-9 * step_ms;

    let mut positions = Vec::new();
    let mut j = 0usize;
    for k in 0u64.. {
        let t = t0 + k as f64 * step_ms;
        if t > t_last + slack {
            break;
        }
        while j + 1 < raw.len() && raw[j + 1].time_ms <= t + slack {
            j += 1;
        }
        let a = &raw[j];
        let pos = if j + 1 == raw.len() || t <= a.time_ms {
            a.pos
        } else {
            let b = &raw[j + 1];
            let frac = (t - a.time_ms) / (b.time_ms - a.time_ms);
            [
                a.pos[0] + frac * (b.pos[0] - a.pos[0]),
                a.pos[1] + frac * (b.pos[1] - a.pos[1]),
                a.pos[2] + frac * (b.pos[2] - a.pos[2]),
            ]
        };
        positions.push(pos);
    }
    Ok(Trace::from_positions(
        positions,
        whole * GRID_UNIT_S,
        TraceMeta::named(""),
    ))
}

/// Shifts each axis so its minimum is zero.
pub fn normalize(trace: &Trace) -> Result<Trace> {
    if trace.is_empty() {
        return Err(Error::InsufficientData(
            "cannot normalize an empty trace".into(),
        ));
    }
    let mut min = [f64::INFINITY; 3];
    for s in &trace.samples {
        for (m, v) in min.iter_mut().zip(s.pos) {
            *m = m.min(v);
        }
    }
    let mut out = trace.clone();
    for s in &mut out.samples {
        s.pos = vec3::sub(s.pos, min);
    }
    Ok(out)
}

/// Parameters of the synthetic breathing generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub name: String,
    pub period_s: f64,
    /// Peak-to-peak breathing amplitude per axis (SI, LR, AP).
    pub amplitude_mm: Vec3,
    pub noise_sigma_mm: f64,
    /// Slow baseline drift along the SI axis.
    pub drift_mm_per_min: f64,
    pub event_rate_per_min: f64,
    pub event_magnitude_mm: f64,
    pub duration_s: f64,
    pub delta_s: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            name: String::new(),
            period_s: 5.5,
            amplitude_mm: [10.0, 3.0, 6.0],
            noise_sigma_mm: 0.2,
            drift_mm_per_min: 0.0,
            event_rate_per_min: 0.0,
            event_magnitude_mm: 0.0,
            duration_s: 300.0,
            delta_s: DEFAULT_DELTA_S,
            seed: 0,
        }
    }
}

/// Largest per-axis range observed in the clinical recordings.
pub const MAX_AMPLITUDE_MM: f64 = 45.0;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.delta_s > 0.0 && self.delta_s.is_finite()) {
            return bad(format!("delta_s {} must be positive", self.delta_s));
        }
        if !(self.period_s > 2.0 * self.delta_s) || !self.period_s.is_finite() {
            return bad(format!(
                "period {} s must exceed two grid steps ({} s)",
                self.period_s,
                2.0 * self.delta_s
            ));
        }
        if self
            .amplitude_mm
            .iter()
            .any(|a| !(0.0..=MAX_AMPLITUDE_MM).contains(a))
        {
            return bad(format!(
                "amplitudes {:?} must lie in [0, {MAX_AMPLITUDE_MM}] mm",
                self.amplitude_mm
            ));
        }
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return bad(format!("duration {} s must be positive", self.duration_s));
        }
        for (name, v) in [
            ("noise_sigma_mm", self.noise_sigma_mm),
            ("event_rate_per_min", self.event_rate_per_min),
            ("event_magnitude_mm", self.event_magnitude_mm),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} = {v} must be non-negative"));
            }
        }
        if !self.drift_mm_per_min.is_finite() {
            return bad("drift must be finite".into());
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s / self.delta_s + 1e-9).floor() as usize + 1
    }
}

/// Raised-cosine breathing with optional drift, Gaussian noise and
/// square-pulse transient events, already on the grid and normalized.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Trace> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.sample_count();

    // (start_s, end_s, displacement)
    let mut events: Vec<(f64, f64, Vec3)> = Vec::new();
    if cfg.event_rate_per_min > 0.0 && cfg.event_magnitude_mm > 0.0 {
        let gaps = Exp::new(cfg.event_rate_per_min / 60.0).expect("positive rate");
        let mut t = gaps.sample(&mut rng);
        while t < cfg.duration_s {
            let len = rng.gen_range(0.5..=2.0);
            let dir: [f64; 3] = UnitSphere.sample(&mut rng);
            let disp = dir.map(|d| d * cfg.event_magnitude_mm);
            events.push((t, t + len, disp));
            t += len + gaps.sample(&mut rng);
        }
    }

    let noise = Normal::new(0.0, cfg.noise_sigma_mm).expect("non-negative sigma");
    let omega = 2.0 * std::f64::consts::PI / cfg.period_s;
    let mut positions = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * cfg.delta_s;
        let phase = 1.0 - (omega * t).cos();
        let mut p = cfg.amplitude_mm.map(|a| 0.5 * a * phase);
        p[0] += cfg.drift_mm_per_min * t / 60.0;
        for (start, end, disp) in &events {
            if t >= *start && t < *end {
                p = vec3::add(p, *disp);
            }
        }
        if cfg.noise_sigma_mm > 0.0 {
            for v in &mut p {
                *v += noise.sample(&mut rng);
            }
        }
        positions.push(p);
    }

    let mut meta = TraceMeta::named(&cfg.name);
    if cfg.name.is_empty() {
        meta.name = format!("synthetic-{}", cfg.seed);
    }
    meta.activity = if events.is_empty() {
        Activity::Normal
    } else {
        Activity::Talking
    };
    meta.placement = "synthetic".into();
    normalize(&Trace::from_positions(positions, cfg.delta_s, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(t: &[f64], pos: &[Vec3]) -> Vec<RawSample> {
        t.iter()
            .zip(pos)
            .enumerate()
            .map(|(i, (&time_ms, &pos))| RawSample {
                frame: i as u64 * 6,
                time_ms,
                pos,
            })
            .collect()
    }

    #[test]
    fn grid_csv_two_rows() {
        let text = "index,x_mm,y_mm,z_mm\n0,0.0,0.0,0.0\n1,1.0,1.0,1.0\n";
        let Parsed::Grid(tr) = parse_trace(text.as_bytes(), TraceFormat::GridCsv).unwrap() else {
            panic!("expected grid trace")
        };
        assert_eq!(tr.len(), 2);
        assert!((tr.meta.duration_s - 0.1).abs() < 1e-12);
        assert_eq!(tr.samples[1].pos, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn raw_log_on_grid_resamples_to_three() {
        let text = "frame,time_ms,x_mm,y_mm,z_mm\n0,0,1,2,3\n6,100,4,5,6\n12,200,7,8,9\n";
        let Parsed::Raw(r) = parse_trace(text.as_bytes(), TraceFormat::RawLog).unwrap() else {
            panic!("expected raw log")
        };
        let tr = resample_to_grid(&r, 0.1).unwrap();
        assert_eq!(tr.len(), 3);
        tr.validate().unwrap();
        assert_eq!(tr.samples[2].pos, [7.0, 8.0, 9.0]);
    }

    #[test]
    fn nan_row_is_a_value_error() {
        let text = "index,x_mm,y_mm,z_mm\n0,0,0,0\n1,NaN,0,0\n";
        match parse_trace(text.as_bytes(), TraceFormat::GridCsv) {
            Err(Error::Value { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("row 3"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_unordered_rows() {
        let bad = "frame,time_ms,x_mm,y_mm,z_mm\n0,0,1,2\n";
        assert!(matches!(
            parse_raw_log(bad),
            Err(Error::Parse { line: 2, .. })
        ));
        let unordered = "frame,time_ms,x_mm,y_mm,z_mm\n0,100,1,2,3\n1,50,1,2,3\n";
        assert!(matches!(
            parse_raw_log(unordered),
            Err(Error::Ordering { line: 3, .. })
        ));
        let gap = "index,x_mm,y_mm,z_mm\n0,0,0,0\n2,0,0,0\n";
        assert!(matches!(
            parse_grid_csv(gap, 0.1, TraceMeta::named("")),
            Err(Error::Ordering { .. })
        ));
        assert!(parse_trace(&[0xff, 0xfe], TraceFormat::RawLog).is_err());
    }

    #[test]
    fn resample_midpoint() {
        let r = raw(&[0.0, 200.0], &[[0.0; 3], [2.0; 3]]);
        let tr = resample_to_grid(&r, 0.1).unwrap();
        assert_eq!(tr.positions(), vec![[0.0; 3], [1.0; 3], [2.0; 3]]);
    }

    #[test]
    fn resample_jittered_linear_ramp() {
        let t = [0.0, 96.7, 201.3];
        let pos: Vec<Vec3> = t.iter().map(|&t| [t / 100.0, 0.0, 0.0]).collect();
        let tr = resample_to_grid(&raw(&t, &pos), 0.1).unwrap();
        assert_eq!(tr.len(), 3);
        for (k, s) in tr.samples.iter().enumerate() {
            assert!((s.pos[0] - k as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn resample_rejects_bad_spacing_and_short_input() {
        let r = raw(&[0.0, 200.0], &[[0.0; 3], [2.0; 3]]);
        assert!(matches!(resample_to_grid(&r, 0.15), Err(Error::Config(_))));
        assert!(matches!(resample_to_grid(&r, 0.0), Err(Error::Config(_))));
        assert!(matches!(
            resample_to_grid(&r[..1], 0.1),
            Err(Error::InsufficientData(_))
        ));
        let tr = resample_to_grid(&r, 0.2).unwrap();
        assert_eq!(tr.len(), 2);
    }

    #[test]
    fn normalize_examples() {
        let tr = Trace::from_positions(
            vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]],
            0.1,
            TraceMeta::named(""),
        );
        let n = normalize(&tr).unwrap();
        assert_eq!(n.positions(), vec![[0.0; 3], [3.0; 3]]);
        assert_eq!(normalize(&n).unwrap(), n);
        let one = Trace::from_positions(vec![[7.0, -2.0, 0.0]], 0.1, TraceMeta::named(""));
        assert_eq!(normalize(&one).unwrap().positions(), vec![[0.0; 3]]);
        let empty = Trace::from_positions(vec![], 0.1, TraceMeta::named(""));
        assert!(matches!(normalize(&empty), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn activity_from_name() {
        assert_eq!(
            Activity::from_name("201205101519-LACUACUCC-3-T-222"),
            Activity::Talking
        );
        assert_eq!(
            Activity::from_name("201205101534-LACUACUCC-3-NO-130"),
            Activity::NormalOther
        );
        assert_eq!(
            Activity::from_name("201205101536-LACUACUCC-3-LT-142"),
            Activity::LaughingTalking
        );
        assert_eq!(
            Activity::from_name("201205181211-UAC-1-N-320-6"),
            Activity::Normal
        );
        assert_eq!(Activity::from_name("session"), Activity::Unknown);
    }

    #[test]
    fn synthetic_pure_cosine_range() {
        let cfg = SynthConfig {
            period_s: 5.0,
            amplitude_mm: [10.0, 0.0, 0.0],
            noise_sigma_mm: 0.0,
            duration_s: 20.0,
            ..SynthConfig::default()
        };
        let tr = generate_synthetic(&cfg).unwrap();
        let xs: Vec<f64> = tr.samples.iter().map(|s| s.pos[0]).collect();
        let max = xs.iter().cloned().fold(f64::MIN, f64::max);
        let min = xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - min - 10.0).abs() < 1e-12);
        assert!(tr
            .samples
            .iter()
            .all(|s| s.pos[1] == 0.0 && s.pos[2] == 0.0));
    }

    #[test]
    fn synthetic_is_deterministic_and_sized() {
        let cfg = SynthConfig {
            duration_s: 138.0,
            event_rate_per_min: 3.0,
            event_magnitude_mm: 5.0,
            seed: 42,
            ..SynthConfig::default()
        };
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a.len(), 1381);
        assert_eq!(a, b);
        assert_eq!(a.meta.activity, Activity::Talking);
        let other = generate_synthetic(&SynthConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn synthetic_rejects_bad_config() {
        let short = SynthConfig {
            period_s: 0.2,
            ..SynthConfig::default()
        };
        assert!(matches!(generate_synthetic(&short), Err(Error::Config(_))));
        let big = SynthConfig {
            amplitude_mm: [50.0, 0.0, 0.0],
            ..SynthConfig::default()
        };
        assert!(generate_synthetic(&big).is_err());
    }

    #[test]
    fn multi_marker_split() {
        let text = "frame,time_ms,marker,x_mm,y_mm,z_mm\n0,0,UAC,1,1,1\n0,0,LAC,2,2,2\n6,100,UAC,1,1,2\n6,100,LAC,2,2,3\n";
        let m = split_multi_marker(text).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m["UAC"].len(), 2);
        assert_eq!(m["LAC"][1].pos, [2.0, 2.0, 3.0]);
    }
}
