//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments
//! override earlier ones, and command-line flags override the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exsmi::{ExsmiConfig, ScoringMode, Selection};
use crate::predictors::{
    recommended_params, PredictorKind, SmoothingModel, DEFAULT_MULIN_ALPHA, DEFAULT_MULIN_ORDER,
};
use crate::trace::{SynthConfig, DEFAULT_DELTA_S};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlatConfig {
    entries: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "empty key".into(),
                });
            }
            entries.insert(key.to_string(), v.trim().to_string());
        }
        Ok(FlatConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("cannot parse {key} = `{v}`"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn delta_s(&self) -> Result<f64> {
        self.get_or("delta_s", DEFAULT_DELTA_S)
    }

    /// Builds the predictor named by `model`. Smoothing constants default to
    /// the recommended values and may be overridden by `alpha`, `beta`,
    /// `gamma` and `period_s`.
    pub fn predictor_kind(&self) -> Result<PredictorKind> {
        let name = self
            .get_str("model")
            .ok_or_else(|| Error::Config("missing key `model`".into()))?;
        self.predictor_named(name)
    }

    pub fn predictor_named(&self, name: &str) -> Result<PredictorKind> {
        let delta_s = self.delta_s()?;
        let kind = match name.trim().to_ascii_uppercase().as_str() {
            "PP" => PredictorKind::Pp,
            "LE" => PredictorKind::Le,
            "MULIN" => PredictorKind::Mulin {
                alpha: self.get_or("mulin_alpha", DEFAULT_MULIN_ALPHA)?,
                k: self.get_or("mulin_k", DEFAULT_MULIN_ORDER)?,
            },
            "ES1" => {
                let PredictorKind::Es1 { alpha } = recommended_params(SmoothingModel::Es1, delta_s)
                else {
                    unreachable!()
                };
                PredictorKind::Es1 {
                    alpha: self.get_or("alpha", alpha)?,
                }
            }
            "ES2" => {
                let PredictorKind::Es2 { alpha, beta } =
                    recommended_params(SmoothingModel::Es2, delta_s)
                else {
                    unreachable!()
                };
                PredictorKind::Es2 {
                    alpha: self.get_or("alpha", alpha)?,
                    beta: self.get_or("beta", beta)?,
                }
            }
            "ES3" => {
                let PredictorKind::Es3 {
                    alpha,
                    beta,
                    gamma,
                    period_samples,
                } = recommended_params(SmoothingModel::Es3, delta_s)
                else {
                    unreachable!()
                };
                let period_samples = match self.get::<f64>("period_s")? {
                    Some(p) => (p / delta_s).round() as usize,
                    None => period_samples,
                };
                PredictorKind::Es3 {
                    alpha: self.get_or("alpha", alpha)?,
                    beta: self.get_or("beta", beta)?,
                    gamma: self.get_or("gamma", gamma)?,
                    period_samples,
                }
            }
            other => return Err(Error::Config(format!("unknown model `{other}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn horizon(&self) -> Result<usize> {
        self.get_or("horizon", 2)
    }

    pub fn exsmi_config(&self) -> Result<ExsmiConfig> {
        let d = ExsmiConfig::default();
        let scoring_mode = match self.get_str("scoring_mode") {
            None => d.scoring_mode,
            Some(s) => match s.to_ascii_lowercase().as_str() {
                "consistent" => ScoringMode::Consistent,
                "laggedbaseline" | "lagged_baseline" | "lagged" => ScoringMode::LaggedBaseline,
                other => return Err(Error::Config(format!("unknown scoring_mode `{other}`"))),
            },
        };
        let selection = match self.get_str("selection") {
            None => d.selection,
            Some(s) => match s.to_ascii_lowercase().as_str() {
                "adaptive" => Selection::Adaptive,
                "main" | "force_main" => Selection::ForceMain,
                "baseline" | "force_baseline" => Selection::ForceBaseline,
                other => return Err(Error::Config(format!("unknown selection `{other}`"))),
            },
        };
        let baseline = match self.get_str("baseline") {
            None => d.baseline,
            Some(name) => self.predictor_named(name)?,
        };
        let cfg = ExsmiConfig {
            horizon: self.get_or("horizon", d.horizon)?,
            warmup_samples: self.get_or("warmup", d.warmup_samples)?,
            decay: self.get_or("decay", d.decay)?,
            gate_mm: self.get_or("gate_mm", d.gate_mm)?,
            max_consecutive_rejects: self.get_or("max_rejects", d.max_consecutive_rejects)?,
            scoring_mode,
            baseline,
            selection,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn synth_config(&self) -> Result<SynthConfig> {
        let d = SynthConfig::default();
        let amplitude_mm = match self.get_str("amplitude_mm") {
            None => d.amplitude_mm,
            Some(s) => {
                let parts: Vec<f64> = s
                    .split([',', ' '])
                    .filter(|p| !p.is_empty())
                    .map(|p| p.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Config(format!("cannot parse amplitude_mm = `{s}`")))?;
                <[f64; 3]>::try_from(parts)
                    .map_err(|_| Error::Config("amplitude_mm needs three values".into()))?
            }
        };
        let cfg = SynthConfig {
            name: self.get_str("name").unwrap_or_default().to_string(),
            period_s: self.get_or("period_s", d.period_s)?,
            amplitude_mm,
            noise_sigma_mm: self.get_or("noise_sigma_mm", d.noise_sigma_mm)?,
            drift_mm_per_min: self.get_or("drift_mm_per_min", d.drift_mm_per_min)?,
            event_rate_per_min: self.get_or("event_rate_per_min", d.event_rate_per_min)?,
            event_magnitude_mm: self.get_or("event_magnitude_mm", d.event_magnitude_mm)?,
            duration_s: self.get_or("duration_s", d.duration_s)?,
            delta_s: self.get_or("delta_s", d.delta_s)?,
            seed: self.get_or("seed", d.seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
