use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exsmi_core::harness::bench::{bench_csv, run_bench};
use exsmi_core::harness::config::FlatConfig;
use exsmi_core::harness::plots::{emit_plot_data, PlotOptions};
use exsmi_core::harness::{
    evaluate_all_detailed, EvalReport, ExsmiSpec, Protocol, RunSpec, TraceSource,
};
use exsmi_core::metrics::session_score;
use exsmi_core::trace::{
    generate_synthetic, load_grid_trace, normalize, parse_raw_log, resample_to_grid,
    save_grid_trace, split_multi_marker, Activity, SynthConfig, MULTI_RAW_HEADER,
};
use exsmi_core::{run_predictor, run_session, Error, Result};

#[derive(Parser)]
#[command(
    name = "exsmi",
    version,
    about = "Respiratory motion prediction and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic breathing traces as GridCsv + sidecar.
    Generate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        synth: SynthFlags,
        /// Number of traces; seeds run from `seed` upwards.
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Resample a RawLog onto the uniform grid and write GridCsv.
    Resample {
        #[command(flatten)]
        common: Common,
        input: PathBuf,
        #[arg(long)]
        delta_s: Option<f64>,
        /// Trace name; defaults to the input file stem.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        placement: Option<String>,
        /// Keep raw coordinates instead of shifting each axis minimum to 0.
        #[arg(long)]
        no_normalize: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run one predictor over one trace and write the paired series.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelFlags,
        trace: PathBuf,
        #[arg(long)]
        warmup: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an ExSmi session over one trace and write its step log.
    Exsmi {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        exsmi: ExsmiFlags,
        trace: PathBuf,
        #[arg(long)]
        out_series: Option<PathBuf>,
        #[arg(long)]
        out_log: Option<PathBuf>,
    },
    /// Evaluate models over a trace set and write the report.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunFlags,
        /// Also write plot data next to the report.
        #[arg(long)]
        plots: bool,
    },
    /// Evaluate and write plot-ready CSV files only.
    Plots {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunFlags,
        /// Residual scatter axes, e.g. `0,2`.
        #[arg(long, default_value = "0,2")]
        axes: String,
    },
    /// Measure streaming throughput and state size.
    Bench {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 2)]
        horizon: usize,
        /// Exit with an error if any stream is slower than this.
        #[arg(long)]
        min_rate: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` assignments, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<FlatConfig> {
        let mut cfg = match &self.config {
            Some(p) => FlatConfig::load(p)?,
            None => FlatConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim());
        }
        Ok(cfg)
    }
}

fn put<T: ToString>(cfg: &mut FlatConfig, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        cfg.set(key, v.to_string());
    }
}

#[derive(Args)]
struct ModelFlags {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    period_s: Option<f64>,
    #[arg(long)]
    mulin_alpha: Option<f64>,
    #[arg(long)]
    mulin_k: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
}

impl ModelFlags {
    fn apply(&self, cfg: &mut FlatConfig) {
        put(cfg, "model", &self.model);
        put(cfg, "alpha", &self.alpha);
        put(cfg, "beta", &self.beta);
        put(cfg, "gamma", &self.gamma);
        put(cfg, "period_s", &self.period_s);
        put(cfg, "mulin_alpha", &self.mulin_alpha);
        put(cfg, "mulin_k", &self.mulin_k);
        put(cfg, "horizon", &self.horizon);
    }
}

#[derive(Args)]
struct ExsmiFlags {
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    gate_mm: Option<f64>,
    #[arg(long)]
    max_rejects: Option<usize>,
    /// `consistent` or `lagged_baseline`.
    #[arg(long)]
    scoring_mode: Option<String>,
    /// Baseline model, `LE` or `PP`.
    #[arg(long)]
    baseline: Option<String>,
    /// `adaptive`, `main` or `baseline`.
    #[arg(long)]
    selection: Option<String>,
}

impl ExsmiFlags {
    fn apply(&self, cfg: &mut FlatConfig) {
        put(cfg, "warmup", &self.warmup);
        put(cfg, "decay", &self.decay);
        put(cfg, "gate_mm", &self.gate_mm);
        put(cfg, "max_rejects", &self.max_rejects);
        put(cfg, "scoring_mode", &self.scoring_mode);
        put(cfg, "baseline", &self.baseline);
        put(cfg, "selection", &self.selection);
    }
}

#[derive(Args)]
struct SynthFlags {
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    period_s: Option<f64>,
    /// Three comma-separated values (SI, LR, AP).
    #[arg(long)]
    amplitude_mm: Option<String>,
    #[arg(long)]
    noise_sigma_mm: Option<f64>,
    #[arg(long)]
    drift_mm_per_min: Option<f64>,
    #[arg(long)]
    event_rate_per_min: Option<f64>,
    #[arg(long)]
    event_magnitude_mm: Option<f64>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    delta_s: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl SynthFlags {
    fn apply(&self, cfg: &mut FlatConfig) {
        put(cfg, "name", &self.name);
        put(cfg, "period_s", &self.period_s);
        put(cfg, "amplitude_mm", &self.amplitude_mm);
        put(cfg, "noise_sigma_mm", &self.noise_sigma_mm);
        put(cfg, "drift_mm_per_min", &self.drift_mm_per_min);
        put(cfg, "event_rate_per_min", &self.event_rate_per_min);
        put(cfg, "event_magnitude_mm", &self.event_magnitude_mm);
        put(cfg, "duration_s", &self.duration_s);
        put(cfg, "delta_s", &self.delta_s);
        put(cfg, "seed", &self.seed);
    }
}

#[derive(Args)]
struct RunFlags {
    /// Comma-separated GridCsv files or directories.
    #[arg(long)]
    traces: Option<String>,
    /// Number of synthetic traces to add (synthetic generator keys apply).
    #[arg(long)]
    synthetic: Option<usize>,
    /// Comma-separated models, e.g. `PP,LE,MULIN,ES1,ES2,ES3`.
    #[arg(long)]
    models: Option<String>,
    /// Main model of ExSmi, or `none`.
    #[arg(long)]
    exsmi_main: Option<String>,
    /// Comma-separated ExSmi baselines.
    #[arg(long)]
    exsmi_baselines: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
}

impl RunFlags {
    fn apply(&self, cfg: &mut FlatConfig) {
        put(cfg, "traces", &self.traces);
        put(cfg, "synthetic", &self.synthetic);
        put(cfg, "models", &self.models);
        put(cfg, "exsmi_main", &self.exsmi_main);
        put(cfg, "exsmi_baselines", &self.exsmi_baselines);
        put(
            cfg,
            "output_dir",
            &self.output_dir.as_ref().map(|p| p.display()),
        );
        put(cfg, "seed", &self.seed);
        put(cfg, "warmup", &self.warmup);
        put(cfg, "horizon", &self.horizon);
    }
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

fn grid_files(entry: &Path) -> Result<Vec<PathBuf>> {
    if !entry.is_dir() {
        return Ok(vec![entry.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(entry)
        .map_err(|e| Error::Io {
            path: entry.display().to_string(),
            source: e,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn run_spec(cfg: &FlatConfig) -> Result<RunSpec> {
    let protocol = Protocol {
        delta_s: cfg.delta_s()?,
        horizon: cfg.horizon()?,
        warmup: cfg.get_or("warmup", Protocol::default().warmup)?,
    };
    let mut traces = Vec::new();
    if let Some(t) = cfg.get_str("traces") {
        for entry in list(t) {
            traces.extend(
                grid_files(Path::new(entry))?
                    .into_iter()
                    .map(TraceSource::GridFile),
            );
        }
    }
    let synthetic: usize = cfg.get_or("synthetic", 0)?;
    if synthetic > 0 {
        let base = cfg.synth_config()?;
        for i in 0..synthetic as u64 {
            traces.push(TraceSource::Synthetic(SynthConfig {
                seed: base.seed + i,
                name: format!("{}synthetic-{}", base.name, base.seed + i),
                ..base.clone()
            }));
        }
    }
    let models = list(cfg.get_str("models").unwrap_or("PP,LE,MULIN,ES1,ES2,ES3"))
        .map(|m| cfg.predictor_named(m))
        .collect::<Result<Vec<_>>>()?;
    let mut exsmi = Vec::new();
    let main = cfg.get_str("exsmi_main").unwrap_or("ES2");
    if !main.eq_ignore_ascii_case("none") {
        let main = cfg.predictor_named(main)?;
        for b in list(cfg.get_str("exsmi_baselines").unwrap_or("LE,PP")) {
            let mut c = cfg.clone();
            c.set("baseline", b);
            exsmi.push(ExsmiSpec {
                cfg: c.exsmi_config()?,
                main,
            });
        }
    }
    Ok(RunSpec {
        traces,
        models,
        exsmi,
        protocol,
        output_dir: cfg.get_str("output_dir").map(PathBuf::from),
        seed: cfg.get_or("seed", 0)?,
    })
}

fn print_summary(report: &EvalReport) {
    println!(
        "{:<16} {:>6} {:>12} {:>12} {:>12}",
        "model", "n", "error mm/s", "jitter mm/s", "combined"
    );
    for g in report.overall() {
        println!(
            "{:<16} {:>6} {:>12.3} {:>12.3} {:>12.3}",
            g.model, g.count, g.mean_error_mm_s, g.mean_jitter_mm_s, g.mean_combined
        );
    }
    for f in &report.failures {
        eprintln!("skipped {}: {}", f.trace, f.error);
    }
}

fn write_file(path: &Path, body: String) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
    }
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            common,
            synth,
            count,
            out,
        } => {
            let mut cfg = common.load()?;
            synth.apply(&mut cfg);
            let base = cfg.synth_config()?;
            for i in 0..count {
                let mut c = base.clone();
                c.seed = base.seed + i;
                if count > 1 || c.name.is_empty() {
                    c.name = format!("{}synthetic-{}", base.name, c.seed);
                }
                let trace = generate_synthetic(&c)?;
                let path = save_grid_trace(&trace, &out)?;
                println!("{}", path.display());
            }
        }
        Command::Resample {
            common,
            input,
            delta_s,
            name,
            placement,
            no_normalize,
            out,
        } => {
            let mut cfg = common.load()?;
            put(&mut cfg, "delta_s", &delta_s);
            let delta_s = cfg.delta_s()?;
            let text = std::fs::read_to_string(&input).map_err(|e| Error::Io {
                path: input.display().to_string(),
                source: e,
            })?;
            let base = name.unwrap_or_else(|| {
                input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "trace".into())
            });
            let multi = text
                .lines()
                .next()
                .is_some_and(|h| h.replace(' ', "") == MULTI_RAW_HEADER);
            let logs = if multi {
                split_multi_marker(&text)?
                    .into_iter()
                    .map(|(marker, raw)| (format!("{base}-{marker}"), raw))
                    .collect()
            } else {
                vec![(base, parse_raw_log(&text)?)]
            };
            for (name, raw) in logs {
                let mut trace = resample_to_grid(&raw, delta_s)?;
                if !no_normalize {
                    trace = normalize(&trace)?;
                }
                trace.meta.activity = Activity::from_name(&name);
                trace.meta.name = name;
                trace.meta.placement = placement.clone().unwrap_or_default();
                println!("{}", save_grid_trace(&trace, &out)?.display());
            }
        }
        Command::Run {
            common,
            model,
            trace,
            warmup,
            out,
        } => {
            let mut cfg = common.load()?;
            model.apply(&mut cfg);
            put(&mut cfg, "warmup", &warmup);
            let kind = cfg.predictor_kind()?;
            let trace = load_grid_trace(&trace)?;
            let series = run_predictor(&trace, kind, cfg.horizon()?, cfg.get_or("warmup", 300)?)?;
            let score = session_score(&series)?;
            println!(
                "{}: error {:.3} mm/s, jitter {:.3} mm/s, combined {:.3}",
                kind, score.mean_error_mm_s, score.mean_jitter_mm_s, score.combined
            );
            if let Some(out) = out {
                write_file(&out, series.to_csv())?;
            }
        }
        Command::Exsmi {
            common,
            model,
            exsmi,
            trace,
            out_series,
            out_log,
        } => {
            let mut cfg = common.load()?;
            if cfg.get_str("model").is_none() {
                cfg.set("model", "ES2");
            }
            model.apply(&mut cfg);
            exsmi.apply(&mut cfg);
            let main = cfg.predictor_kind()?;
            let ex = cfg.exsmi_config()?;
            let trace = load_grid_trace(&trace)?;
            let run = run_session(&trace, &ex, main)?;
            let score = session_score(&run.series)?;
            let rejected = run.log.iter().filter(|s| s.rejected).count();
            println!(
                "ExSmi({main}, baseline {}): error {:.3} mm/s, jitter {:.3} mm/s, combined {:.3}, {rejected} rejected",
                ex.baseline, score.mean_error_mm_s, score.mean_jitter_mm_s, score.combined
            );
            if let Some(out) = out_series {
                write_file(&out, run.series.to_csv())?;
            }
            if let Some(out) = out_log {
                write_file(&out, run.log_csv())?;
            }
        }
        Command::Evaluate { common, run, plots } => {
            let mut cfg = common.load()?;
            run.apply(&mut cfg);
            let spec = run_spec(&cfg)?;
            let (report, runs) = evaluate_all_detailed(&spec)?;
            print_summary(&report);
            if let Some(dir) = &spec.output_dir {
                report.write_to(dir)?;
                if plots {
                    emit_plot_data(&report, &runs, dir, PlotOptions::default())?;
                }
                println!("report written to {}", dir.display());
            } else {
                print!("{}", report.to_csv());
            }
        }
        Command::Plots { common, run, axes } => {
            let mut cfg = common.load()?;
            run.apply(&mut cfg);
            let spec = run_spec(&cfg)?;
            let axes: Vec<usize> = list(&axes)
                .map(|a| {
                    a.parse()
                        .map_err(|_| Error::Config(format!("bad axis `{a}`")))
                })
                .collect::<Result<_>>()?;
            let [a, b] = axes[..] else {
                return Err(Error::Config("--axes needs two values".into()));
            };
            let dir = spec
                .output_dir
                .clone()
                .ok_or_else(|| Error::Config("plots needs output_dir".into()))?;
            let (report, runs) = evaluate_all_detailed(&spec)?;
            let opts = PlotOptions {
                scatter_axes: (a, b),
                ..PlotOptions::default()
            };
            for p in emit_plot_data(&report, &runs, &dir, opts)? {
                println!("{}", p.display());
            }
        }
        Command::Bench {
            samples,
            horizon,
            min_rate,
        } => {
            let results = run_bench(samples, horizon)?;
            print!("{}", bench_csv(&results));
            if let Some(min) = min_rate {
                if let Some(slow) = results.iter().find(|r| r.samples_per_s < min) {
                    return Err(Error::Report(format!(
                        "{} ran at {:.0} samples/s, below {min}",
                        slow.name, slow.samples_per_s
                    )));
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.category() as u8)
        }
    }
}
