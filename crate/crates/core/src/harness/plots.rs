//! Plot-ready CSV files: travel distance, residual scatter and the
//! error-versus-jitter summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{EvalReport, TraceRuns};
use crate::error::{Error, Result};
use crate::metrics::{residual_scatter, travel_distance};

pub const TRAVEL_WINDOW_S: f64 = 10.0;

#[derive(Debug, Clone, Copy)]
pub struct PlotOptions {
    pub scatter_axes: (usize, usize),
    pub travel_window_s: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            scatter_axes: (0, 2),
            travel_window_s: TRAVEL_WINDOW_S,
        }
    }
}

/// File-name friendly model label: `ExSmi(ES2)` becomes `ExSmi_ES2`.
pub fn file_stem(model: &str) -> String {
    let mut s: String = model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    while s.ends_with('_') {
        s.pop();
    }
    s
}

/// Writes per-model `travel_<model>.csv` and `scatter_<model>.csv` plus
/// `error_jitter.csv`, returning the paths written.
pub fn emit_plot_data(
    report: &EvalReport,
    runs: &[TraceRuns],
    output_dir: &Path,
    opts: PlotOptions,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir.display(), e))?;
    let mut written = Vec::new();
    let mut write = |name: String, body: String| -> Result<()> {
        let path = output_dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(path.display(), e))?;
        written.push(path);
        Ok(())
    };
    let (ax, ay) = opts.scatter_axes;

    for model in report.models() {
        let mut travel = format!("trace,travel_mm_per_{}s\n", opts.travel_window_s);
        let mut scatter = format!("trace,residual_axis{ax},residual_axis{ay}\n");
        for run in runs {
            let Some((_, series)) = run.series.iter().find(|(m, _)| *m == model) else {
                continue;
            };
            // traces shorter than the window have no travel row
            if let Ok(d) = travel_distance(
                series.evaluated_predictions(),
                series.delta_s,
                opts.travel_window_s,
            ) {
                let _ = writeln!(travel, "{},{:.6}", run.trace, d);
            }
            for r in residual_scatter(series, opts.scatter_axes)? {
                let _ = writeln!(scatter, "{},{:.6},{:.6}", run.trace, r[0], r[1]);
            }
        }
        let stem = file_stem(&model);
        write(format!("travel_{stem}.csv"), travel)?;
        write(format!("scatter_{stem}.csv"), scatter)?;
    }

    let mut summary = String::from("kind,trace,model,mean_error_mm_s,mean_jitter_mm_s\n");
    for r in &report.rows {
        let _ = writeln!(
            summary,
            "trace,{},{},{:.6},{:.6}",
            r.trace, r.model, r.mean_error_mm_s, r.mean_jitter_mm_s
        );
    }
    for g in report.overall() {
        let _ = writeln!(
            summary,
            "average,,{},{:.6},{:.6}",
            g.model, g.mean_error_mm_s, g.mean_jitter_mm_s
        );
    }
    write("error_jitter.csv".into(), summary)?;

    for run in runs {
        for (label, log) in &run.exsmi_logs {
            write(
                format!("steplog_{}_{}.csv", file_stem(&run.trace), file_stem(label)),
                crate::exsmi::step_log_csv(log),
            )?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems() {
        assert_eq!(file_stem("ExSmi(ES2/PP)"), "ExSmi_ES2_PP");
        assert_eq!(file_stem("PP"), "PP");
    }
}
