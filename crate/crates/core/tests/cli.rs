use std::path::Path;
use std::process::{Command, Output};

use exsmi_core::harness::EvalReport;
use exsmi_core::trace::load_grid_trace;

fn exsmi(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exsmi"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn generate(dir: &Path, count: &str) {
    ok(&exsmi(
        &[
            "generate",
            "--count",
            count,
            "--duration-s",
            "90",
            "--event-rate-per-min",
            "4",
            "--event-magnitude-mm",
            "5",
            "--out",
            "traces",
        ],
        dir,
    ));
}

#[test]
fn generate_writes_grid_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "2");
    let t = load_grid_trace(&dir.path().join("traces/synthetic-1.csv")).unwrap();
    assert_eq!(t.len(), 901);
    assert_eq!(t.meta.name, "synthetic-1");
    assert!(dir.path().join("traces/synthetic-0.meta.json").exists());
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("synth.cfg"),
        "# quiet trace\nname = quiet\nduration_s = 40\nseed = 5\nnoise_sigma_mm = 0.0\n",
    )
    .unwrap();
    ok(&exsmi(
        &[
            "generate",
            "--config",
            "synth.cfg",
            "--duration-s",
            "50",
            "--out",
            ".",
        ],
        dir.path(),
    ));
    let t = load_grid_trace(&dir.path().join("quiet.csv")).unwrap();
    assert_eq!(t.len(), 501);
}

#[test]
fn run_and_exsmi_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "1");
    let out = ok(&exsmi(
        &[
            "run",
            "traces/synthetic-0.csv",
            "--model",
            "ES2",
            "--out",
            "es2.csv",
        ],
        dir.path(),
    ));
    assert!(out.contains("ES2"));
    let csv = std::fs::read_to_string(dir.path().join("es2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 901 - 2);

    ok(&exsmi(
        &[
            "exsmi",
            "traces/synthetic-0.csv",
            "--baseline",
            "PP",
            "--warmup",
            "100",
            "--out-log",
            "log.csv",
            "--out-series",
            "series.csv",
        ],
        dir.path(),
    ));
    let log = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    let mut lines = log.lines();
    assert_eq!(lines.next().unwrap(), exsmi_core::exsmi::STEP_LOG_HEADER);
    assert_eq!(lines.count(), 901);
}

#[test]
fn evaluate_writes_reports_for_both_baselines() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "3");
    let out = ok(&exsmi(
        &[
            "evaluate",
            "--traces",
            "traces",
            "--output-dir",
            "report",
            "--plots",
        ],
        dir.path(),
    ));
    assert!(out.contains("ExSmi(ES2/LE)") && out.contains("ExSmi(ES2/PP)"));
    let report = dir.path().join("report");
    for f in [
        "report.csv",
        "aggregates.csv",
        "relative.csv",
        "error_jitter.csv",
        "travel_ES2.csv",
        "scatter_ExSmi_ES2_PP.csv",
    ] {
        assert!(report.join(f).exists(), "{f} missing");
    }
    let json = std::fs::read_to_string(report.join("report.json")).unwrap();
    let parsed: EvalReport = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed.rows.len(), 3 * 8);
    assert!(parsed.failures.is_empty());
}

#[test]
fn evaluate_synthetic_and_plot_axes() {
    let dir = tempfile::tempdir().unwrap();
    ok(&exsmi(
        &[
            "plots",
            "--set",
            "synthetic=2",
            "--set",
            "duration_s=60",
            "--models",
            "PP,ES1",
            "--exsmi-main",
            "none",
            "--output-dir",
            "p",
            "--axes",
            "0,1",
        ],
        dir.path(),
    ));
    let scatter = std::fs::read_to_string(dir.path().join("p/scatter_ES1.csv")).unwrap();
    assert!(scatter.lines().next().unwrap().contains("axis"));
    assert!(!dir.path().join("p/scatter_ExSmi_ES2_LE.csv").exists());
}

#[test]
fn resample_splits_markers() {
    let dir = tempfile::tempdir().unwrap();
    let mut log = String::from("frame,time_ms,marker,x_mm,y_mm,z_mm\n");
    for i in 0..60 {
        let t = i as f64 * 40.0;
        log += &format!("{i},{t},chest,{},{},1.0\n", 5.0 + t / 1000.0, 2.0);
        log += &format!("{i},{t},belly,1.0,{},3.0\n", 4.0 - t / 2000.0);
    }
    std::fs::write(dir.path().join("session.csv"), log).unwrap();
    let out = ok(&exsmi(
        &["resample", "session.csv", "--out", "grid"],
        dir.path(),
    ));
    assert_eq!(out.lines().count(), 2);
    let chest = load_grid_trace(&dir.path().join("grid/session-chest.csv")).unwrap();
    assert_eq!(chest.len(), 24);
    // normalized: x starts at its minimum
    assert_eq!(chest.samples[0].pos[0], 0.0);
    assert!((chest.samples[10].pos[0] - 1.0).abs() < 1e-6);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = exsmi(&["run", "nope.csv", "--model", "PP"], dir.path());
    assert_eq!(missing.status.code(), Some(8));

    generate(dir.path(), "1");
    let bad = exsmi(
        &[
            "run",
            "traces/synthetic-0.csv",
            "--model",
            "ES1",
            "--alpha",
            "1.5",
        ],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("alpha"));

    std::fs::write(
        dir.path().join("broken.csv"),
        "index,x_mm,y_mm,z_mm\n0,1,2\n",
    )
    .unwrap();
    let parse = exsmi(&["run", "broken.csv", "--model", "PP"], dir.path());
    assert_eq!(parse.status.code(), Some(2));

    std::fs::write(
        dir.path().join("raw.csv"),
        "frame,time_ms,x_mm,y_mm,z_mm\n0,0,1,2,3\n1,33,1,2,3\n",
    )
    .unwrap();
    let grid = exsmi(&["resample", "raw.csv", "--delta-s", "0.033"], dir.path());
    assert_eq!(grid.status.code(), Some(3));

    std::fs::write(
        dir.path().join("short.csv"),
        "index,x_mm,y_mm,z_mm\n0,1,2,3\n1,1,2,3\n2,1,2,3\n",
    )
    .unwrap();
    let short = exsmi(&["run", "short.csv", "--model", "PP"], dir.path());
    assert_eq!(short.status.code(), Some(4));
}

#[test]
fn bench_reports_every_stream() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&exsmi(&["bench", "--samples", "20000"], dir.path()));
    let names: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(
        names,
        ["PP", "LE", "MULIN", "ES1", "ES2", "ES3", "ExSmi(ES2)"]
    );
}
