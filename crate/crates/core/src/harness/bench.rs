//! Throughput and memory of the streaming step.

use std::time::Instant;

use crate::error::Result;
use crate::exsmi::{ExsmiConfig, ExsmiState};
use crate::predictors::{recommended_params, PredictorKind, PredictorState, SmoothingModel};
use crate::trace::{generate_synthetic, Sample, SynthConfig};
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub name: String,
    pub samples: u64,
    pub seconds: f64,
    pub samples_per_s: f64,
    /// State size after the first 10⁴ samples.
    pub bytes_early: usize,
    pub bytes_final: usize,
}

const EARLY: u64 = 10_000;

/// A seamless loop of 200 breathing cycles to stream from.
fn signal() -> Result<Vec<Vec3>> {
    let cfg = SynthConfig {
        period_s: 5.5,
        duration_s: 55.0 * 20.0 - 0.1,
        noise_sigma_mm: 0.2,
        seed: 7,
        ..SynthConfig::default()
    };
    Ok(generate_synthetic(&cfg)?.positions())
}

trait Stream {
    fn push(&mut self, s: Sample) -> Result<f64>;
    fn bytes(&self) -> usize;
}

impl Stream for PredictorState {
    fn push(&mut self, s: Sample) -> Result<f64> {
        Ok(self.update_and_predict(s)?.pos[0])
    }

    fn bytes(&self) -> usize {
        self.state_bytes()
    }
}

impl Stream for ExsmiState {
    fn push(&mut self, s: Sample) -> Result<f64> {
        Ok(self.step(s)?.prediction.pos[0])
    }

    fn bytes(&self) -> usize {
        self.state_bytes()
    }
}

fn timed(
    name: String,
    samples: u64,
    signal: &[Vec3],
    stream: &mut impl Stream,
) -> Result<BenchResult> {
    let mut bytes_early = None;
    let mut sink = 0.0;
    let start = Instant::now();
    for i in 0..samples {
        let pos = signal[(i as usize) % signal.len()];
        sink += stream.push(Sample::new(i, pos))?;
        if i + 1 == EARLY {
            bytes_early = Some(stream.bytes());
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    std::hint::black_box(sink);
    let bytes_final = stream.bytes();
    Ok(BenchResult {
        name,
        samples,
        seconds,
        samples_per_s: samples as f64 / seconds.max(1e-12),
        bytes_early: bytes_early.unwrap_or(bytes_final),
        bytes_final,
    })
}

/// Streams `samples` points through every base predictor and through
/// ExSmi(ES2), one result per stream.
pub fn run_bench(samples: u64, horizon: usize) -> Result<Vec<BenchResult>> {
    let signal = signal()?;
    let mut out = Vec::new();
    for kind in PredictorKind::standard_set(0.1) {
        let mut st = PredictorState::new(kind, horizon)?;
        out.push(timed(kind.label().to_string(), samples, &signal, &mut st)?);
    }
    let cfg = ExsmiConfig {
        horizon,
        ..ExsmiConfig::default()
    };
    let mut ex = ExsmiState::new(cfg, recommended_params(SmoothingModel::Es2, 0.1))?;
    out.push(timed("ExSmi(ES2)".to_string(), samples, &signal, &mut ex)?);
    Ok(out)
}

pub fn bench_csv(results: &[BenchResult]) -> String {
    let mut out = String::from("stream,samples,seconds,samples_per_s,bytes_early,bytes_final\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{:.6},{:.0},{},{}\n",
            r.name, r.samples, r.seconds, r.samples_per_s, r.bytes_early, r.bytes_final
        ));
    }
    out
}
