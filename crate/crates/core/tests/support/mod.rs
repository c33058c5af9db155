#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use exsmi_core::{Trace, TraceMeta, Vec3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform positions in [0, 45) mm on every axis.
pub fn random_positions(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            [
                rng.gen_range(0.0..45.0),
                rng.gen_range(0.0..45.0),
                rng.gen_range(0.0..45.0),
            ]
        })
        .collect()
}

/// Bounded random walk, closer to a marker signal than white noise.
pub fn random_walk(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec3> {
    let mut p: Vec3 = [20.0, 20.0, 20.0];
    (0..n)
        .map(|_| {
            for v in &mut p {
                *v = (*v + rng.gen_range(-1.0..1.0)).clamp(0.0, 45.0);
            }
            p
        })
        .collect()
}

pub fn trace_of(positions: Vec<Vec3>) -> Trace {
    Trace::from_positions(positions, 0.1, TraceMeta::named("test"))
}
