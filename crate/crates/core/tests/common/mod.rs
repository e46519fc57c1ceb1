#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resfluor::{BlochState, SystemParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Γ = 1 with a carrier far above the linewidth.
pub fn unit(rabi: f64) -> SystemParams {
    SystemParams::new(1.0, rabi, 1e7).unwrap()
}

/// A uniformly drawn point of the Bloch ball, in density-matrix coordinates.
pub fn random_state(rng: &mut ChaCha8Rng) -> BlochState {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return BlochState { p00: 0.5 * (1.0 + v[2]), re01: 0.5 * v[0], im01: 0.5 * v[1] };
        }
    }
}

/// Γ log-uniform in [1e6, 1e9], Ω/Γ log-uniform in [1e-3, 30].
pub fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let gamma = 10f64.powf(rng.random_range(6.0..9.0));
    let rel = 10f64.powf(rng.random_range(-3.0..1.5));
    SystemParams::from_relative(gamma, rel, 1e7 * gamma).unwrap()
}
