//! Quantum-jump unravelling of the master equation.
//!
//! Each step either emits a photon (probability `Γ|c1|²dt`, state reset to
//! the ground level) or evolves under `H_eff = (Ω/2)σx − (iΓ/2)σ+σ−` and is
//! renormalised. Trajectory `i` of an ensemble draws from stream `i` of a
//! ChaCha8 generator keyed by the master seed, so it does not depend on how
//! many other trajectories run or on thread scheduling.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BlochState, SystemParams};

/// Stationary estimates discard this much initial time, in units of `1/Γ`.
pub const BURN_IN: f64 = 20.0;
pub const MIN_TRAJECTORIES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryConfig {
    pub t_max: f64,
    pub dt: f64,
    /// Record the state every this many steps.
    pub sample_every: usize,
}

impl TrajectoryConfig {
    /// `dt = 0.01/Γ`, samples every `0.1/Γ`.
    pub fn standard(params: &SystemParams, t_max: f64) -> Self {
        TrajectoryConfig { t_max, dt: 0.01 / params.gamma(), sample_every: 10 }
    }

    fn check(&self, params: &SystemParams) -> Result<()> {
        let g = params.gamma();
        if !(self.dt > 0.0) || self.dt > 0.01 / g * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("dt must lie in (0, 0.01/Γ], got {}", self.dt)));
        }
        if !(self.t_max >= 100.0 / g * (1.0 - 1e-12)) || !self.t_max.is_finite() {
            return Err(Error::InvalidParameter(format!("t_max must be at least 100/Γ, got {}", self.t_max)));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample_every must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub time: f64,
    pub state: BlochState,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpTrajectory {
    pub seed: u64,
    pub stream: u64,
    pub jump_times: Vec<f64>,
    /// Amplitudes `(c0, c1)` at `t_max`.
    pub final_state: [C64; 2],
    pub samples: Vec<Sample>,
    pub t_max: f64,
}

/// `exp(−i H_eff dt)` for the 2×2 effective Hamiltonian.
fn no_jump_propagator(params: &SystemParams, dt: f64) -> [[C64; 2]; 2] {
    let (g, w) = (params.gamma(), params.rabi());
    // M = −i H_eff dt = a I + N with N traceless
    let m = [
        [C64::new(0.0, 0.0), C64::new(0.0, -0.5 * w * dt)],
        [C64::new(0.0, -0.5 * w * dt), C64::new(-0.5 * g * dt, 0.0)],
    ];
    let a = 0.5 * (m[0][0] + m[1][1]);
    let n = [[m[0][0] - a, m[0][1]], [m[1][0], m[1][1] - a]];
    let q = n[0][0] * n[0][0] + n[0][1] * n[1][0];
    let root = q.sqrt();
    let (ch, sh) = if root.norm() < 1e-6 {
        (1.0 + q / 2.0 + q * q / 24.0, 1.0 + q / 6.0 + q * q / 120.0)
    } else {
        (root.cosh(), root.sinh() / root)
    };
    let e = a.exp();
    let mut u = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { ch } else { C64::new(0.0, 0.0) };
            u[i][j] = e * (id + sh * n[i][j]);
        }
    }
    u
}

fn bloch(c: &[C64; 2]) -> BlochState {
    let rho01 = c[0] * c[1].conj();
    BlochState { p00: c[0].norm_sqr(), re01: rho01.re, im01: rho01.im }
}

pub fn simulate(params: &SystemParams, config: TrajectoryConfig, seed: u64) -> Result<JumpTrajectory> {
    simulate_from(params, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], config, seed, 0)
}

/// Runs one trajectory from the normalised amplitudes `initial`.
pub fn simulate_from(
    params: &SystemParams,
    initial: [C64; 2],
    config: TrajectoryConfig,
    seed: u64,
    stream: u64,
) -> Result<JumpTrajectory> {
    config.check(params)?;
    let norm = (initial[0].norm_sqr() + initial[1].norm_sqr()).sqrt();
    if !((norm - 1.0).abs() < 1e-12) {
        return Err(Error::InvalidState(format!("initial amplitudes must be normalised, norm = {norm}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let u = no_jump_propagator(params, config.dt);
    let g = params.gamma();
    let steps = (config.t_max / config.dt).round() as usize;
    let mut c = initial;
    let mut jumps = Vec::new();
    let mut samples = Vec::with_capacity(steps / config.sample_every + 1);
    samples.push(Sample { time: 0.0, state: bloch(&c) });
    let dark = params.rabi() == 0.0;
    let mut k = 0;
    while k < steps {
        // undriven ground state: nothing can happen any more
        if dark && c[1].norm_sqr() == 0.0 {
            let mut j = (k / config.sample_every + 1) * config.sample_every;
            while j <= steps {
                samples.push(Sample { time: j as f64 * config.dt, state: bloch(&c) });
                j += config.sample_every;
            }
            break;
        }
        let t = k as f64 * config.dt;
        let p_jump = g * c[1].norm_sqr() * config.dt;
        let draw: f64 = rng.random();
        if draw < p_jump {
            let within: f64 = rng.random();
            jumps.push(t + within * config.dt);
            c = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        } else {
            let next = [u[0][0] * c[0] + u[0][1] * c[1], u[1][0] * c[0] + u[1][1] * c[1]];
            let n = (next[0].norm_sqr() + next[1].norm_sqr()).sqrt();
            c = [next[0] / n, next[1] / n];
        }
        k += 1;
        if k % config.sample_every == 0 {
            samples.push(Sample { time: k as f64 * config.dt, state: bloch(&c) });
        }
    }
    Ok(JumpTrajectory { seed, stream, jump_times: jumps, final_state: c, samples, t_max: steps as f64 * config.dt })
}

/// `count` independent trajectories from the ground state, run in parallel.
pub fn ensemble(params: &SystemParams, config: TrajectoryConfig, seed: u64, count: usize) -> Result<Vec<JumpTrajectory>> {
    ensemble_from(params, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], config, seed, count)
}

pub fn ensemble_from(
    params: &SystemParams,
    initial: [C64; 2],
    config: TrajectoryConfig,
    seed: u64,
    count: usize,
) -> Result<Vec<JumpTrajectory>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| simulate_from(params, initial, config, seed, i))
        .collect()
}

/// Ensemble estimate with standard errors from the spread of per-trajectory
/// averages (each trajectory is one batch).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StationaryEstimate {
    pub state: BlochState,
    pub state_stderr: [f64; 3],
    /// Photon emission rate after burn-in, per second.
    pub jump_rate: f64,
    pub jump_rate_stderr: f64,
    pub trajectories: usize,
    pub burn_in: f64,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn estimate_stationary(params: &SystemParams, trajectories: &[JumpTrajectory]) -> Result<StationaryEstimate> {
    if trajectories.len() < MIN_TRAJECTORIES {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_TRAJECTORIES} trajectories, got {}",
            trajectories.len()
        )));
    }
    let burn = BURN_IN / params.gamma();
    let mut per = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for tr in trajectories {
        let kept: Vec<&Sample> = tr.samples.iter().filter(|s| s.time >= burn).collect();
        if kept.is_empty() || tr.t_max <= burn {
            return Err(Error::InsufficientData("trajectory shorter than the burn-in".into()));
        }
        let m = kept.len() as f64;
        per[0].push(kept.iter().map(|s| s.state.p00).sum::<f64>() / m);
        per[1].push(kept.iter().map(|s| s.state.re01).sum::<f64>() / m);
        per[2].push(kept.iter().map(|s| s.state.im01).sum::<f64>() / m);
        let emitted = tr.jump_times.iter().filter(|&&t| t >= burn).count() as f64;
        per[3].push(emitted / (tr.t_max - burn));
    }
    let [(p, sp), (re, sre), (im, sim), (rate, srate)] = [0, 1, 2, 3].map(|k| mean_and_stderr(&per[k]));
    Ok(StationaryEstimate {
        state: BlochState { p00: p, re01: re, im01: im },
        state_stderr: [sp, sre, sim],
        jump_rate: rate,
        jump_rate_stderr: srate,
        trajectories: trajectories.len(),
        burn_in: burn,
    })
}
