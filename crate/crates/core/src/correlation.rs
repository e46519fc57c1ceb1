//! Correlation functions of the scattered light, stored as slowly varying
//! envelopes with the optical carrier factored out.
//!
//! The conditional correlation follows the measurement protocol literally:
//! project onto a `σx(t)` eigenstate, propagate the unnormalised
//! subensemble, measure `σx(t + τ)`, and average over the carrier phase
//! `θ = ω0 t`. The integrand is a trigonometric polynomial of degree at most
//! three in `θ`, so an eight-point uniform rule gives the exact average.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dynamics::{evolve_operator_numeric, propagator};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::{beta_field, stationary_state, BlochState, SystemParams};

const I: C64 = C64::new(0.0, 1.0);

/// The two eigenprojectors of `σx(θ) = e^{iθ}σ+ + e^{−iθ}σ−`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementBasis {
    pub phase: f64,
    pub eigenvalues: [f64; 2],
    pub projectors: [BlochState; 2],
}

/// `|λ±⟩ = (|0⟩ ± e^{iθ}|1⟩)/√2`, so that `⟨λ+|ρ|λ+⟩ = 1/2 + Re(e^{iθ}ρ01)`.
pub fn projectors(phase: f64) -> MeasurementBasis {
    let (s, c) = phase.sin_cos();
    MeasurementBasis {
        phase,
        eigenvalues: [1.0, -1.0],
        projectors: [
            BlochState { p00: 0.5, re01: 0.5 * c, im01: -0.5 * s },
            BlochState { p00: 0.5, re01: -0.5 * c, im01: 0.5 * s },
        ],
    }
}

impl MeasurementBasis {
    pub fn observable(&self) -> Mat2 {
        sigma_x(self.phase)
    }

    pub fn projector_matrix(&self, i: usize) -> Mat2 {
        self.projectors[i].to_matrix()
    }
}

/// `σx(θ) = e^{iθ}σ+ + e^{−iθ}σ−`.
pub fn sigma_x(phase: f64) -> Mat2 {
    let e = C64::from_polar(1.0, phase);
    Mat2::sigma_plus().scale(e) + Mat2::sigma_minus().scale(e.conj())
}

/// Carrier factored out of an envelope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Carrier {
    /// Full signal is `g(τ) cos ω0τ`.
    Cosine,
    /// Full signal is `C(τ) e^{iω0τ}`.
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeSeries {
    pub tau: Vec<f64>,
    pub values: Vec<C64>,
    pub carrier: Carrier,
    /// The `τ → ∞` constant of the envelope.
    pub persistent_offset: C64,
    /// Whether `persistent_offset` has already been removed from `values`.
    pub offset_subtracted: bool,
    pub gamma: f64,
}

impl EnvelopeSeries {
    pub fn new(tau: Vec<f64>, values: Vec<C64>, carrier: Carrier, persistent_offset: C64, gamma: f64) -> Result<Self> {
        check_tau_grid(&tau)?;
        if values.len() != tau.len() {
            return Err(Error::InvalidGrid(format!("{} values for {} grid points", values.len(), tau.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NumericalFailure("non-finite envelope value".into()));
        }
        Ok(EnvelopeSeries { tau, values, carrier, persistent_offset, offset_subtracted: false, gamma })
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Copy with the persistent offset removed (no-op if already removed).
    pub fn without_offset(&self) -> EnvelopeSeries {
        let mut out = self.clone();
        if !self.offset_subtracted {
            for v in &mut out.values {
                *v -= self.persistent_offset;
            }
            out.offset_subtracted = true;
        }
        out
    }

    /// `a·self + b·other` on a shared grid and carrier.
    pub fn combine(&self, a: f64, other: &EnvelopeSeries, b: f64) -> Result<EnvelopeSeries> {
        if self.tau != other.tau || self.carrier != other.carrier || self.offset_subtracted != other.offset_subtracted {
            return Err(Error::InvalidGrid("envelopes must share grid, carrier and offset state".into()));
        }
        Ok(EnvelopeSeries {
            tau: self.tau.clone(),
            values: self.values.iter().zip(&other.values).map(|(x, y)| x * a + y * b).collect(),
            carrier: self.carrier,
            persistent_offset: self.persistent_offset * a + other.persistent_offset * b,
            offset_subtracted: self.offset_subtracted,
            gamma: self.gamma,
        })
    }
}

pub fn check_tau_grid(tau: &[f64]) -> Result<()> {
    if tau.len() < 2 {
        return Err(Error::InvalidGrid("need at least two τ points".into()));
    }
    if tau[0] != 0.0 {
        return Err(Error::InvalidGrid(format!("τ grid must start at 0, starts at {}", tau[0])));
    }
    if tau.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidGrid("τ grid must be finite and strictly ascending".into()));
    }
    Ok(())
}

/// `steps` uniform points on `[0, tau_max]`.
pub fn tau_grid(tau_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(tau_max > 0.0) || !tau_max.is_finite() || steps < 2 {
        return Err(Error::InvalidGrid(format!("bad τ grid: tau_max={tau_max}, steps={steps}")));
    }
    let h = tau_max / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i == steps - 1 { tau_max } else { i as f64 * h }).collect())
}

/// `steps` uniform points on `[−span, span]`, exactly symmetric about 0.
pub fn delta_grid(span: f64, steps: usize) -> Result<Vec<f64>> {
    if !(span > 0.0) || !span.is_finite() || steps < 3 {
        return Err(Error::InvalidGrid(format!("bad δ grid: span={span}, steps={steps}")));
    }
    let h = 2.0 * span / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            // mirror so that grid[i] == -grid[n-1-i] bit for bit
            let k = i as f64 - 0.5 * (steps - 1) as f64;
            k * h
        })
        .collect())
}

/// How the carrier-phase average is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaAverage {
    /// Eight-point rule, exact for the degree-3 integrand.
    Exact,
    /// `n`-point uniform rule, for cross-checking.
    Uniform(usize),
}

impl ThetaAverage {
    fn points(self) -> usize {
        match self {
            ThetaAverage::Exact => 8,
            ThetaAverage::Uniform(n) => n.max(1),
        }
    }

    fn mean<F: FnMut(f64) -> C64>(self, mut f: F) -> C64 {
        let n = self.points();
        (0..n).map(|k| f(TAU * k as f64 / n as f64)).sum::<C64>() / n as f64
    }
}

/// Phase-averaged conditional correlation at carrier phase `φ = ω0τ`:
/// `avg_θ Σ_ij λi λj Tr[Pj(θ+φ) T_τ(Pi(θ) ρss Pi(θ))]`. As a function of `φ`
/// this is `g(τ) cos φ + q(τ) sin φ`; returns `(g, q)`.
pub fn conditional_quadratures(params: &SystemParams, tau: f64, avg: ThetaAverage) -> Result<(f64, f64)> {
    let prop = propagator(params, tau)?;
    let rho = stationary_state(params).to_matrix();
    let at_phase = |phi: f64| -> f64 {
        avg.mean(|theta| {
            let before = projectors(theta);
            let after = projectors(theta + phi);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..2 {
                let p = before.projector_matrix(i);
                let evolved = prop.apply_operator(&(p * rho * p));
                for j in 0..2 {
                    let weight = before.eigenvalues[i] * after.eigenvalues[j];
                    acc += (after.projector_matrix(j) * evolved).trace() * weight;
                }
            }
            acc
        })
        .re
    };
    Ok((at_phase(0.0), at_phase(0.5 * std::f64::consts::PI)))
}

pub fn conditional_correlation_with(params: &SystemParams, tau: &[f64], avg: ThetaAverage) -> Result<EnvelopeSeries> {
    check_tau_grid(tau)?;
    let values = tau
        .iter()
        .map(|&t| conditional_quadratures(params, t, avg).map(|(g, _)| C64::new(g, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    EnvelopeSeries::new(tau.to_vec(), values, Carrier::Cosine, C64::new(field_offset(params), 0.0), params.gamma())
}

/// Conditional-measurement envelope `g(τ)` (carrier `cos ω0τ`).
pub fn conditional_correlation(params: &SystemParams, tau: &[f64]) -> Result<EnvelopeSeries> {
    conditional_correlation_with(params, tau, ThetaAverage::Exact)
}

/// `g(∞) = 2Γ²Ω²/(Γ² + 2Ω²)²`.
pub fn field_offset(params: &SystemParams) -> f64 {
    let im = stationary_state(params).im01;
    2.0 * im * im
}

/// Closed form `g(τ) = ½[e^{−Γτ/2} + (β+e^{iμτ} + β−e^{−iμτ})e^{−3Γτ/4} + 4Γ²Ω²/(Γ²+2Ω²)²]`,
/// evaluated as `β+e^{iμτ} + β−e^{−iμτ} = 2(even·cos μτ + odd·sin(μτ)/μ)`.
pub fn correlation_closed_value(params: &SystemParams, tau: f64) -> f64 {
    let g = params.gamma();
    let betas = beta_field(params);
    let (c, s) = betas.mu.damped(tau, 0.75 * g);
    let sidebands = 2.0 * (betas.terms.even * c + betas.terms.odd * s);
    0.5 * ((-0.5 * g * tau).exp() + sidebands) + field_offset(params)
}

pub fn correlation_closed(params: &SystemParams, tau: &[f64]) -> Result<EnvelopeSeries> {
    check_tau_grid(tau)?;
    let values = tau.iter().map(|&t| C64::new(correlation_closed_value(params, t), 0.0)).collect();
    EnvelopeSeries::new(tau.to_vec(), values, Carrier::Cosine, C64::new(field_offset(params), 0.0), params.gamma())
}

/// Quantum regression `Tr[a T_τ(b ρss)]` with the closed-form propagator.
pub fn regression_correlation(params: &SystemParams, a: &Mat2, b: &Mat2, tau: &[f64]) -> Result<Vec<C64>> {
    let seed = *b * stationary_state(params).to_matrix();
    tau.iter()
        .map(|&t| Ok((*a * propagator(params, t)?.apply_operator(&seed)).trace()))
        .collect()
}

/// Same as [`regression_correlation`], integrating the generator directly.
pub fn regression_correlation_numeric(params: &SystemParams, a: &Mat2, b: &Mat2, tau: &[f64]) -> Result<Vec<C64>> {
    let seed = *b * stationary_state(params).to_matrix();
    Ok(evolve_operator_numeric(params, &seed, tau)?.iter().map(|m| (*a * *m).trace()).collect())
}

/// `C∞ = |ρ01ss|²`, the coherent (elastic) part of the Mollow correlation.
pub fn mollow_offset(params: &SystemParams) -> f64 {
    stationary_state(params).rho01().norm_sqr()
}

/// Mollow correlation `C(τ) = Tr[σ+ T_τ(σ− ρss)]` (carrier `e^{iω0τ}`), with
/// the coherent offset retained and flagged.
pub fn mollow_correlation(params: &SystemParams, tau: &[f64]) -> Result<EnvelopeSeries> {
    check_tau_grid(tau)?;
    let values = regression_correlation(params, &Mat2::sigma_plus(), &Mat2::sigma_minus(), tau)?;
    EnvelopeSeries::new(tau.to_vec(), values, Carrier::Exponential, C64::new(mollow_offset(params), 0.0), params.gamma())
}

pub fn mollow_correlation_numeric(params: &SystemParams, tau: &[f64]) -> Result<EnvelopeSeries> {
    check_tau_grid(tau)?;
    let values = regression_correlation_numeric(params, &Mat2::sigma_plus(), &Mat2::sigma_minus(), tau)?;
    EnvelopeSeries::new(tau.to_vec(), values, Carrier::Exponential, C64::new(mollow_offset(params), 0.0), params.gamma())
}

/// Phase-averaged `Tr[σx(θ+φ) T_τ(σx(θ) ρss)] = e^{iφ}C + e^{−iφ}C'` with
/// `C' = Tr[σ− T_τ(σ+ ρss)]`: the cosine envelope `C + C'` and the sine
/// quadrature `i(C − C')`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnconditionalCorrelation {
    pub envelope: EnvelopeSeries,
    pub sine_quadrature: Vec<C64>,
}

pub fn unconditional_sigmax_correlation(params: &SystemParams, tau: &[f64]) -> Result<UnconditionalCorrelation> {
    check_tau_grid(tau)?;
    let rho = stationary_state(params).to_matrix();
    let mut cosine = Vec::with_capacity(tau.len());
    let mut sine = Vec::with_capacity(tau.len());
    for &t in tau {
        let prop = propagator(params, t)?;
        let at_phase = |phi: f64| {
            ThetaAverage::Exact.mean(|theta| {
                let seed = sigma_x(theta) * rho;
                (sigma_x(theta + phi) * prop.apply_operator(&seed)).trace()
            })
        };
        cosine.push(at_phase(0.0));
        sine.push(at_phase(0.5 * std::f64::consts::PI));
    }
    let offset = 2.0 * mollow_offset(params);
    Ok(UnconditionalCorrelation {
        envelope: EnvelopeSeries::new(tau.to_vec(), cosine, Carrier::Cosine, C64::new(offset, 0.0), params.gamma())?,
        sine_quadrature: sine,
    })
}

/// The same unconditional correlation assembled from the two regression
/// terms `C` and `C'` directly.
pub fn sigmax_from_regression(params: &SystemParams, tau: &[f64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let c = regression_correlation(params, &Mat2::sigma_plus(), &Mat2::sigma_minus(), tau)?;
    let cp = regression_correlation(params, &Mat2::sigma_minus(), &Mat2::sigma_plus(), tau)?;
    let cosine = c.iter().zip(&cp).map(|(a, b)| a + b).collect();
    let sine = c.iter().zip(&cp).map(|(a, b)| I * (a - b)).collect();
    Ok((cosine, sine))
}
