//! Power spectra: the two printed closed forms, the numeric transform of a
//! correlation envelope, peak analysis, drive sweeps and the audit that
//! compares printed forms with transforms of the correlation functions.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::{correlation_closed, delta_grid, mollow_correlation, tau_grid, Carrier, EnvelopeSeries};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::model::{beta_field, beta_mollow, sideband_rate, Betas, SystemParams};
use crate::quad::oscillatory_integral;

/// Largest `|h(τmax)|` accepted before the transform refuses to run.
pub const DECAY_TOLERANCE: f64 = 1e-6;
/// Finest-resolution requirement of [`find_peaks`], in units of `Γ`.
pub const MAX_PEAK_STEP: f64 = 1.0 / 50.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSeries {
    pub delta: Vec<f64>,
    pub values: Vec<f64>,
    pub normalized: bool,
    pub params: SystemParams,
}

impl SpectrumSeries {
    /// Index of the grid point closest to `δ = 0`.
    pub fn centre_index(&self) -> usize {
        self.delta
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Divides by the value at `δ = 0`.
    pub fn normalize(&self) -> Result<SpectrumSeries> {
        let centre = self.values[self.centre_index()];
        if !(centre.abs() > 0.0) {
            return Err(Error::NumericalFailure("cannot normalise: spectrum vanishes at δ = 0".into()));
        }
        Ok(SpectrumSeries {
            delta: self.delta.clone(),
            values: self.values.iter().map(|v| v / centre).collect(),
            normalized: true,
            params: self.params,
        })
    }
}

/// Default δ grid: `±max(8 Re μ, 4Γ)` with 2001 points.
pub fn default_delta_grid(params: &SystemParams) -> Vec<f64> {
    let span = (8.0 * sideband_rate(params).offset()).max(4.0 * params.gamma());
    delta_grid(span, 2001).expect("positive span")
}

/// Default τ grid: `40/Γ` with 4000 points.
pub fn default_tau_grid(params: &SystemParams) -> Vec<f64> {
    tau_grid(40.0 / params.gamma(), 4000).expect("positive horizon")
}

#[inline]
fn lorentz(gamma: f64, delta: f64) -> f64 {
    gamma / (gamma * gamma + 4.0 * delta * delta)
}

/// `1/(3Γ + 4ix) = (3Γ − 4ix)/(9Γ² + 16x²)` at complex `x`.
#[inline]
fn side(gamma: f64, x: C64) -> C64 {
    (C64::new(3.0 * gamma, 0.0) + C64::new(0.0, 4.0) * x).inv()
}

/// Sideband terms of a printed spectrum at one δ, before the `2Re`/`4Re`
/// prefactor: `[Re β+ f(δ+μ), Re β− f(δ−μ), Re even·(f₊+f₋), Re(−i odd·D)]`
/// where `D = (f₊ − f₋)/μ` is finite at `μ = 0`. The first two are `NaN` at the
/// critical drive, where `β±` do not exist individually.
fn sideband_terms(gamma: f64, betas: &Betas, delta: f64) -> [f64; 4] {
    let mu = betas.mu.mu;
    let fp = side(gamma, delta + mu);
    let fm = side(gamma, delta - mu);
    let d = C64::new(0.0, -8.0) * fp * fm;
    let even = (fp + fm).re * betas.terms.even;
    let odd = (C64::new(0.0, -betas.terms.odd) * d).re;
    match betas.pair {
        Some(pair) => [(pair.plus * fp).re, (pair.minus * fm).re, even, odd],
        None => [f64::NAN, f64::NAN, even, odd],
    }
}

/// Term columns of the printed field spectrum:
/// `2Γ/(Γ²+4δ²)`, `2Re[β+ f₊]`, `2Re[β− f₋]`, and the parity split
/// `2Re[even(f₊+f₋)]`, `2Re[−i·odd·D]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumTerms {
    pub central: f64,
    pub plus: f64,
    pub minus: f64,
    pub even: f64,
    pub odd: f64,
}

impl SpectrumTerms {
    pub fn total(&self) -> f64 {
        self.central + self.even + self.odd
    }
}

pub fn field_terms(params: &SystemParams, delta: f64) -> SpectrumTerms {
    let g = params.gamma();
    let [p, m, e, o] = sideband_terms(g, &beta_field(params), delta);
    SpectrumTerms { central: 2.0 * lorentz(g, delta), plus: 2.0 * p, minus: 2.0 * m, even: 2.0 * e, odd: 2.0 * o }
}

/// Printed Mollow terms, prefactor `2Ω²/(Γ²+2Ω²)` included.
pub fn mollow_terms(params: &SystemParams, delta: f64) -> SpectrumTerms {
    let g = params.gamma();
    let w = params.rabi();
    let pre = 2.0 * w * w / params.saturation_denominator();
    let [p, m, e, o] = sideband_terms(g, &beta_mollow(params), delta);
    SpectrumTerms {
        central: pre * 4.0 * lorentz(g, delta),
        plus: pre * 4.0 * p,
        minus: pre * 4.0 * m,
        even: pre * 4.0 * e,
        odd: pre * 4.0 * o,
    }
}

fn series<F: Fn(f64) -> f64 + Sync>(params: &SystemParams, delta: &[f64], f: F) -> Result<SpectrumSeries> {
    check_delta_grid(delta)?;
    let values: Vec<f64> = delta.iter().map(|&d| f(d)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite spectral value".into()));
    }
    Ok(SpectrumSeries { delta: delta.to_vec(), values, normalized: false, params: *params })
}

fn check_delta_grid(delta: &[f64]) -> Result<()> {
    if delta.is_empty() || delta.windows(2).any(|w| !(w[1] > w[0])) || delta.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidGrid("δ grid must be nonempty, finite and strictly ascending".into()));
    }
    Ok(())
}

/// Printed field spectrum `2Γ/(Γ²+4δ²) + 2Re[β+ f(δ+μ)] + 2Re[β− f(δ−μ)]`
/// with `f(x) = (3Γ − 4ix)/(9Γ² + 16x²)`, evaluated through the parity split so
/// that the critical drive `μ = 0` needs no special case.
pub fn spectrum_field(params: &SystemParams, delta: &[f64]) -> Result<SpectrumSeries> {
    series(params, delta, |d| field_terms(params, d).total())
}

/// Printed Mollow spectrum
/// `(2Ω²/(Γ²+2Ω²))[4Γ/(Γ²+4δ²) + 4Re[β+ f(δ+μ)] + 4Re[β− f(δ−μ)]]`.
pub fn spectrum_mollow_printed(params: &SystemParams, delta: &[f64]) -> Result<SpectrumSeries> {
    series(params, delta, |d| mollow_terms(params, d).total())
}

/// Fitted `h(τ) ≈ h(T) e^{−κ(τ−T)}` decay rate over the last 5% of the grid;
/// `None` when the data do not show a decay.
fn tail_rate(tau: &[f64], h: &[C64]) -> Option<f64> {
    let n = tau.len();
    let start = n - (n / 20).max(3).min(n);
    let pts: Vec<(f64, f64)> = (start..n)
        .filter(|&i| h[i].norm() > 0.0)
        .map(|i| (tau[i], h[i].norm().ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx)));
    let kappa = -sxy / sxx;
    (kappa.is_finite() && kappa > 0.0).then_some(kappa)
}

/// Demodulated transform of an envelope.
///
/// Cosine carrier (real signal `g(τ)cos ω0τ`, even in `τ`): the spectrum near
/// `ω0` is `Re ∫₀^∞ (g − g∞) e^{−iδτ} dτ`; the image at `−ω0` is dropped.
/// Exponential carrier (`C(τ)e^{iω0τ}` with `C(−τ) = C(τ)*`):
/// `2 Re ∫₀^∞ (C − C∞) e^{−iδτ} dτ`. The persistent offset is subtracted if it
/// is still present. Quadrature is piecewise-quadratic Filon on the τ grid
/// plus an exponential tail beyond `τmax`.
pub fn spectrum_numeric(envelope: &EnvelopeSeries, delta: &[f64], params: &SystemParams) -> Result<SpectrumSeries> {
    check_delta_grid(delta)?;
    let env = envelope.without_offset();
    let (tau, h) = (&env.tau, &env.values);
    let last = *h.last().ok_or_else(|| Error::InvalidGrid("empty envelope".into()))?;
    if last.norm() > DECAY_TOLERANCE {
        return Err(Error::NumericalFailure(format!(
            "envelope has not decayed to its persistent offset by τmax = {} (residual {:.3e})",
            tau[tau.len() - 1],
            last.norm()
        )));
    }
    let t_end = tau[tau.len() - 1];
    let kappa = tail_rate(tau, h);
    let weight = match env.carrier {
        Carrier::Cosine => 1.0,
        Carrier::Exponential => 2.0,
    };
    let values: Vec<f64> = delta
        .par_iter()
        .map(|&d| {
            let mut integral = oscillatory_integral(tau, h, d);
            if let Some(k) = kappa {
                integral += last * C64::from_polar(1.0, -d * t_end) / C64::new(k, d);
            }
            weight * integral.re
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite transform value".into()));
    }
    Ok(SpectrumSeries { delta: delta.to_vec(), values, normalized: false, params: *params })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
    /// Half width at half maximum; `None` when a half-height crossing is not
    /// reached on either side before the next local minimum.
    pub hwhm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeakReport {
    pub central: Peak,
    pub sidebands: Vec<Peak>,
    /// Sideband height over central height, in sideband order.
    pub ratios: Vec<f64>,
    pub grid_step: f64,
}

impl PeakReport {
    pub fn peak_count(&self) -> usize {
        1 + self.sidebands.len()
    }
}

fn prominence(v: &[f64], i: usize) -> f64 {
    let walk = |range: &mut dyn Iterator<Item = usize>| {
        let mut lowest = v[i];
        for j in range {
            if v[j] > v[i] {
                break;
            }
            lowest = lowest.min(v[j]);
        }
        lowest
    };
    let left = walk(&mut (0..i).rev());
    let right = walk(&mut (i + 1..v.len()));
    v[i] - left.max(right)
}

fn half_crossing(x: &[f64], v: &[f64], i: usize, half: f64, step: isize) -> Option<f64> {
    let mut j = i as isize;
    loop {
        let next = j + step;
        if next < 0 || next as usize >= v.len() {
            return None;
        }
        let (a, b) = (v[j as usize], v[next as usize]);
        if b < half {
            let (xa, xb) = (x[j as usize], x[next as usize]);
            return Some((xa + (half - a) * (xb - xa) / (b - a) - x[i]).abs());
        }
        if b > a {
            // climbing again: a local minimum above half height
            return None;
        }
        j = next;
    }
}

/// Local maxima with parabolic refinement and half-height widths. The grid
/// step must not exceed `Γ/50`.
pub fn find_peaks(spectrum: &SpectrumSeries) -> Result<PeakReport> {
    let (x, v) = (&spectrum.delta, &spectrum.values);
    if x.len() < 3 {
        return Err(Error::InvalidGrid("need at least three spectral points".into()));
    }
    let step = x.windows(2).map(|w| w[1] - w[0]).fold(0.0_f64, f64::max);
    let limit = MAX_PEAK_STEP * spectrum.params.gamma();
    if step > limit * (1.0 + 1e-12) {
        return Err(Error::InvalidGrid(format!("grid step {step:.4e} exceeds Γ/50 = {limit:.4e}")));
    }
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < v.len() {
        if v[i] > v[i - 1] {
            // extend over a flat top
            let mut k = i;
            while k + 1 < v.len() && v[k + 1] == v[i] {
                k += 1;
            }
            if k + 1 < v.len() && v[k + 1] < v[i] && v[i] > 0.0 && prominence(v, i) >= 1e-6 * top {
                let c = (i + k) / 2;
                let (y0, y1, y2) = (v[c - 1], v[c], v[c + 1]);
                let curv = y0 - 2.0 * y1 + y2;
                let h = 0.5 * (x[c + 1] - x[c - 1]);
                let (shift, height) = if curv < 0.0 && k == i {
                    let s = 0.5 * (y0 - y2) / curv;
                    (s * h, y1 - 0.25 * (y0 - y2) * s)
                } else {
                    (0.0, y1)
                };
                let half = 0.5 * height;
                let widths: Vec<f64> = [half_crossing(x, v, c, half, -1), half_crossing(x, v, c, half, 1)]
                    .into_iter()
                    .flatten()
                    .collect();
                let hwhm = (!widths.is_empty()).then(|| widths.iter().sum::<f64>() / widths.len() as f64);
                peaks.push(Peak { position: x[c] + shift, height, hwhm });
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    let centre = peaks
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.position.abs().total_cmp(&b.1.position.abs()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InsufficientData("no interior local maximum on the grid".into()))?;
    let central = peaks.remove(centre);
    let ratios = peaks.iter().map(|p| p.height / central.height).collect();
    Ok(PeakReport { central, sidebands: peaks, ratios, grid_step: step })
}

/// One row of the drive sweep: printed spectra at `δ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub rabi: f64,
    pub field_peak: f64,
    pub mollow_peak: f64,
}

pub fn sweep_peak_heights(base: &SystemParams, rabi: &[f64]) -> Result<Vec<SweepRow>> {
    if rabi.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("Rabi list must be strictly ascending".into()));
    }
    rabi.iter()
        .map(|&w| {
            let p = base.with_rabi(w)?;
            Ok(SweepRow { rabi: w, field_peak: field_terms(&p, 0.0).total(), mollow_peak: mollow_terms(&p, 0.0).total() })
        })
        .collect()
}

/// Least-squares scale factors of printed term columns against an oracle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermFit {
    pub terms: Vec<String>,
    pub scales: Vec<f64>,
    /// RMS residual divided by the oracle maximum.
    pub relative_residual: f64,
}

fn fit(names: &[&str], columns: Vec<Vec<f64>>, oracle: &[f64]) -> Option<TermFit> {
    let scales = least_squares(&columns, oracle)?;
    let n = oracle.len() as f64;
    let rss: f64 = oracle
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let model: f64 = columns.iter().zip(&scales).map(|(c, s)| c[i] * s).sum();
            (y - model).powi(2)
        })
        .sum();
    let top = oracle.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Some(TermFit {
        terms: names.iter().map(|s| s.to_string()).collect(),
        scales,
        relative_residual: (rss / n).sqrt() / top,
    })
}

/// Audit of one printed spectrum against the transform of its correlation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumAudit {
    /// `[central, β+ term, β− term]`; absent at the critical drive.
    pub beta_fit: Option<TermFit>,
    /// `[central, even part, odd part]`.
    pub parity_fit: Option<TermFit>,
    pub printed_centre: f64,
    pub oracle_centre: f64,
    /// `S(Re μ)/S(0)`.
    pub printed_ratio: f64,
    pub oracle_ratio: f64,
    pub printed_peaks: Option<PeakReport>,
    pub oracle_peaks: Option<PeakReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditFlags {
    /// Printed field sidebands are relatively larger than printed Mollow
    /// sidebands, against the qualitative claim that they are smaller.
    pub ordering_tension: bool,
    /// Printed central term of the field spectrum needs a scale other than 1.
    pub field_central_scale_mismatch: bool,
    /// Printed central term of the Mollow spectrum needs a scale other than 1.
    pub mollow_central_scale_mismatch: bool,
    /// The odd (dispersive) sideband part of the printed field spectrum fits
    /// with a negative scale.
    pub field_dispersive_sign_mismatch: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub params: SystemParams,
    pub mu: C64,
    pub delta_span: f64,
    pub delta_steps: usize,
    pub tau_max: f64,
    pub tau_steps: usize,
    pub field: SpectrumAudit,
    pub mollow: SpectrumAudit,
    pub flags: AuditFlags,
}

/// Grids used by [`audit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditGrids {
    pub delta_span: f64,
    pub delta_steps: usize,
    pub tau_max: f64,
    pub tau_steps: usize,
}

impl AuditGrids {
    pub fn defaults(params: &SystemParams) -> Self {
        AuditGrids {
            delta_span: (8.0 * sideband_rate(params).offset()).max(4.0 * params.gamma()),
            delta_steps: 2001,
            tau_max: 40.0 / params.gamma(),
            tau_steps: 4000,
        }
    }
}

const SCALE_TOLERANCE: f64 = 0.05;

fn audit_one(
    params: &SystemParams,
    delta: &[f64],
    oracle: &SpectrumSeries,
    terms: impl Fn(f64) -> SpectrumTerms,
    degenerate: bool,
) -> Result<SpectrumAudit> {
    let cols: Vec<SpectrumTerms> = delta.iter().map(|&d| terms(d)).collect();
    let column = |f: fn(&SpectrumTerms) -> f64| cols.iter().map(f).collect::<Vec<f64>>();
    let beta_fit = if degenerate {
        None
    } else {
        fit(&["central", "beta_plus", "beta_minus"], vec![column(|t| t.central), column(|t| t.plus), column(|t| t.minus)], &oracle.values)
    };
    let parity_fit = fit(&["central", "even", "odd"], vec![column(|t| t.central), column(|t| t.even), column(|t| t.odd)], &oracle.values);
    let off = sideband_rate(params).offset();
    let at = |d: f64| terms(d).total();
    let probe = spectrum_numeric_probe(oracle, off);
    let printed = SpectrumSeries {
        delta: delta.to_vec(),
        values: cols.iter().map(SpectrumTerms::total).collect(),
        normalized: false,
        params: *params,
    };
    Ok(SpectrumAudit {
        beta_fit,
        parity_fit,
        printed_centre: at(0.0),
        oracle_centre: probe.0,
        printed_ratio: at(off) / at(0.0),
        oracle_ratio: probe.1 / probe.0,
        printed_peaks: find_peaks(&printed).ok(),
        oracle_peaks: find_peaks(oracle).ok(),
    })
}

/// Oracle values at `δ = 0` and `δ = Re μ`, interpolated linearly on the grid.
fn spectrum_numeric_probe(s: &SpectrumSeries, off: f64) -> (f64, f64) {
    let interp = |d: f64| {
        let x = &s.delta;
        let j = x.partition_point(|&v| v < d).clamp(1, x.len() - 1);
        let (x0, x1) = (x[j - 1], x[j]);
        s.values[j - 1] + (s.values[j] - s.values[j - 1]) * (d - x0) / (x1 - x0)
    };
    (interp(0.0), interp(off))
}

/// Compares both printed spectra with transforms of the correlation
/// functions they are meant to represent. Deterministic for fixed inputs.
pub fn audit(params: &SystemParams, grids: AuditGrids) -> Result<AuditReport> {
    let delta = delta_grid(grids.delta_span, grids.delta_steps)?;
    let tau = tau_grid(grids.tau_max, grids.tau_steps)?;
    let degenerate = sideband_rate(params).is_degenerate();

    let field_oracle = spectrum_numeric(&correlation_closed(params, &tau)?, &delta, params)?;
    let field = audit_one(params, &delta, &field_oracle, |d| field_terms(params, d), degenerate)?;

    let mollow_env = mollow_correlation(params, &tau)?;
    let mollow_oracle = spectrum_numeric(&mollow_env, &delta, params)?;
    let mollow = audit_one(params, &delta, &mollow_oracle, |d| mollow_terms(params, d), degenerate)?;

    let central_scale = |a: &SpectrumAudit| a.parity_fit.as_ref().map(|f| f.scales[0]);
    let flags = AuditFlags {
        ordering_tension: field.printed_ratio > mollow.printed_ratio,
        field_central_scale_mismatch: central_scale(&field).is_some_and(|s| (s - 1.0).abs() > SCALE_TOLERANCE),
        mollow_central_scale_mismatch: central_scale(&mollow).is_some_and(|s| (s - 1.0).abs() > SCALE_TOLERANCE),
        field_dispersive_sign_mismatch: field.parity_fit.as_ref().is_some_and(|f| f.scales[2] < 0.0),
    };
    Ok(AuditReport {
        params: *params,
        mu: sideband_rate(params).mu,
        delta_span: grids.delta_span,
        delta_steps: grids.delta_steps,
        tau_max: grids.tau_max,
        tau_steps: grids.tau_steps,
        field,
        mollow,
        flags,
    })
}
