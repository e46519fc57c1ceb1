//! Acceptance criteria, one line each. Exits 0 after reporting; set
//! `ACCEPTANCE_STRICT=1` to turn any failure into a nonzero exit.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resfluor::correlation::{
    conditional_correlation, conditional_quadratures, correlation_closed, correlation_closed_value,
    delta_grid, mollow_correlation, tau_grid, ThetaAverage,
};
use resfluor::dynamics::{evolve, evolve_numeric};
use resfluor::field::{
    component_slopes, radial_derivatives, radial_derivatives_quadrature, radial_kernel, SPEED_OF_LIGHT,
};
use resfluor::spectrum::{
    audit, find_peaks, spectrum_field, spectrum_mollow_printed, spectrum_numeric, sweep_peak_heights,
    AuditGrids, SpectrumSeries, MAX_PEAK_STEP,
};
use resfluor::trajectory::{ensemble, estimate_stationary, TrajectoryConfig};
use resfluor::{sideband_rate, stationary_state, BlochState, Result, SystemParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn unit(rabi: f64) -> SystemParams {
    SystemParams::new(1.0, rabi, 1e7).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let gamma = 10f64.powf(rng.random_range(6.0..9.0));
    let rel = 10f64.powf(rng.random_range(-3.0..1.5));
    SystemParams::from_relative(gamma, rel, 1e7 * gamma).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng) -> BlochState {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return BlochState { p00: 0.5 * (1.0 + v[2]), re01: 0.5 * v[0], im01: 0.5 * v[1] };
        }
    }
}

fn sum_rule() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let cond = conditional_quadratures(&p, 0.0, ThetaAverage::Exact)?.0;
        worst = worst.max((cond - 1.0).abs()).max((correlation_closed_value(&p, 0.0) - 1.0).abs());
    }
    outcome(worst < 1e-12, format!("max |g(0) - 1| = {worst:.2e} over 100 draws"))
}

fn pipeline_vs_closed() -> Result<Outcome> {
    let tau = tau_grid(20.0, 2000)?;
    let mut worst: f64 = 0.0;
    for w in [0.0, 0.25, 0.5, 1.0, 4.0] {
        let a = conditional_correlation(&unit(w), &tau)?;
        let b = correlation_closed(&unit(w), &tau)?;
        for (x, y) in a.values.iter().zip(&b.values) {
            worst = worst.max((x - y).norm());
        }
    }
    outcome(worst < 1e-8, format!("max deviation {worst:.2e} on [0, 20/Γ]"))
}

fn dynamics_oracle() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut oracle, mut semi, mut fixed_c, mut fixed_n): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for w in [0.0, 0.25, 0.5, 1.0, 4.0] {
        let p = unit(w);
        for _ in 0..20 {
            let s = random_state(&mut rng);
            let t: f64 = rng.random_range(0.0..20.0);
            oracle = oracle.max(evolve(&p, &s, t)?.max_abs_diff(&evolve_numeric(&p, &s, t)?));
            let (t1, t2) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
            let two = evolve(&p, &evolve(&p, &s, t1)?, t2)?;
            semi = semi.max(two.max_abs_diff(&evolve(&p, &s, t1 + t2)?));
        }
        let ss = stationary_state(&p);
        for t in [0.1, 1.0, 10.0] {
            fixed_c = fixed_c.max(evolve(&p, &ss, t)?.max_abs_diff(&ss));
            fixed_n = fixed_n.max(evolve_numeric(&p, &ss, t)?.max_abs_diff(&ss));
        }
    }
    outcome(
        oracle < 1e-8 && semi < 1e-12 && fixed_c < 1e-12 && fixed_n < 1e-10,
        format!("integrator {oracle:.1e}, semigroup {semi:.1e}, fixed point {fixed_c:.1e} / {fixed_n:.1e}"),
    )
}

fn undriven_limit() -> Result<Outcome> {
    let p = unit(0.0);
    let tau = tau_grid(40.0, 4000)?;
    let env = conditional_correlation(&p, &tau)?;
    let env_err = env.tau.iter().zip(&env.values).map(|(t, v)| (v.re - (-0.5 * t).exp()).abs()).fold(0.0, f64::max);
    let s = spectrum_numeric(&env, &delta_grid(4.0, 2001)?, &p)?;
    let peaks = find_peaks(&s)?;
    let hwhm = peaks.central.hwhm.unwrap_or(f64::NAN);
    outcome(
        env_err < 1e-10 && peaks.peak_count() == 1 && (hwhm / 0.5 - 1.0).abs() < 0.02,
        format!("envelope error {env_err:.1e}, {} peak(s), HWHM {hwhm:.5}Γ", peaks.peak_count()),
    )
}

fn triplet_structure() -> Result<Outcome> {
    let gamma = 1e8;
    let step = MAX_PEAK_STEP * gamma;
    let mut pass = true;
    let mut notes = Vec::new();
    let p = SystemParams::from_relative(gamma, 4.0, 1e15)?;
    let mu = sideband_rate(&p).offset();
    let delta = delta_grid(32.0 * gamma, 3201)?;
    for (name, s) in [("S", spectrum_field(&p, &delta)?), ("S_Mol", spectrum_mollow_printed(&p, &delta)?)] {
        let r = find_peaks(&s)?;
        let offset = r.sidebands.iter().map(|sb| (sb.position.abs() - mu) / gamma).fold(0.0_f64, |m, o| if o.abs() > m.abs() { o } else { m });
        let ok = r.peak_count() == 3 && offset.abs() * gamma <= step;
        pass &= ok;
        notes.push(format!("{name} Ω=4Γ: {} peaks, sideband offset {offset:+.4}Γ", r.peak_count()));
    }
    let p = SystemParams::from_relative(gamma, 0.5, 1e15)?;
    for (name, s) in [("S", spectrum_field(&p, &delta)?), ("S_Mol", spectrum_mollow_printed(&p, &delta)?)] {
        let n = find_peaks(&s)?.peak_count();
        pass &= n == 1;
        notes.push(format!("{name} Ω=0.5Γ: {n} peak(s)"));
    }
    notes.push(format!("grid step {:.3}Γ", step / gamma));
    outcome(pass, notes.join("; "))
}

fn sweep_trends() -> Result<Outcome> {
    let rabi: Vec<f64> = (0..800).map(|k| 0.01 + (8.0 - 0.01) * k as f64 / 799.0).collect();
    let rows = sweep_peak_heights(&unit(1.0), &rabi)?;
    let argmax = rows.iter().enumerate().max_by(|a, b| a.1.field_peak.total_cmp(&b.1.field_peak)).map(|(i, _)| i).unwrap();
    let mollow_top = rows.iter().map(|r| r.mollow_peak).fold(0.0, f64::max);
    let vanishing = rows[0].mollow_peak < 1e-3 * mollow_top && rows[..20].windows(2).all(|w| w[0].mollow_peak < w[1].mollow_peak);
    outcome(
        argmax == 0 && vanishing,
        format!(
            "S(ω0) max at Ω={}Γ; S_Mol(ω0) at Ω=0.01Γ is {:.2e} of its maximum",
            rows[argmax].rabi,
            rows[0].mollow_peak / mollow_top
        ),
    )
}

fn mollow_oracle() -> Result<Outcome> {
    let p = unit(20.0);
    let env = mollow_correlation(&p, &tau_grid(40.0, 8000)?)?;
    let s = spectrum_numeric(&env, &delta_grid(30.0, 3001)?, &p)?;
    let r = find_peaks(&s)?;
    let ratio = r.ratios.iter().sum::<f64>() / r.ratios.len().max(1) as f64;
    let centre = r.central.hwhm.unwrap_or(f64::NAN);
    let side = r.sidebands.iter().filter_map(|sb| sb.hwhm).sum::<f64>() / r.sidebands.len().max(1) as f64;
    outcome(
        r.sidebands.len() == 2 && (ratio * 3.0 - 1.0).abs() < 0.05 && (centre / 0.5 - 1.0).abs() < 0.1 && (side / 0.75 - 1.0).abs() < 0.1,
        format!("height ratio {ratio:.4}, central HWHM {centre:.4}Γ, sideband HWHM {side:.4}Γ"),
    )
}

fn audit_report() -> Result<Outcome> {
    let p = unit(4.0);
    let a = audit(&p, AuditGrids::defaults(&p))?;
    let b = audit(&p, AuditGrids::defaults(&p))?;
    let same = serde_json::to_string(&a).unwrap() == serde_json::to_string(&b).unwrap();
    let fit = a.field.beta_fit.as_ref().map(|f| f.scales.clone()).unwrap_or_default();
    let betas_ok = fit.len() == 3 && (fit[1] - 1.0).abs() < 0.05 && (fit[2] - 1.0).abs() < 0.05;
    let r1 = a.field.printed_ratio;
    let r2 = a.mollow.printed_ratio;
    outcome(
        same && betas_ok && (r1 / 0.172 - 1.0).abs() < 0.02 && (r2 / 0.095 - 1.0).abs() < 0.02 && a.flags.ordering_tension,
        format!(
            "ratios {r1:.4} / {r2:.4}, field β fit [{:.3}, {:.3}, {:.3}], ordering tension {}, deterministic {same}",
            fit.first().unwrap_or(&f64::NAN),
            fit.get(1).unwrap_or(&f64::NAN),
            fit.get(2).unwrap_or(&f64::NAN),
            a.flags.ordering_tension
        ),
    )
}

fn field_weights() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut exact: f64 = 0.0;
    let mut dual: f64 = 0.0;
    for _ in 0..30 {
        let r = 10f64.powf(rng.random_range(-12.0..3.0));
        exact = exact.max((radial_kernel(r, 0.0)? - FRAC_PI_2 / r).abs() / (FRAC_PI_2 / r));
        let omega0 = 10f64.powf(rng.random_range(13.0..16.0));
        let x = 2.0 * PI * SPEED_OF_LIGHT / omega0 * 10f64.powf(rng.random_range(-4.0..2.5));
        let (a, b) = (radial_derivatives(x, omega0)?, radial_derivatives_quadrature(x, omega0)?);
        for (u, v) in [(a.value, b.value), (a.first, b.first), (a.second, b.second)] {
            dual = dual.max((u - v).abs() / u.abs());
        }
    }
    let omega0 = 1e15;
    let lam = 2.0 * PI * SPEED_OF_LIGHT / omega0;
    let near = component_slopes(omega0, lam * 1e-6, lam * 1e-3, 200)?;
    let wide = component_slopes(omega0, lam / 100.0, lam * 100.0, 200)?;
    let slopes_ok = (near.far + 1.0).abs() < 0.05 && (near.mid_transverse + 2.0).abs() < 0.05 && (near.near + 3.0).abs() < 0.05;
    outcome(
        exact < 1e-12 && dual < 1e-9 && slopes_ok,
        format!(
            "static {exact:.1e}, dual-method {dual:.1e}, slopes [{:.3}, {:.3}, {:.3}] on [1e-6, 1e-3]λ0 \
             (on [1e-2, 1e2]λ0: [{:.3}, {:.3}, {:.3}])",
            near.far, near.mid_transverse, near.near, wide.far, wide.mid_transverse, wide.near
        ),
    )
}

fn trajectory_oracle() -> Result<Outcome> {
    let p = unit(1.0);
    let cfg = TrajectoryConfig::standard(&p, 1000.0);
    let runs = ensemble(&p, cfg, 2024, 100)?;
    let again = ensemble(&p, cfg, 2024, 100)?;
    let est = estimate_stationary(&p, &runs)?;
    let dp = (est.state.p00 - 2.0 / 3.0) / est.state_stderr[0];
    let dr = (est.jump_rate - 1.0 / 3.0) / est.jump_rate_stderr;
    let same = runs == again;
    outcome(
        dp.abs() < 3.0 && dr.abs() < 3.0 && same,
        format!(
            "p00 {:.4} ({dp:+.2}σ), rate {:.4}Γ ({dr:+.2}σ), reproducible {same}",
            est.state.p00, est.jump_rate
        ),
    )
}

fn symmetry() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut imaginary = 0;
    let check = |s: &SpectrumSeries| {
        let n = s.values.len();
        (0..n / 2)
            .map(|i| (s.values[i] - s.values[n - 1 - i]).abs() / s.values[i].abs().max(s.values[n - 1 - i].abs()))
            .fold(0.0, f64::max)
    };
    for _ in 0..100 {
        let p = random_params(&mut rng);
        if !sideband_rate(&p).is_real() {
            imaginary += 1;
        }
        let delta = delta_grid(rng.random_range(0.5..40.0) * p.gamma(), 401)?;
        worst = worst.max(check(&spectrum_field(&p, &delta)?)).max(check(&spectrum_mollow_printed(&p, &delta)?));
    }
    outcome(worst < 1e-10, format!("max relative asymmetry {worst:.1e}, {imaginary}/100 draws with imaginary μ"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("sum rule g(0) = 1", sum_rule),
        ("projector pipeline equals closed form", pipeline_vs_closed),
        ("dynamics oracle", dynamics_oracle),
        ("undriven limit", undriven_limit),
        ("triplet structure", triplet_structure),
        ("drive-sweep trends", sweep_trends),
        ("Mollow regression oracle", mollow_oracle),
        ("audit report", audit_report),
        ("field weights", field_weights),
        ("trajectory oracle", trajectory_oracle),
        ("printed spectrum symmetry", symmetry),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
