//! Spatial weight tensor converting the atomic coherence into the radiated
//! electric field at a detector position.
//!
//! The radial kernel is `F(r) = (1/r) ∫₀^∞ sin(ωr/c)/(ω0 + ω) dω = f(κr)/r`
//! with `κ = ω0/c` and `f` the auxiliary sine-integral function, and
//! `w_ij = (1/2π²)(−δ_ij ∇² + ∂_i∂_j) F(|x|)`. In terms of `f`, `g` and
//! `x̂ = x/r`:
//!
//! `2π² w = (κ²f/r − κ/r²)(δ − x̂x̂) − (κg/r² + f/r³)(δ − 3x̂x̂)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{euler_sum, integrate_adaptive};
use crate::special::aux_fg;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

const PERIODS: usize = 64;

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("distance must be finite and > 0, got {r}")));
    }
    Ok(())
}

fn check_omega0(omega0: f64) -> Result<()> {
    if !(omega0 >= 0.0) || !omega0.is_finite() {
        return Err(Error::InvalidParameter(format!("ω0 must be finite and >= 0, got {omega0}")));
    }
    Ok(())
}

/// `F`, `F'`, `F''` at one radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialDerivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

impl RadialDerivatives {
    fn from_aux(r: f64, kappa: f64, f: f64, g: f64) -> Self {
        if kappa == 0.0 {
            return RadialDerivatives { value: FRAC_PI_2 / r, first: -FRAC_PI_2 / (r * r), second: PI / r.powi(3) };
        }
        let (r2, r3) = (r * r, r * r * r);
        RadialDerivatives {
            value: f / r,
            first: -kappa * g / r - f / r2,
            second: -kappa * kappa * f / r + kappa / r2 + 2.0 * kappa * g / r2 + 2.0 * f / r3,
        }
    }
}

/// `(f(x), g(x))` through the sine and cosine integrals; `f(0) = π/2`.
fn aux_special(x: f64) -> (f64, f64) {
    if x == 0.0 {
        (FRAC_PI_2, f64::INFINITY)
    } else {
        aux_fg(x)
    }
}

/// `(f(x), g(x))` by integrating `sin u/(x+u)` and `cos u/(x+u)` period by
/// period and summing the alternating contributions with Euler's transform.
pub fn aux_quadrature(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("quadrature path needs x > 0, got {x}")));
    }
    let tol = 1e-15;
    let sine = |u: f64| u.sin() / (x + u);
    let cosine = |u: f64| u.cos() / (x + u);
    let mut s_terms = Vec::with_capacity(PERIODS);
    let mut c_terms = Vec::with_capacity(PERIODS);
    for n in 0..PERIODS {
        let a = n as f64 * PI;
        s_terms.push(integrate_adaptive(sine, a, a + PI, tol)?);
        c_terms.push(integrate_adaptive(cosine, a + FRAC_PI_2, a + 1.5 * PI, tol)?);
    }
    let head = integrate_adaptive(cosine, 0.0, FRAC_PI_2, tol)?;
    let (f, df) = euler_sum(&s_terms);
    let (g_tail, dg) = euler_sum(&c_terms);
    let g = head + g_tail;
    if df > 1e-12 * f.abs() || dg > 1e-12 * g.abs() {
        return Err(Error::NumericalFailure(format!(
            "Euler summation did not settle at x = {x} (changes {df:.2e}, {dg:.2e})"
        )));
    }
    Ok((f, g))
}

/// `F(r) = f(κr)/r`, `κ = ω0/c`; exactly `π/(2r)` at `ω0 = 0`.
pub fn radial_kernel(r: f64, omega0: f64) -> Result<f64> {
    Ok(radial_derivatives(r, omega0)?.value)
}

pub fn radial_derivatives(r: f64, omega0: f64) -> Result<RadialDerivatives> {
    check_radius(r)?;
    check_omega0(omega0)?;
    let kappa = omega0 / SPEED_OF_LIGHT;
    let (f, g) = aux_special(kappa * r);
    Ok(RadialDerivatives::from_aux(r, kappa, f, g))
}

/// Same quantities through the accelerated quadrature path.
pub fn radial_derivatives_quadrature(r: f64, omega0: f64) -> Result<RadialDerivatives> {
    check_radius(r)?;
    check_omega0(omega0)?;
    let kappa = omega0 / SPEED_OF_LIGHT;
    if kappa == 0.0 {
        return Ok(RadialDerivatives::from_aux(r, 0.0, FRAC_PI_2, 0.0));
    }
    let (f, g) = aux_quadrature(kappa * r)?;
    Ok(RadialDerivatives::from_aux(r, kappa, f, g))
}

pub fn radial_kernel_quadrature(r: f64, omega0: f64) -> Result<f64> {
    Ok(radial_derivatives_quadrature(r, omega0)?.value)
}

/// The four separated radial pieces of `2π² w`, each multiplying a fixed
/// angular structure:
/// `far (δ − x̂x̂) + mid_transverse (δ − x̂x̂) + mid_longitudinal (δ − 3x̂x̂) + near (δ − 3x̂x̂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldComponents {
    /// `κ² f/r`, the radiation (`r⁻¹`) part.
    pub far: f64,
    /// `−κ/r²`.
    pub mid_transverse: f64,
    /// `−κ g/r²` (`r⁻²` up to the slowly varying `g`).
    pub mid_longitudinal: f64,
    /// `−f/r³`, the quasi-static (`r⁻³`) part.
    pub near: f64,
}

pub fn field_components(r: f64, omega0: f64) -> Result<FieldComponents> {
    check_radius(r)?;
    check_omega0(omega0)?;
    let kappa = omega0 / SPEED_OF_LIGHT;
    if kappa == 0.0 {
        return Ok(FieldComponents { far: 0.0, mid_transverse: 0.0, mid_longitudinal: 0.0, near: -FRAC_PI_2 / r.powi(3) });
    }
    let (f, g) = aux_special(kappa * r);
    Ok(FieldComponents {
        far: kappa * kappa * f / r,
        mid_transverse: -kappa / (r * r),
        mid_longitudinal: -kappa * g / (r * r),
        near: -f / r.powi(3),
    })
}

/// Log-log slopes of the separated components over `[r_min, r_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComponentSlopes {
    pub far: f64,
    pub mid_transverse: f64,
    pub mid_longitudinal: f64,
    pub near: f64,
}

pub fn component_slopes(omega0: f64, r_min: f64, r_max: f64, samples: usize) -> Result<ComponentSlopes> {
    if !(r_max > r_min) || samples < 3 {
        return Err(Error::InvalidGrid("slope fit needs r_max > r_min and at least three samples".into()));
    }
    let (la, lb) = (r_min.ln(), r_max.ln());
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let lr = la + (lb - la) * i as f64 / (samples - 1) as f64;
        rows.push((lr, field_components(lr.exp(), omega0)?));
    }
    let slope = |get: fn(&FieldComponents) -> f64| -> f64 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|(x, c)| (*x, get(c).abs().ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    Ok(ComponentSlopes {
        far: slope(|c| c.far),
        mid_transverse: slope(|c| c.mid_transverse),
        mid_longitudinal: slope(|c| c.mid_longitudinal),
        near: slope(|c| c.near),
    })
}

/// `w_ij(x)` in m⁻³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldWeight {
    pub position: [f64; 3],
    pub tensor: [[f64; 3]; 3],
    pub omega0: f64,
}

/// `w_ij = (1/2π²)[−δ_ij(F'' + 2F'/r) + δ_ij F'/r + x̂_i x̂_j (F'' − F'/r)]`.
pub fn weight_from_derivatives(position: [f64; 3], d: &RadialDerivatives) -> [[f64; 3]; 3] {
    let r = norm(position);
    let iso = -(d.second + 2.0 * d.first / r) + d.first / r;
    let aniso = d.second - d.first / r;
    let mut w = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            w[i][j] = (delta * iso + position[i] * position[j] / (r * r) * aniso) / (2.0 * PI * PI);
        }
    }
    w
}

pub fn weight_tensor(position: [f64; 3], omega0: f64) -> Result<FieldWeight> {
    let r = norm(position);
    if !(r > 0.0) {
        return Err(Error::InvalidParameter("field point must differ from the atom position".into()));
    }
    let d = radial_derivatives(r, omega0)?;
    Ok(FieldWeight { position, tensor: weight_from_derivatives(position, &d), omega0 })
}

fn norm(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Real transition dipole `d` in C·m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DipoleMoment {
    pub d: [f64; 3],
}

impl DipoleMoment {
    pub fn new(d: [f64; 3]) -> Result<Self> {
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("dipole components must be finite".into()));
        }
        Ok(DipoleMoment { d })
    }
}

/// Field at the detector, `E_i = w_ij d_j ⟨σx⟩ / ε0`, in V/m. All physical
/// constants and the overall sign live here.
pub fn field_signal(weight: &FieldWeight, dipole: &DipoleMoment, sigmax: f64) -> [f64; 3] {
    let mut e = [0.0; 3];
    for (i, row) in weight.tensor.iter().enumerate() {
        e[i] = row.iter().zip(&dipole.d).map(|(w, d)| w * d).sum::<f64>() * sigmax / VACUUM_PERMITTIVITY;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_kernel_is_exact() {
        for r in [1e-9, 1e-3, 2.5, 1e4] {
            assert_eq!(radial_kernel(r, 0.0).unwrap(), FRAC_PI_2 / r);
        }
    }

    #[test]
    fn static_tensor() {
        // (3 x̂x̂ − δ)/(4π r³)
        let x = [0.3, -1.2, 0.5];
        let r = norm(x);
        let w = weight_tensor(x, 0.0).unwrap().tensor;
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                let want = (3.0 * x[i] * x[j] / (r * r) - delta) / (4.0 * PI * r.powi(3));
                assert!((w[i][j] - want).abs() < 1e-14 * want.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn decomposition_matches_chain_rule() {
        let x = [2e-7, 1e-7, -3e-7];
        let omega0 = 3e15;
        let r = norm(x);
        let w = weight_tensor(x, omega0).unwrap().tensor;
        let c = field_components(r, omega0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                let xx = x[i] * x[j] / (r * r);
                let want = ((c.far + c.mid_transverse) * (delta - xx) + (c.mid_longitudinal + c.near) * (delta - 3.0 * xx))
                    / (2.0 * PI * PI);
                let scale = w.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
                assert!((w[i][j] - want).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn quadrature_agrees_with_special_functions() {
        for x in [1e-6, 0.01, 0.5, 1.0, 2.0, 7.3, 40.0, 1e3] {
            let (f1, g1) = aux_fg(x);
            let (f2, g2) = aux_quadrature(x).unwrap();
            assert!((f1 - f2).abs() < 1e-10 * f1.abs(), "f at {x}: {f1} vs {f2}");
            assert!((g1 - g2).abs() < 1e-10 * g1.abs(), "g at {x}: {g1} vs {g2}");
        }
    }

    #[test]
    fn rejects_origin() {
        assert!(weight_tensor([0.0; 3], 1e15).is_err());
        assert!(radial_kernel(-1.0, 1e15).is_err());
    }
}
