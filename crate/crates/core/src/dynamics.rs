//! Interaction-picture dynamics of the resonantly driven, decaying atom.
//!
//! In the frame rotating at `ω0` the master equation is time independent with
//! Hamiltonian `(Ω/2)(σ+ + σ−)` and collapse operator `√Γ σ−`. Written in the
//! coordinates `(ρ00, Re ρ01, Im ρ01)` it reads `dv/dτ = L v + b`, where the
//! `Re ρ01` row decouples and decays at `Γ/2` while `(ρ00, Im ρ01)` relax to
//! the stationary state through the 2×2 matrix `A(τ)`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::{sideband_rate, stationary_state, BlochState, SystemParams};
use crate::ode::{self, Tolerance};

/// The map `T_τ` relative to the stationary state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Propagator {
    pub tau: f64,
    /// `e^{−Γτ/2}`, applied to `Re ρ01`.
    pub coherence_factor: f64,
    /// `A(τ)` acting on `(ρ00 − ρ00ss, Im ρ01 − Im ρ01ss)`.
    pub amatrix: [[f64; 2]; 2],
    stationary: BlochState,
}

pub fn propagator(params: &SystemParams, tau: f64) -> Result<Propagator> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("propagation time must be finite and >= 0, got {tau}")));
    }
    let (g, w) = (params.gamma(), params.rabi());
    let mu = sideband_rate(params);
    let (c, s) = mu.damped(tau, 0.75 * g);
    let amatrix = [
        [c - 0.25 * g * s, -w * s],
        [w * s, c + 0.25 * g * s],
    ];
    Ok(Propagator {
        tau,
        coherence_factor: (-0.5 * g * tau).exp(),
        amatrix,
        stationary: stationary_state(params),
    })
}

impl Propagator {
    /// Evolves a density matrix given in Bloch coordinates.
    pub fn apply(&self, state: &BlochState) -> BlochState {
        let ss = &self.stationary;
        let (dp, di) = self.rotate(state.p00 - ss.p00, state.im01 - ss.im01);
        BlochState { p00: dp + ss.p00, re01: self.coherence_factor * state.re01, im01: di + ss.im01 }
    }

    /// Applies `T_τ` to an arbitrary complex 2×2 operator by linearity: the
    /// operator is split into Hermitian parts, the stationary offset is
    /// carried with weight equal to each part's trace, and the traceless
    /// remainder evolves with the homogeneous part only.
    pub fn apply_operator(&self, x: &Mat2) -> Mat2 {
        let (h1, h2) = x.hermitian_parts();
        self.apply_hermitian(&h1) + self.apply_hermitian(&h2).scale(C64::new(0.0, 1.0))
    }

    fn apply_hermitian(&self, h: &Mat2) -> Mat2 {
        let weight = h.trace().re;
        let offset = self.stationary.to_matrix().scale(C64::new(weight, 0.0));
        let dev = *h - offset;
        let (d00, dim) = self.rotate(dev.get(0, 0).re, dev.get(0, 1).im);
        let d01 = C64::new(self.coherence_factor * dev.get(0, 1).re, dim);
        offset + Mat2::new(C64::new(d00, 0.0), d01, d01.conj(), C64::new(-d00, 0.0))
    }

    #[inline]
    fn rotate(&self, x: f64, y: f64) -> (f64, f64) {
        let a = &self.amatrix;
        (a[0][0] * x + a[0][1] * y, a[1][0] * x + a[1][1] * y)
    }

    /// Operator 2-norm of `A(τ)`.
    pub fn amatrix_norm(&self) -> f64 {
        let a = &self.amatrix;
        // largest singular value of a 2×2 real matrix
        let s = a[0][0] * a[0][0] + a[0][1] * a[0][1] + a[1][0] * a[1][0] + a[1][1] * a[1][1];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
    }
}

pub fn evolve(params: &SystemParams, state: &BlochState, tau: f64) -> Result<BlochState> {
    state.check()?;
    Ok(propagator(params, tau)?.apply(state))
}

/// Generator `dv/dτ = L v + b` in the coordinates `(ρ00, Re ρ01, Im ρ01)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiouvillianMatrix {
    pub matrix: [[f64; 3]; 3],
    pub constant: [f64; 3],
}

pub fn liouvillian(params: &SystemParams) -> LiouvillianMatrix {
    let (g, w) = (params.gamma(), params.rabi());
    LiouvillianMatrix {
        matrix: [[-g, 0.0, -w], [0.0, -0.5 * g, 0.0], [w, 0.0, -0.5 * g]],
        constant: [g, 0.0, -0.5 * w],
    }
}

impl LiouvillianMatrix {
    pub fn derivative(&self, v: &[f64]) -> [f64; 3] {
        let m = &self.matrix;
        let mut out = self.constant;
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
        }
        out
    }

    /// The `(ρ00, Im ρ01)` block.
    pub fn population_block(&self) -> [[f64; 2]; 2] {
        let m = &self.matrix;
        [[m[0][0], m[0][2]], [m[2][0], m[2][2]]]
    }

    /// Solves `L v + b = 0`.
    pub fn null_state(&self) -> Option<BlochState> {
        let a = self.matrix.iter().map(|r| r.to_vec()).collect();
        let rhs = self.constant.iter().map(|b| -b).collect();
        let v = crate::linalg::solve_dense(a, rhs)?;
        Some(BlochState { p00: v[0], re01: v[1], im01: v[2] })
    }
}

/// Integrates the Liouvillian numerically and returns the state at each
/// requested time.
pub fn evolve_numeric_path(
    params: &SystemParams,
    state: &BlochState,
    times: &[f64],
) -> Result<Vec<BlochState>> {
    state.check()?;
    if times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter("propagation times must be >= 0".into()));
    }
    let gen = liouvillian(params);
    let out = ode::integrate(
        |v, d| d.copy_from_slice(&gen.derivative(v)),
        &state.as_array(),
        times,
        Tolerance::default(),
    )?;
    Ok(out.into_iter().map(|v| BlochState { p00: v[0], re01: v[1], im01: v[2] }).collect())
}

pub fn evolve_numeric(params: &SystemParams, state: &BlochState, tau: f64) -> Result<BlochState> {
    Ok(evolve_numeric_path(params, state, &[tau])?[0])
}

/// Right-hand side of the master equation for an arbitrary complex 2×2
/// operator, `−i[H, X] + Γ(σ− X σ+ − ½{σ+σ−, X})`.
pub fn lindblad_generator(params: &SystemParams, x: &Mat2) -> Mat2 {
    let half_rabi = C64::new(0.5 * params.rabi(), 0.0);
    let h = (Mat2::sigma_plus() + Mat2::sigma_minus()).scale(half_rabi);
    let (sp, sm) = (Mat2::sigma_plus(), Mat2::sigma_minus());
    let n = sp * sm;
    let commutator = (h * *x - *x * h).scale(C64::new(0.0, -1.0));
    let jump = sm * *x * sp;
    let anti = (n * *x + *x * n).scale(C64::new(0.5, 0.0));
    commutator + (jump - anti).scale(C64::new(params.gamma(), 0.0))
}

/// Integrates the master equation directly on a complex 2×2 operator. This
/// does not use the affine decomposition of [`Propagator::apply_operator`] and
/// serves as its oracle for non-Hermitian, non-unit-trace arguments.
pub fn evolve_operator_numeric(params: &SystemParams, x: &Mat2, times: &[f64]) -> Result<Vec<Mat2>> {
    if times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter("propagation times must be >= 0".into()));
    }
    let out = ode::integrate(
        |v, d| d.copy_from_slice(&lindblad_generator(params, &Mat2::from_reals(v)).to_reals()),
        &x.to_reals(),
        times,
        Tolerance::default(),
    )?;
    Ok(out.iter().map(|v| Mat2::from_reals(v)).collect())
}
