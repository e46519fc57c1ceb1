//! Parameters of the driven atom and the closed-form scalars derived from
//! them: the sideband rate `μ`, the stationary state, and the β coefficients
//! of the two spectra.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// Below this carrier-to-linewidth ratio the demodulated spectra (which drop
/// the counter-rotating image at `−ω0`) are no longer trustworthy.
pub const MIN_CARRIER_RATIO: f64 = 100.0;

/// Decay rate `Γ`, Rabi frequency `Ω` and transition frequency `ω0`, all in
/// rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SystemParams {
    gamma: f64,
    rabi: f64,
    omega0: f64,
    carrier_warning: bool,
}

impl SystemParams {
    pub fn new(gamma: f64, rabi: f64, omega0: f64) -> Result<Self> {
        validate_params(gamma, rabi, omega0)
    }

    /// Builds parameters with the Rabi frequency given in units of `Γ`.
    pub fn from_relative(gamma: f64, rabi_over_gamma: f64, omega0: f64) -> Result<Self> {
        validate_params(gamma, rabi_over_gamma * gamma, omega0)
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    #[inline]
    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// True when `ω0/Γ < 100`.
    pub fn carrier_warning(&self) -> bool {
        self.carrier_warning
    }

    /// Same atom with a different Rabi frequency.
    pub fn with_rabi(&self, rabi: f64) -> Result<Self> {
        validate_params(self.gamma, rabi, self.omega0)
    }

    /// `Γ² + 2Ω²`, the denominator shared by every stationary quantity.
    #[inline]
    pub fn saturation_denominator(&self) -> f64 {
        self.gamma * self.gamma + 2.0 * self.rabi * self.rabi
    }
}

pub fn validate_params(gamma: f64, rabi: f64, omega0: f64) -> Result<SystemParams> {
    if !(gamma.is_finite() && rabi.is_finite() && omega0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite input (gamma={gamma}, rabi={rabi}, omega0={omega0})"
        )));
    }
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!("nonpositive decay rate {gamma}")));
    }
    if rabi < 0.0 {
        return Err(Error::InvalidParameter(format!("negative Rabi frequency {rabi}")));
    }
    if omega0 <= 0.0 {
        return Err(Error::InvalidParameter(format!("nonpositive transition frequency {omega0}")));
    }
    let carrier_warning = omega0 / gamma < MIN_CARRIER_RATIO;
    if carrier_warning {
        log::warn!(
            "omega0/gamma = {:.3e} < {MIN_CARRIER_RATIO}; demodulated spectra drop a counter-rotating image that is no longer negligible",
            omega0 / gamma
        );
    }
    Ok(SystemParams { gamma, rabi, omega0, carrier_warning })
}

/// `μ = ¼·sqrt(16Ω² − Γ²)`: real above the critical drive `4Ω = Γ`, positive
/// imaginary below it, exactly zero at it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SidebandRate {
    pub mu: C64,
}

impl SidebandRate {
    pub fn is_degenerate(&self) -> bool {
        self.mu.re == 0.0 && self.mu.im == 0.0
    }

    pub fn is_real(&self) -> bool {
        self.mu.im == 0.0
    }

    /// Sideband offset `Re μ` (zero in the overdamped regime).
    pub fn offset(&self) -> f64 {
        self.mu.re
    }

    /// `cos(μτ)`, real for both branches (`cosh(|μ|τ)` when `μ` is imaginary).
    pub fn cos_t(&self, tau: f64) -> f64 {
        if self.is_real() {
            (self.mu.re * tau).cos()
        } else {
            (self.mu.im * tau).cosh()
        }
    }

    /// `sin(μτ)/μ`, continuous through `μ = 0` where it equals `τ`.
    pub fn sinc_t(&self, tau: f64) -> f64 {
        if self.is_degenerate() {
            tau
        } else if self.is_real() {
            (self.mu.re * tau).sin() / self.mu.re
        } else {
            (self.mu.im * tau).sinh() / self.mu.im
        }
    }

    /// `(e^{−κτ} cos μτ, e^{−κτ} sin(μτ)/μ)` for a decay rate `κ ≥ |Im μ|`,
    /// evaluated without forming `cosh` or `sinh` of large arguments.
    pub fn damped(&self, tau: f64, decay: f64) -> (f64, f64) {
        let kappa = self.mu.im;
        if self.is_real() || kappa * tau < 1.0 {
            let envelope = (-decay * tau).exp();
            return (envelope * self.cos_t(tau), envelope * self.sinc_t(tau));
        }
        let slow = ((kappa - decay) * tau).exp();
        let fast = ((-kappa - decay) * tau).exp();
        (0.5 * (slow + fast), (slow - fast) / (2.0 * kappa))
    }
}

pub fn sideband_rate(params: &SystemParams) -> SidebandRate {
    let (g, w) = (params.gamma, params.rabi);
    let radicand = 16.0 * w * w - g * g;
    let mu = if radicand >= 0.0 {
        C64::new(0.25 * radicand.sqrt(), 0.0)
    } else {
        C64::new(0.0, 0.25 * (-radicand).sqrt())
    };
    SidebandRate { mu }
}

/// Interaction-picture density matrix in real coordinates
/// `(ρ00, Re ρ01, Im ρ01)`; `ρ11 = 1 − ρ00` and `ρ10 = ρ01*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochState {
    pub p00: f64,
    pub re01: f64,
    pub im01: f64,
}

/// Slack allowed on the positivity conditions of a [`BlochState`].
pub const POSITIVITY_TOL: f64 = 1e-10;

impl BlochState {
    pub fn new(p00: f64, re01: f64, im01: f64) -> Result<Self> {
        let s = BlochState { p00, re01, im01 };
        s.check()?;
        Ok(s)
    }

    pub const fn ground() -> Self {
        BlochState { p00: 1.0, re01: 0.0, im01: 0.0 }
    }

    pub const fn excited() -> Self {
        BlochState { p00: 0.0, re01: 0.0, im01: 0.0 }
    }

    pub fn check(&self) -> Result<()> {
        let BlochState { p00, re01, im01 } = *self;
        if !(p00.is_finite() && re01.is_finite() && im01.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        if p00 < -POSITIVITY_TOL || p00 > 1.0 + POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("population {p00} outside [0, 1]")));
        }
        if re01 * re01 + im01 * im01 > p00 * (1.0 - p00) + POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "coherence |rho01|^2 = {} exceeds rho00*rho11 = {}",
                re01 * re01 + im01 * im01,
                p00 * (1.0 - p00)
            )));
        }
        Ok(())
    }

    pub fn rho01(&self) -> C64 {
        C64::new(self.re01, self.im01)
    }

    pub fn to_matrix(&self) -> Mat2 {
        let r01 = self.rho01();
        Mat2::new(C64::new(self.p00, 0.0), r01, r01.conj(), C64::new(1.0 - self.p00, 0.0))
    }

    /// Reads the real coordinates of a unit-trace Hermitian matrix.
    pub fn from_matrix(m: &Mat2) -> Self {
        BlochState { p00: m.get(0, 0).re, re01: m.get(0, 1).re, im01: m.get(0, 1).im }
    }

    /// Trace distance `½‖ρa − ρb‖₁`.
    pub fn trace_distance(&self, other: &BlochState) -> f64 {
        let dp = self.p00 - other.p00;
        let dr = self.re01 - other.re01;
        let di = self.im01 - other.im01;
        (dp * dp + dr * dr + di * di).sqrt()
    }

    pub fn max_abs_diff(&self, other: &BlochState) -> f64 {
        (self.p00 - other.p00)
            .abs()
            .max((self.re01 - other.re01).abs())
            .max((self.im01 - other.im01).abs())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p00, self.re01, self.im01]
    }
}

pub fn stationary_state(params: &SystemParams) -> BlochState {
    let (g, w) = (params.gamma, params.rabi);
    let den = params.saturation_denominator();
    BlochState { p00: (g * g + w * w) / den, re01: 0.0, im01: g * w / den }
}

/// `β± = even ∓ i·odd/μ`. Keeping the two parts separate lets closed forms be
/// written with `cos μτ` and `sin(μτ)/μ`, which stay finite at `μ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaTerms {
    pub even: f64,
    pub odd: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaPair {
    pub plus: C64,
    pub minus: C64,
}

/// β coefficients of one spectrum. `pair` is `None` at the critical drive
/// `4Ω = Γ`, where `β±` diverge individually; the sum `β+ + β−` and every
/// closed form built from [`BetaTerms`] remain finite there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Betas {
    pub terms: BetaTerms,
    pub mu: SidebandRate,
    pub pair: Option<BetaPair>,
}

impl Betas {
    fn from_terms(terms: BetaTerms, mu: SidebandRate) -> Self {
        let pair = (!mu.is_degenerate()).then(|| {
            let odd = C64::new(0.0, terms.odd) / mu.mu;
            BetaPair { plus: terms.even - odd, minus: terms.even + odd }
        });
        Betas { terms, mu, pair }
    }

    pub fn is_degenerate(&self) -> bool {
        self.pair.is_none()
    }

    /// `β+ + β−`, defined at every drive strength.
    pub fn sum(&self) -> f64 {
        2.0 * self.terms.even
    }
}

pub fn beta_field(params: &SystemParams) -> Betas {
    let (g, w) = (params.gamma, params.rabi);
    let den = params.saturation_denominator();
    let den2 = den * den;
    let terms = BetaTerms {
        even: (g.powi(4) + 4.0 * w.powi(4)) / (2.0 * den2),
        odd: g / 8.0 * (1.0 - 12.0 * g * g * w * w / den2),
    };
    Betas::from_terms(terms, sideband_rate(params))
}

pub fn beta_mollow(params: &SystemParams) -> Betas {
    let (g, w) = (params.gamma, params.rabi);
    let den = params.saturation_denominator();
    let terms = BetaTerms {
        even: -(g * g - 2.0 * w * w) / (4.0 * den),
        odd: g / 16.0 * (1.0 - 12.0 * w * w / den),
    };
    Betas::from_terms(terms, sideband_rate(params))
}
