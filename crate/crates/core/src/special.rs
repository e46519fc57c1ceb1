//! Sine and cosine integrals and the auxiliary functions `f`, `g`.
//!
//! `f(x) = ∫₀^∞ sin t/(t + x) dt = Ci(x) sin x − (Si(x) − π/2) cos x`
//! `g(x) = ∫₀^∞ cos t/(t + x) dt = −Ci(x) cos x − (Si(x) − π/2) sin x`

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const MAX_ITER: usize = 200;

/// `(Si(x), Ci(x), Si(x) − π/2)` for `x > 0`. The last entry is returned
/// separately because it is computed without cancellation for large `x`.
pub fn sici(x: f64) -> (f64, f64, f64) {
    assert!(x > 0.0, "sici requires x > 0");
    if x < SERIES_LIMIT {
        let (si, ci) = sici_series(x);
        (si, ci, si - FRAC_PI_2)
    } else {
        // modified Lentz evaluation of the continued fraction for E1(ix)
        let tiny = 1e-300;
        let mut b = C64::new(1.0, x);
        let mut c = C64::new(1.0 / tiny, 0.0);
        let mut d = b.inv();
        let mut h = d;
        for i in 2..MAX_ITER {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += 2.0;
            d = (d * a + b).inv();
            c = b + c.inv() * a;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= C64::new(x.cos(), -x.sin());
        let si_shift = h.im;
        (FRAC_PI_2 + si_shift, -h.re, si_shift)
    }
}

fn sici_series(x: f64) -> (f64, f64) {
    if x < 1e-8 {
        return (x, EULER_GAMMA + x.ln());
    }
    let (mut si, mut ci) = (0.0, 0.0);
    let mut fact = 1.0;
    for k in 1..MAX_ITER {
        fact *= x / k as f64;
        let term = fact / k as f64;
        // odd k contribute to Si, even k to Ci, with alternating signs
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            si += sign * term;
        } else {
            ci -= if sign > 0.0 { -term } else { term };
        }
        if term < 1e-17 * si.abs().max(ci.abs()).max(1e-300) {
            break;
        }
    }
    (si, ci + EULER_GAMMA + x.ln())
}

/// Auxiliary functions `(f(x), g(x))` for `x > 0`.
pub fn aux_fg(x: f64) -> (f64, f64) {
    let (_, ci, si_shift) = sici(x);
    let (s, c) = x.sin_cos();
    (ci * s - si_shift * c, -ci * c - si_shift * s)
}
