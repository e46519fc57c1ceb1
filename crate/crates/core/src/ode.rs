//! Adaptive Dormand–Prince 5(4) integrator for small autonomous linear
//! systems. Used as the independent oracle for the closed-form propagator.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-12, atol: 1e-12 }
    }
}

const MAX_STEPS: usize = 1_000_000;

// Dormand–Prince tableau. The system is autonomous, so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `dy/dt = f(y)` from `t = 0`, returning the state at
/// every requested output time (ascending, within `[0, t_end]`).
pub fn integrate<F>(f: F, y0: &[f64], outputs: &[f64], tol: Tolerance) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h = outputs
        .iter()
        .copied()
        .fold(0.0_f64, f64::max)
        .max(1e-300)
        * 1e-3;
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut results = Vec::with_capacity(outputs.len());
    let mut steps = 0usize;

    f(&y, &mut k[0]);
    for &target in outputs {
        if target < t {
            return Err(Error::InvalidGrid("output times must be ascending and nonnegative".into()));
        }
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::NumericalFailure(format!("step budget exhausted at t = {t}")));
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };

            for s in 1..7 {
                for i in 0..n {
                    let acc: f64 = (0..s).map(|j| A[s][j] * k[j][i]).sum();
                    stage[i] = y[i] + step * acc;
                }
                f(&stage, &mut k[s]);
            }
            let mut err = 0.0_f64;
            for i in 0..n {
                let mut hi = 0.0;
                let mut lo = 0.0;
                for s in 0..7 {
                    hi += B5[s] * k[s][i];
                    lo += B4[s] * k[s][i];
                }
                y5[i] = y[i] + step * hi;
                let scale = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
                err = err.max((step * (hi - lo)).abs() / scale);
            }
            if !err.is_finite() {
                return Err(Error::NumericalFailure(format!("non-finite error estimate at t = {t}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&y5);
                // FSAL: the last stage is the derivative at the new point.
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && err <= 1.0) {
                h = step * factor;
            }
            if h < 1e-14 * t.abs().max(1e-300) {
                return Err(Error::NumericalFailure(format!("step size underflow at t = {t}")));
            }
        }
        results.push(y.clone());
    }
    Ok(results)
}
