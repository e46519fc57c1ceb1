//! Quadrature: Filon-type integration of sampled functions against
//! `e^{−iδτ}`, adaptive Gauss–Kronrod, and Euler summation of alternating
//! series.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// `∫ f(τ) e^{−iδτ} dτ` over the sample grid, with `f` interpolated by
/// piecewise quadratics (three-point panels). The products with the
/// oscillatory weight are integrated exactly, so the rule stays accurate when
/// `δ` is large compared to the grid step. At `δ = 0` it reduces to
/// composite Simpson on uniform grids.
pub fn oscillatory_integral(tau: &[f64], f: &[C64], delta: f64) -> C64 {
    let n = tau.len().min(f.len());
    match n {
        0 | 1 => return C64::new(0.0, 0.0),
        2 => {
            // linear interpolant through two points
            let (x0, x1) = (tau[0], tau[1]);
            let m = moments(delta, 0.0, x1 - x0);
            let slope = (f[1] - f[0]) / (x1 - x0);
            return phase(delta, x0) * (f[0] * m[0] + slope * m[1]);
        }
        _ => {}
    }
    let mut total = C64::new(0.0, 0.0);
    // moments only depend on the panel shape; uniform grids reuse them
    let mut cache = MomentCache::default();
    let mut i = 0;
    while i + 2 < n {
        total += panel(&tau[i..i + 3], &f[i..i + 3], delta, tau[i], tau[i + 2], &mut cache);
        i += 2;
    }
    if i + 1 < n {
        // one interval left: reuse the last three samples
        total += panel(&tau[n - 3..n], &f[n - 3..n], delta, tau[n - 2], tau[n - 1], &mut cache);
    }
    total
}

#[derive(Default)]
struct MomentCache {
    key: Option<(f64, f64)>,
    value: [C64; 3],
}

impl MomentCache {
    fn get(&mut self, delta: f64, ua: f64, ub: f64) -> [C64; 3] {
        // grid points carry rounding; shapes equal to 1e-11 count as equal
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-11 * x.abs().max(y.abs());
        if !self.key.is_some_and(|(a, b)| close(a, ua) && close(b, ub)) {
            self.value = moments(delta, ua, ub);
            self.key = Some((ua, ub));
        }
        self.value
    }
}

#[inline]
fn phase(delta: f64, x: f64) -> C64 {
    C64::from_polar(1.0, -delta * x)
}

fn panel(x: &[f64], y: &[C64], delta: f64, a: f64, b: f64, cache: &mut MomentCache) -> C64 {
    let centre = x[1];
    let (u0, u2) = (x[0] - centre, x[2] - centre);
    let d0 = (y[0] - y[1]) / u0;
    let d2 = (y[2] - y[1]) / u2;
    let c2 = (d2 - d0) / (u2 - u0);
    let c1 = d0 - c2 * u0;
    let c0 = y[1];
    let m = cache.get(delta, a - centre, b - centre);
    phase(delta, centre) * (c0 * m[0] + c1 * m[1] + c2 * m[2])
}

/// `M_k = ∫_{ua}^{ub} u^k e^{−iδu} du` for `k = 0, 1, 2`.
fn moments(delta: f64, ua: f64, ub: f64) -> [C64; 3] {
    let s = C64::new(0.0, -delta);
    let reach = delta.abs() * ua.abs().max(ub.abs());
    if reach <= 1.0 {
        // power series of the exponential
        let mut out = [C64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut coeff = C64::new(1.0, 0.0);
            let mut pa = ua.powi(k as i32 + 1);
            let mut pb = ub.powi(k as i32 + 1);
            // |s u| <= 1, so 30 terms are far below rounding
            for n in 0..30 {
                let p = (k + n + 1) as f64;
                let term = coeff * ((pb - pa) / p);
                *slot += term;
                coeff = coeff * s / (n + 1) as f64;
                pa *= ua;
                pb *= ub;
            }
        }
        out
    } else {
        let anti = |u: f64| -> [C64; 3] {
            let e = (s * u).exp();
            let (s1, s2, s3) = (s.inv(), (s * s).inv(), (s * s * s).inv());
            [e * s1, e * (u * s1 - s2), e * (u * u * s1 - 2.0 * u * s2 + 2.0 * s3)]
        };
        let (fa, fb) = (anti(ua), anti(ub));
        [fb[0] - fa[0], fb[1] - fa[1], fb[2] - fa[2]]
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate, error estimate (QUADPACK scaling) and the roundoff
/// floor for the interval.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut values = [0.0; 15];
    values[7] = fc;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut resabs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(centre - dx), f(centre + dx));
        values[j] = lo;
        values[14 - j] = hi;
        kronrod += WGK[j] * (lo + hi);
        resabs += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((values[j] - mean).abs() + (values[14 - j] - mean).abs());
    }
    let (resabs, resasc) = (resabs * half.abs(), resasc * half.abs());
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    (kronrod * half, err.max(floor), floor)
}

const MAX_INTERVALS: usize = 4000;

/// Globally adaptive Gauss–Kronrod integration of a real function on
/// `[a, b]`: the interval with the largest error is bisected until the total
/// error estimate drops below `abs_tol` or every interval is at roundoff.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    let (v, e, fl) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e, fl)];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        let at_floor = parts.iter().all(|p| p.3 <= p.4);
        if total_err <= abs_tol || at_floor {
            return Ok(parts.iter().map(|p| p.2).sum());
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::NumericalFailure(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {total_err:e}"
            )));
        }
        let worst = parts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.3 > p.4)
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("some interval is above roundoff");
        let (lo, hi, ..) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (x0, x1) in [(lo, mid), (mid, hi)] {
            let (v, e, fl) = gk15(&f, x0, x1);
            parts.push((x0, x1, v, e, fl));
        }
    }
}

/// Sum of an alternating series from its leading terms by the Euler
/// transformation, realised as repeated averaging of the partial sums.
/// Returns the estimate and the change between the last two levels.
pub fn euler_sum(terms: &[f64]) -> (f64, f64) {
    let mut sums: Vec<f64> = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let mut previous = *sums.last().unwrap_or(&0.0);
    let mut change = f64::INFINITY;
    while sums.len() > 1 {
        sums = sums.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let current = *sums.last().unwrap();
        change = (current - previous).abs();
        previous = current;
    }
    (previous, change)
}
