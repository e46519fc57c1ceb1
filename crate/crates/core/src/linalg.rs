//! Small dense helpers: complex 2×2 operators and a tiny linear solver.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

/// Complex 2×2 matrix in the atomic basis `{|0⟩, |1⟩}` (ground first).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a00: C64, a01: C64, a10: C64, a11: C64) -> Self {
        Mat2([[a00, a01], [a10, a11]])
    }

    pub fn zero() -> Self {
        Mat2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Mat2::new(one, zero, zero, one)
    }

    /// `σ+ = |1⟩⟨0|`.
    pub fn sigma_plus() -> Self {
        let zero = C64::new(0.0, 0.0);
        Mat2::new(zero, zero, C64::new(1.0, 0.0), zero)
    }

    /// `σ− = |0⟩⟨1|`.
    pub fn sigma_minus() -> Self {
        Mat2::sigma_plus().adjoint()
    }

    /// `|ψ⟩⟨ψ|` for the amplitude pair `(c0, c1)`.
    pub fn outer(c0: C64, c1: C64) -> Self {
        Mat2::new(c0 * c0.conj(), c0 * c1.conj(), c1 * c0.conj(), c1 * c1.conj())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn adjoint(&self) -> Self {
        let a = &self.0;
        Mat2::new(a[0][0].conj(), a[1][0].conj(), a[0][1].conj(), a[1][1].conj())
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let a = &self.0;
        Mat2::new(a[0][0] * s, a[0][1] * s, a[1][0] * s, a[1][1] * s)
    }

    /// Splits `X = H1 + i·H2` with `H1`, `H2` Hermitian.
    pub fn hermitian_parts(&self) -> (Mat2, Mat2) {
        let adj = self.adjoint();
        let h1 = (*self + adj).scale(C64::new(0.5, 0.0));
        let h2 = (*self - adj).scale(C64::new(0.0, -0.5));
        (h1, h2)
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Entries in row-major order as eight reals `(re, im)` pairs.
    pub fn to_reals(&self) -> [f64; 8] {
        let a = &self.0;
        [
            a[0][0].re, a[0][0].im, a[0][1].re, a[0][1].im, a[1][0].re, a[1][0].im, a[1][1].re,
            a[1][1].im,
        ]
    }

    pub fn from_reals(v: &[f64]) -> Self {
        Mat2::new(
            C64::new(v[0], v[1]),
            C64::new(v[2], v[3]),
            C64::new(v[4], v[5]),
            C64::new(v[6], v[7]),
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Solves the dense system `a · x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` for a numerically singular matrix.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Ordinary least squares `min ‖A c − y‖₂` through the normal equations.
/// `columns[k]` holds basis function `k` sampled on the data points.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let k = columns.len();
    let mut gram = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
        }
        rhs[i] = columns[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }
    solve_dense(gram, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_products() {
        let n = Mat2::sigma_plus() * Mat2::sigma_minus();
        assert_eq!(n.get(1, 1), C64::new(1.0, 0.0));
        assert_eq!(n.trace(), C64::new(1.0, 0.0));
    }

    #[test]
    fn hermitian_split_recombines() {
        let x = Mat2::new(
            C64::new(0.3, -1.0),
            C64::new(2.0, 0.5),
            C64::new(-0.7, 0.1),
            C64::new(0.0, 4.0),
        );
        let (h1, h2) = x.hermitian_parts();
        assert!((h1 - h1.adjoint()).max_abs() < 1e-15);
        assert!((h2 - h2.adjoint()).max_abs() < 1e-15);
        let back = h1 + h2.scale(C64::new(0.0, 1.0));
        assert!((back - x).max_abs() < 1e-15);
    }

    #[test]
    fn solve_small_system() {
        let a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        let x = solve_dense(a, vec![3.0, 5.0, 5.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(solve_dense(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn least_squares_exact_fit() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ones = vec![1.0; xs.len()];
        let y: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let c = least_squares(&[ones, xs], &y).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12);
    }
}
