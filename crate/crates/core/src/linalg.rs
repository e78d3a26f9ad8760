//! Small dense matrices and a cyclic Jacobi eigenvalue solver.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `max |a_ij − b_ij|`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max)
    }

    /// `max |a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max(libm::fabs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let mut a = Matrix::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]));
        jacobi_in_place(&mut a);
        let mut eig: Vec<f64> = (0..self.n).map(|i| a[(i, i)]).collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// Smallest eigenvalue of the symmetric part; `0` for the empty matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.symmetric_eigenvalues().first().copied().unwrap_or(0.0)
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

fn off_diagonal_norm2(a: &Matrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.n {
        for j in 0..a.n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s
}

/// Cyclic Jacobi sweeps; leaves eigenvalues on the diagonal.
fn jacobi_in_place(a: &mut Matrix) {
    let n = a.n;
    let scale: f64 = a.data.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        if off_diagonal_norm2(a) <= 1e-30 * scale {
            return;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_spectra() {
        let m = Matrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let e = m.symmetric_eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
        assert_eq!(Matrix::identity(5).min_eigenvalue(), 1.0);
        let ones = Matrix::from_fn(4, |_, _| 1.0);
        let e = ones.symmetric_eigenvalues();
        assert!(e[0].abs() < 1e-12 && (e[3] - 4.0).abs() < 1e-12);
        let cov = Matrix::from_fn(2, |i, j| if i == j { 0.25 } else { -0.25 - 0.25 });
        assert!(cov.min_eigenvalue() < -0.2);
    }

    proptest! {
        #[test]
        fn trace_and_frobenius_preserved(n in 1usize..12, vals in proptest::collection::vec(-3.0f64..3.0, 144)) {
            let m = Matrix::from_fn(n, |i, j| vals[i.min(j) * 12 + i.max(j)]);
            let e = m.symmetric_eigenvalues();
            let trace: f64 = (0..n).map(|i| m[(i, i)]).sum();
            let fro: f64 = m.data.iter().map(|v| v * v).sum();
            prop_assert!((e.iter().sum::<f64>() - trace).abs() < 1e-9);
            prop_assert!((e.iter().map(|v| v * v).sum::<f64>() - fro).abs() < 1e-8);
            // Gram matrices are PSD
            let g = Matrix::from_fn(n, |i, j| (0..n).map(|k| m[(i, k)] * m[(j, k)]).sum());
            prop_assert!(g.min_eigenvalue() > -1e-9);
        }
    }
}
