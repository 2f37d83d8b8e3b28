//! Small dense linear algebra and finite-difference weights.

use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Div, Mul, Sub};
#[allow(unused_imports)]
use num_traits::Float;

/// Scalars a real matrix can act on (real or complex right-hand sides).
pub trait RhsScalar: Copy + Sub<Output = Self> + Mul<f64, Output = Self> + Div<f64, Output = Self> {}
impl<T> RhsScalar for T where T: Copy + Sub<Output = T> + Mul<f64, Output = T> + Div<f64, Output = T> {}

/// Finite-difference weights (Fornberg's recursion).
///
/// Returns `w[d][i]`, the weight of node `xs[i]` in the approximation of the
/// `d`-th derivative at `x0`, for `d = 0..=m`.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Banded LU factorization without pivoting, for the diagonally dominant
/// radial operators.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    a: Vec<f64>,
}

impl BandedLu {
    /// Factor the matrix whose `(i, j)` entry is `entry(i, j)` for `|i - j|`
    /// within the band.
    pub fn factor(n: usize, kl: usize, ku: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = kl + ku + 1;
        let mut a = vec![0.0; n * w];
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                a[i * w + j + kl - i] = entry(i, j);
            }
        }
        let mut lu = Self { n, kl, ku, a };
        for k in 0..n {
            let piv = lu.get(k, k);
            if piv.abs() < 1e-300 || !piv.is_finite() {
                return Err(Error::Singular);
            }
            for i in (k + 1)..(k + kl + 1).min(n) {
                let l = lu.get(i, k) / piv;
                lu.set(i, k, l);
                for j in (k + 1)..(k + ku + 1).min(n) {
                    let v = lu.get(i, j) - l * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        Ok(lu)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + j + self.kl - i
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[self.idx(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.a[k] = v;
    }

    pub fn solve_in_place<T: RhsScalar>(&self, b: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let mut v = b[i];
            for k in i.saturating_sub(self.kl)..i {
                v = v - b[k] * self.get(i, k);
            }
            b[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            for j in (i + 1)..(i + self.ku + 1).min(n) {
                v = v - b[j] * self.get(i, j);
            }
            b[i] = v / self.get(i, i);
        }
    }
}

/// Dense LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    a: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(n: usize, mut a: Vec<f64>) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            for i in (k + 1)..n {
                if a[i * n + k].abs() > a[p * n + k].abs() {
                    p = i;
                }
            }
            if a[p * n + k].abs() < 1e-300 {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in (k + 1)..n {
                let l = a[i * n + k] / piv;
                a[i * n + k] = l;
                if l != 0.0 {
                    for j in (k + 1)..n {
                        a[i * n + j] -= l * a[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, a, perm })
    }

    pub fn solve<T: RhsScalar>(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v = v - x[k] * self.a[i * n + k];
            }
            x[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for j in (i + 1)..n {
                v = v - x[j] * self.a[i * n + j];
            }
            x[i] = v / self.a[i * n + i];
        }
        x
    }
}

/// Three-point Gauss–Legendre rule on `[a, b]`, exact for quintics.
pub fn gauss3(a: f64, b: f64) -> [(f64, f64); 3] {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let s = (0.6f64).sqrt();
    [(m - h * s, h * 5.0 / 9.0), (m, h * 8.0 / 9.0), (m + h * s, h * 5.0 / 9.0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fornberg_centered_second_order() {
        let w = fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_abs_diff_eq!(w[1][0], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1][2], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(w[2][0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[2][1], -2.0, epsilon = 1e-14);
    }

    #[test]
    fn fornberg_one_sided_exact_on_polynomials() {
        let xs = [0.0, 0.1, 0.2, 0.3, 0.4];
        let w = fornberg(0.4, &xs, 2);
        let f = |x: f64| 1.0 + 2.0 * x - x * x * x + 0.5 * x * x * x * x;
        let d1: f64 = xs.iter().zip(&w[1]).map(|(x, c)| c * f(*x)).sum();
        let d2: f64 = xs.iter().zip(&w[2]).map(|(x, c)| c * f(*x)).sum();
        let x = 0.4;
        assert_abs_diff_eq!(d1, 2.0 - 3.0 * x * x + 2.0 * x * x * x, epsilon = 1e-9);
        assert_abs_diff_eq!(d2, -6.0 * x + 6.0 * x * x, epsilon = 1e-8);
    }

    #[test]
    fn banded_matches_dense() {
        let n = 9;
        let entry = |i: usize, j: usize| -> f64 {
            if i == j {
                4.0 + i as f64
            } else if i.abs_diff(j) <= 2 {
                1.0 / (1.0 + i as f64 + 2.0 * j as f64)
            } else {
                0.0
            }
        };
        let lu = BandedLu::factor(n, 2, 2, entry).unwrap();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dense[i * n + j] = entry(i, j);
            }
        }
        let dlu = DenseLu::factor(n, dense).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        let y = dlu.solve(&b);
        for (a, c) in x.iter().zip(&y) {
            assert_abs_diff_eq!(a, c, epsilon = 1e-12);
        }
    }

    #[test]
    fn gauss_exact_for_quintic() {
        let q: f64 = gauss3(0.5, 2.0).iter().map(|(x, w)| w * x.powi(5)).sum();
        assert_abs_diff_eq!(q, (2.0f64.powi(6) - 0.5f64.powi(6)) / 6.0, epsilon = 1e-12);
    }
}
