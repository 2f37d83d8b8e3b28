//! Complex FFT for arbitrary lengths.
//!
//! Powers of two use an in-place iterative radix-2 kernel; other lengths fall
//! back to a recursive mixed-radix transform. The forward transform is
//! unnormalized with kernel `exp(-2πi jk/n)`, the inverse divides by `n`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT length must be positive");
        let twiddles = (0..n)
            .map(|k| {
                let a = -2.0 * PI * (k as f64) / (n as f64);
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        let bitrev = if n.is_power_of_two() {
            let bits = n.trailing_zeros();
            (0..n)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
                .collect()
        } else {
            Vec::new()
        };
        Self { n, twiddles, bitrev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// Inverse transform, normalized so that `inverse(forward(x)) == x`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let s = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    fn twiddle(&self, k: usize, inverse: bool) -> Complex64 {
        let w = self.twiddles[k % self.n];
        if inverse {
            w.conj()
        } else {
            w
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.n, "FFT length mismatch");
        if self.n == 1 {
            return;
        }
        if self.bitrev.is_empty() {
            let input = data.to_vec();
            self.mixed(&input, 0, 1, self.n, data, inverse);
            return;
        }
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for j in 0..half {
                    let w = self.twiddle(j * step, inverse);
                    let a = data[start + j];
                    let b = data[start + j + half] * w;
                    data[start + j] = a + b;
                    data[start + j + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    fn mixed(
        &self,
        x: &[Complex64],
        offset: usize,
        stride: usize,
        n: usize,
        out: &mut [Complex64],
        inverse: bool,
    ) {
        if n == 1 {
            out[0] = x[offset];
            return;
        }
        let p = smallest_factor(n);
        let m = n / p;
        for r in 0..p {
            self.mixed(x, offset + r * stride, stride * p, m, &mut out[r * m..(r + 1) * m], inverse);
        }
        let scale = self.n / n;
        let mut tmp = vec![Complex64::new(0.0, 0.0); n];
        for q in 0..p {
            for k in 0..m {
                let idx = k + m * q;
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..p {
                    acc += out[r * m + k] * self.twiddle((scale * r * idx) % self.n, inverse);
                }
                tmp[idx] = acc;
            }
        }
        out.copy_from_slice(&tmp);
    }
}

fn smallest_factor(n: usize) -> usize {
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            return f;
        }
        f += 1;
    }
    n
}

/// Two-dimensional transform over row-major data `a[i * n2 + j]`.
#[derive(Debug, Clone)]
pub struct Fft2 {
    pub n1: usize,
    pub n2: usize,
    p1: FftPlan,
    p2: FftPlan,
}

impl Fft2 {
    pub fn new(n1: usize, n2: usize) -> Self {
        Self { n1, n2, p1: FftPlan::new(n1), p2: FftPlan::new(n2) }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, true);
    }

    fn apply(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.n1 * self.n2);
        for row in data.chunks_mut(self.n2) {
            if inverse {
                self.p2.inverse(row)
            } else {
                self.p2.forward(row)
            }
        }
        let mut col = vec![Complex64::new(0.0, 0.0); self.n1];
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                col[i] = data[i * self.n2 + j];
            }
            if inverse {
                self.p1.inverse(&mut col)
            } else {
                self.p1.forward(&mut col)
            }
            for i in 0..self.n1 {
                data[i * self.n2 + j] = col[i];
            }
        }
    }
}

/// Signed integer wavenumber of FFT bin `j` out of `n`.
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &v) in x.iter().enumerate() {
                    let a = sign * 2.0 * PI * (j * k) as f64 / n as f64;
                    acc += v * Complex64::new(a.cos(), a.sin());
                }
                acc
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| Complex64::new((j as f64 * 0.37).sin() + 0.1 * j as f64, (j as f64 * 1.3).cos()))
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1, 2, 3, 4, 5, 6, 8, 12, 15, 16, 30, 64, 96] {
            let x = sample(n);
            let mut y = x.clone();
            FftPlan::new(n).forward(&mut y);
            let z = naive(&x, -1.0);
            for (a, b) in y.iter().zip(&z) {
                assert!((a - b).norm() < 1e-10 * n as f64, "n = {n}");
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        for n in [7, 10, 32, 48, 128] {
            let x = sample(n);
            let mut y = x.clone();
            let plan = FftPlan::new(n);
            plan.forward(&mut y);
            plan.inverse(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_dimensional_separable() {
        let (n1, n2) = (8, 6);
        let mut a = vec![Complex64::new(0.0, 0.0); n1 * n2];
        // single mode exp(i(2 x_i + 1 x_j)) on the index lattice
        for i in 0..n1 {
            for j in 0..n2 {
                let ph = 2.0 * PI * (2.0 * i as f64 / n1 as f64 + j as f64 / n2 as f64);
                a[i * n2 + j] = Complex64::new(ph.cos(), ph.sin());
            }
        }
        Fft2::new(n1, n2).forward(&mut a);
        for (idx, z) in a.iter().enumerate() {
            let expect = if idx == 2 * n2 + 1 { (n1 * n2) as f64 } else { 0.0 };
            assert!((z.re - expect).abs() < 1e-10 && z.im.abs() < 1e-10);
        }
    }

    #[test]
    fn wavenumbers() {
        assert_eq!(wavenumber(0, 8), 0);
        assert_eq!(wavenumber(4, 8), 4);
        assert_eq!(wavenumber(5, 8), -3);
    }
}
