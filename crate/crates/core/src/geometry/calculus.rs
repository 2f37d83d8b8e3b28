//! Differentiation: spectral on the torus; fourth-order finite differences in
//! radius and spectral in angle on disk and annulus.

use super::{Grid2D, VectorField};
use alloc::vec;
use alloc::vec::Vec;
use crate::fft::wavenumber;
use num_complex::Complex64;

/// Pointwise Jacobian, `m[i][j][node] = ∂_j v_i`.
#[derive(Debug, Clone)]
pub struct Jacobian {
    pub m: [[Vec<f64>; 2]; 2],
}

impl Jacobian {
    pub fn at(&self, k: usize) -> [[f64; 2]; 2] {
        [[self.m[0][0][k], self.m[0][1][k]], [self.m[1][0][k], self.m[1][1][k]]]
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> [[f64; 2]; 2]) -> Self {
        let mut m = [[vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]]];
        for k in 0..n {
            let a = f(k);
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j][k] = a[i][j];
                }
            }
        }
        Self { m }
    }
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

impl Grid2D {
    // ---- torus spectral helpers ----

    fn partner(&self, k: usize) -> usize {
        let (n1, n2) = self.resolution();
        let (i, j) = (k / n2, k % n2);
        ((n1 - i) % n1) * n2 + (n2 - j) % n2
    }

    pub(crate) fn torus_forward(&self, a: &[f64]) -> Vec<Complex64> {
        let ops = self.torus.as_ref().expect("torus grid");
        let mut z: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        ops.fft.forward(&mut z);
        z
    }

    /// Spectra of two real arrays from a single complex transform.
    pub(crate) fn torus_forward_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let ops = self.torus.as_ref().expect("torus grid");
        let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        ops.fft.forward(&mut z);
        let n = z.len();
        let (mut fa, mut fb) = (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]);
        for k in 0..n {
            let zp = z[self.partner(k)].conj();
            fa[k] = (z[k] + zp) * 0.5;
            fb[k] = (z[k] - zp) * Complex64::new(0.0, -0.5);
        }
        (fa, fb)
    }

    /// Two real arrays from Hermitian spectra, via one complex transform.
    pub(crate) fn torus_inverse_pair(&self, fa: &[Complex64], fb: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let ops = self.torus.as_ref().expect("torus grid");
        let mut z: Vec<Complex64> = fa.iter().zip(fb).map(|(a, b)| a + I * b).collect();
        ops.fft.inverse(&mut z);
        (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
    }

    pub(crate) fn torus_inverse(&self, fa: &[Complex64]) -> Vec<f64> {
        let ops = self.torus.as_ref().expect("torus grid");
        let mut z = fa.to_vec();
        ops.fft.inverse(&mut z);
        z.iter().map(|c| c.re).collect()
    }

    /// `(i kd1 f̂, i kd2 f̂)` with Nyquist entries zeroed.
    pub(crate) fn torus_grad_hat(&self, f: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let ops = self.torus.as_ref().expect("torus grid");
        let n2 = self.resolution().1;
        let a = f.iter().enumerate().map(|(k, v)| I * ops.kd1[k / n2] * v).collect();
        let b = f.iter().enumerate().map(|(k, v)| I * ops.kd2[k % n2] * v).collect();
        (a, b)
    }

    // ---- polar helpers ----

    /// Radial derivative at every node.
    pub(crate) fn d_r(&self, f: &[f64]) -> Vec<f64> {
        let p = self.polar.as_ref().expect("polar grid");
        let (n1, n2) = self.resolution();
        let half = n2 / 2;
        let mut out = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for &(node, mirrored, w) in &p.d1[i] {
                let shift = if mirrored { half } else { 0 };
                let src = &f[node * n2..(node + 1) * n2];
                let dst = &mut out[i * n2..(i + 1) * n2];
                for j in 0..n2 {
                    dst[j] += w * src[(j + shift) % n2];
                }
            }
        }
        out
    }

    /// Angular derivatives of two real arrays at once.
    pub(crate) fn d_theta_pair(&self, f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = self.polar.as_ref().expect("polar grid");
        let (n1, n2) = self.resolution();
        let (mut a, mut b) = (vec![0.0; n1 * n2], vec![0.0; n1 * n2]);
        let mut z = vec![Complex64::new(0.0, 0.0); n2];
        for i in 0..n1 {
            for j in 0..n2 {
                z[j] = Complex64::new(f[i * n2 + j], g[i * n2 + j]);
            }
            p.fft.forward(&mut z);
            for j in 0..n2 {
                z[j] *= I * p.md[j];
            }
            p.fft.inverse(&mut z);
            for j in 0..n2 {
                a[i * n2 + j] = z[j].re;
                b[i * n2 + j] = z[j].im;
            }
        }
        (a, b)
    }

    /// Cartesian derivatives from polar ones.
    fn polar_to_cartesian(&self, fr: &[f64], ft: &[f64]) -> [Vec<f64>; 2] {
        let p = self.polar.as_ref().expect("polar grid");
        let (n1, n2) = self.resolution();
        let (mut gx, mut gy) = (vec![0.0; n1 * n2], vec![0.0; n1 * n2]);
        for i in 0..n1 {
            let inv_r = 1.0 / self.axis1()[i];
            for j in 0..n2 {
                let k = i * n2 + j;
                let (c, s) = (p.cos[j], p.sin[j]);
                gx[k] = c * fr[k] - s * inv_r * ft[k];
                gy[k] = s * fr[k] + c * inv_r * ft[k];
            }
        }
        [gx, gy]
    }

    /// Multiplies the spectra of two arrays by `mult(η)`, `η ∈ [0, 1]` the
    /// normalised wavenumber: `max(|k1|/(n1/2), |k2|/(n2/2))` on the torus,
    /// `|m|/(n2/2)` per ring on polar grids.
    pub(crate) fn filter_pair(&self, a: &mut [f64], b: &mut [f64], mult: impl Fn(f64) -> f64) {
        let (n1, n2) = self.resolution();
        if let Some(ops) = self.torus.as_ref() {
            let mut z: Vec<Complex64> = a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect();
            ops.fft.forward(&mut z);
            for (k, v) in z.iter_mut().enumerate() {
                let e1 = wavenumber(k / n2, n1).unsigned_abs() as f64 / (n1 / 2) as f64;
                let e2 = wavenumber(k % n2, n2).unsigned_abs() as f64 / (n2 / 2) as f64;
                *v *= mult(e1.max(e2));
            }
            ops.fft.inverse(&mut z);
            for (k, v) in z.iter().enumerate() {
                a[k] = v.re;
                b[k] = v.im;
            }
        } else {
            let p = self.polar.as_ref().expect("polar grid");
            let table: Vec<f64> = p.m.iter().map(|m| mult(m.abs() / (n2 / 2) as f64)).collect();
            let mut z = vec![Complex64::new(0.0, 0.0); n2];
            for i in 0..n1 {
                for j in 0..n2 {
                    z[j] = Complex64::new(a[i * n2 + j], b[i * n2 + j]);
                }
                p.fft.forward(&mut z);
                for j in 0..n2 {
                    z[j] *= table[j];
                }
                p.fft.inverse(&mut z);
                for j in 0..n2 {
                    a[i * n2 + j] = z[j].re;
                    b[i * n2 + j] = z[j].im;
                }
            }
        }
    }

    // ---- public operators ----

    pub fn gradient(&self, f: &[f64]) -> [Vec<f64>; 2] {
        if self.torus.is_some() {
            let fh = self.torus_forward(f);
            let (a, b) = self.torus_grad_hat(&fh);
            let (gx, gy) = self.torus_inverse_pair(&a, &b);
            [gx, gy]
        } else {
            let fr = self.d_r(f);
            let (ft, _) = self.d_theta_pair(f, &vec![0.0; f.len()]);
            self.polar_to_cartesian(&fr, &ft)
        }
    }

    pub fn jacobian(&self, v: &VectorField) -> Jacobian {
        if self.torus.is_some() {
            let (f1, f2) = self.torus_forward_pair(v.comp(0), v.comp(1));
            let (a1, b1) = self.torus_grad_hat(&f1);
            let (a2, b2) = self.torus_grad_hat(&f2);
            let (d11, d12) = self.torus_inverse_pair(&a1, &b1);
            let (d21, d22) = self.torus_inverse_pair(&a2, &b2);
            Jacobian { m: [[d11, d12], [d21, d22]] }
        } else {
            let r1 = self.d_r(v.comp(0));
            let r2 = self.d_r(v.comp(1));
            let (t1, t2) = self.d_theta_pair(v.comp(0), v.comp(1));
            let [d11, d12] = self.polar_to_cartesian(&r1, &t1);
            let [d21, d22] = self.polar_to_cartesian(&r2, &t2);
            Jacobian { m: [[d11, d12], [d21, d22]] }
        }
    }

    pub fn divergence(&self, v: &VectorField) -> Vec<f64> {
        let j = self.jacobian(v);
        j.m[0][0].iter().zip(&j.m[1][1]).map(|(a, b)| a + b).collect()
    }

    pub fn curl(&self, v: &VectorField) -> Vec<f64> {
        let j = self.jacobian(v);
        j.m[1][0].iter().zip(&j.m[0][1]).map(|(a, b)| a - b).collect()
    }
}
