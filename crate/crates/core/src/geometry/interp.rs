use super::grid::INTERP_WIDTH;
use super::{Grid2D, VectorField};
use crate::fft::wavenumber;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Off-grid evaluation of nodal data: trigonometric interpolation on the
/// torus, cubic Lagrange in radius times trigonometric in angle on disk and
/// annulus.
#[derive(Debug, Clone)]
pub struct PointEvaluator {
    grid: Arc<Grid2D>,
    /// Per component: 2D spectrum (torus) or per-ring angular spectra (polar),
    /// normalized so that the series sums to the nodal values.
    coeffs: Vec<Vec<Complex64>>,
}

impl PointEvaluator {
    pub fn new(grid: &Arc<Grid2D>, comps: &[&[f64]]) -> Self {
        let n = grid.len() as f64;
        let (n1, n2) = grid.resolution();
        let coeffs = comps
            .iter()
            .map(|c| {
                if grid.torus.is_some() {
                    grid.torus_forward(c).into_iter().map(|z| z / n).collect()
                } else {
                    let p = grid.polar.as_ref().unwrap();
                    let mut out = Vec::with_capacity(n1 * n2);
                    for i in 0..n1 {
                        let mut z: Vec<Complex64> = c[i * n2..(i + 1) * n2].iter().map(|&v| Complex64::new(v, 0.0)).collect();
                        p.fft.forward(&mut z);
                        out.extend(z.into_iter().map(|v| v / n2 as f64));
                    }
                    out
                }
            })
            .collect();
        Self { grid: grid.clone(), coeffs }
    }

    pub fn from_vector(v: &VectorField) -> Self {
        Self::new(v.grid(), &[v.comp(0), v.comp(1)])
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    /// Linear combination `Σ w_i e_i` of evaluators on the same grid.
    pub fn combine(parts: &[(&PointEvaluator, f64)]) -> Self {
        let first = parts[0].0;
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); first.coeffs[0].len()]; first.coeffs.len()];
        for (e, w) in parts {
            for (dst, src) in coeffs.iter_mut().zip(&e.coeffs) {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * *w;
                }
            }
        }
        Self { grid: first.grid.clone(), coeffs }
    }

    pub fn components(&self) -> usize {
        self.coeffs.len()
    }

    /// Values of all components at `p`.
    pub fn eval(&self, p: [f64; 2]) -> Vec<f64> {
        let (n1, n2) = self.grid.resolution();
        if let super::Domain::Torus { period } = *self.grid.domain() {
            let s = 2.0 * PI / period;
            let e1: Vec<Complex64> = (0..n1).map(|i| Complex64::from_polar(1.0, s * wavenumber(i, n1) as f64 * p[0])).collect();
            let e2: Vec<Complex64> = (0..n2).map(|j| Complex64::from_polar(1.0, s * wavenumber(j, n2) as f64 * p[1])).collect();
            self.coeffs
                .iter()
                .map(|c| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..n1 {
                        let row = &c[i * n2..(i + 1) * n2];
                        let mut s = Complex64::new(0.0, 0.0);
                        for j in 0..n2 {
                            s += row[j] * e2[j];
                        }
                        acc += s * e1[i];
                    }
                    acc.re
                })
                .collect()
        } else {
            let radial = self.grid.radial().unwrap();
            let r = p[0].hypot(p[1]);
            let theta = p[1].atan2(p[0]);
            let lo = radial.window_at(r, INTERP_WIDTH);
            let w = radial.weights(r, lo, INTERP_WIDTH, 0);
            let e: Vec<Complex64> = (0..n2).map(|j| Complex64::from_polar(1.0, wavenumber(j, n2) as f64 * theta)).collect();
            self.coeffs
                .iter()
                .map(|c| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, wk) in w[0].iter().enumerate() {
                        let (node, mirrored) = radial.node(lo + k as isize);
                        let row = &c[node * n2..(node + 1) * n2];
                        let mut s = Complex64::new(0.0, 0.0);
                        for j in 0..n2 {
                            let sign = if mirrored && j % 2 == 1 { -1.0 } else { 1.0 };
                            s += row[j] * e[j] * sign;
                        }
                        acc += s * *wk;
                    }
                    acc.re
                })
                .collect()
        }
    }

    /// First two components at `p`.
    pub fn eval2(&self, p: [f64; 2]) -> [f64; 2] {
        let v = self.eval(p);
        [v[0], v[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::super::{make_grid, Domain, VectorField};
    use super::*;

    #[test]
    fn torus_exact_for_band_limited() {
        let g = make_grid(Domain::torus(2.0 * PI).unwrap(), (16, 16)).unwrap();
        let v = VectorField::from_fn(&g, |x, y| [(3.0 * x - y).sin(), (2.0 * y).cos() + x.cos()]);
        let e = PointEvaluator::from_vector(&v);
        for p in [[0.123, 4.5], [6.0, 0.01], [3.3, 3.3]] {
            let val = e.eval2(p);
            assert!((val[0] - (3.0 * p[0] - p[1]).sin()).abs() < 1e-12);
            assert!((val[1] - (2.0 * p[1]).cos() - p[0].cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_exact_for_linear_fields_including_centre() {
        let g = make_grid(Domain::disk(1.0).unwrap(), (16, 16)).unwrap();
        let v = VectorField::from_fn(&g, |x, y| [-y + 0.5 * x, x]);
        let e = PointEvaluator::from_vector(&v);
        for p in [[0.0, 0.0], [0.01, -0.02], [0.7, 0.3], [-0.2, 0.97]] {
            let val = e.eval2(p);
            assert!((val[0] - (-p[1] + 0.5 * p[0])).abs() < 1e-12, "{p:?}");
            assert!((val[1] - p[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn nodal_values_reproduced() {
        let g = make_grid(Domain::annulus(0.5, 1.0).unwrap(), (12, 16)).unwrap();
        let v = VectorField::from_fn(&g, |x, y| [(x * y).exp(), x * x]);
        let e = PointEvaluator::from_vector(&v);
        for k in [0, 17, 100, 191] {
            let val = e.eval2(g.point(k));
            assert!((val[0] - v.comp(0)[k]).abs() < 1e-12);
        }
    }
}
