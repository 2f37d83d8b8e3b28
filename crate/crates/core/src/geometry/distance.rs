use super::Domain;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Highest derivative order of the signed distance that is evaluated.
pub const S_MAX: usize = 8;

/// Angular samples used to bound the norm of a symmetric tensor.
const NORM_SAMPLES: usize = 4096;

/// A symmetric 2-tensor of order `s`, stored by its distinct entries:
/// `comps[m] = ∂1^{s−m} ∂2^m ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    pub order: usize,
    pub comps: Vec<f64>,
}

impl SymTensor {
    /// Entry for an index tuple (values 0 or 1).
    pub fn entry(&self, idx: &[usize]) -> f64 {
        self.comps[idx.iter().filter(|&&i| i == 1).count()]
    }

    /// Multilinear action `T{v_1, …, v_s}`. By symmetry only the number of
    /// second-coordinate slots matters, so the sum over index tuples is the
    /// coefficient list of `Π (v_i[0] + v_i[1] z)` dotted with `comps`.
    pub fn apply(&self, vs: &[[f64; 2]]) -> f64 {
        assert_eq!(vs.len(), self.order);
        let mut e = vec![0.0; self.order + 1];
        e[0] = 1.0;
        for (k, v) in vs.iter().enumerate() {
            for m in (0..=k + 1).rev() {
                let hi = if m > 0 { e[m - 1] * v[1] } else { 0.0 };
                e[m] = e[m] * v[0] + hi;
            }
        }
        e.iter().zip(&self.comps).map(|(a, b)| a * b).sum()
    }

    /// Upper bound on `sup_{|v|=1} |T{v,…,v}|` (which equals the multilinear
    /// operator norm for symmetric tensors). The sampled maximum of the
    /// degree-`s` trigonometric polynomial is inflated by the Bernstein
    /// bound on its second derivative.
    pub fn norm(&self) -> f64 {
        let s = self.order;
        let binom: Vec<f64> = (0..=s).map(|m| binomial_f64(s, m)).collect();
        let mut best = 0.0f64;
        for k in 0..NORM_SAMPLES {
            let phi = 2.0 * PI * k as f64 / NORM_SAMPLES as f64;
            let (c, sn) = (phi.cos(), phi.sin());
            let mut v = 0.0;
            for m in 0..=s {
                v += binom[m] * self.comps[m] * c.powi((s - m) as i32) * sn.powi(m as i32);
            }
            best = best.max(v.abs());
        }
        let d = 2.0 * PI / NORM_SAMPLES as f64;
        let slack = (s * s) as f64 * d * d / 8.0;
        best / (1.0 - slack)
    }
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Derivatives of `|x|` up to order `s` at `x ≠ 0`, by the Taylor recurrence
/// for `sqrt` of the quadratic `|x + h|²`.
fn norm_derivatives(x: [f64; 2], s: usize) -> Vec<SymTensor> {
    // g[a][b] = Taylor coefficient of h1^a h2^b
    let n = s + 1;
    let mut q = vec![vec![0.0; n]; n];
    q[0][0] = x[0] * x[0] + x[1] * x[1];
    if n > 1 {
        q[1][0] = 2.0 * x[0];
        q[0][1] = 2.0 * x[1];
    }
    if n > 2 {
        q[2][0] = 1.0;
        q[0][2] = 1.0;
    }
    let mut g = vec![vec![0.0; n]; n];
    g[0][0] = q[0][0].sqrt();
    for tot in 1..=s {
        for a in 0..=tot {
            let b = tot - a;
            let mut acc = q[a][b];
            for i in 0..=a {
                for j in 0..=b {
                    if (i == 0 && j == 0) || (i == a && j == b) {
                        continue;
                    }
                    acc -= g[i][j] * g[a - i][b - j];
                }
            }
            g[a][b] = acc / (2.0 * g[0][0]);
        }
    }
    let mut fact = vec![1.0; n];
    for k in 1..n {
        fact[k] = fact[k - 1] * k as f64;
    }
    (0..=s)
        .map(|order| SymTensor {
            order,
            comps: (0..=order).map(|m| fact[order - m] * fact[m] * g[order - m][m]).collect(),
        })
        .collect()
}

/// The signed distance to the boundary (negative inside) with its derivative
/// tensors on the boundary collar.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDistance {
    domain: Domain,
    s_max: usize,
    c_rho: f64,
    c_rho_fit: f64,
}

impl SignedDistance {
    pub fn new(domain: Domain) -> Result<Self> {
        Self::with_order(domain, S_MAX)
    }

    pub fn with_order(domain: Domain, s_max: usize) -> Result<Self> {
        if domain.is_torus() {
            return Err(Error::NoBoundary);
        }
        let mut sd = Self { domain, s_max, c_rho: 1.0, c_rho_fit: 1.0 };
        sd.c_rho_fit = sd.fit_constant();
        // ∇^s|x| decays like s!·|x|^{1−s}, so beyond the fitted orders the
        // constant is governed by the distance of the collar to the origin.
        sd.c_rho = sd.c_rho_fit.max(1.0 / sd.min_collar_radius());
        Ok(sd)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    /// Analyticity constant: `‖∇^s ρ‖ ≤ c_ρ^s s!` on the collar for all `s`.
    pub fn c_rho(&self) -> f64 {
        self.c_rho
    }

    /// Smallest constant fitting the brute-force maxima for `1 ≤ s ≤ s_max`.
    pub fn c_rho_fit(&self) -> f64 {
        self.c_rho_fit
    }

    fn min_collar_radius(&self) -> f64 {
        match self.domain {
            Domain::Disk { radius } => radius - self.domain.collar_width(),
            Domain::Annulus { r_in, .. } => r_in,
            Domain::Torus { .. } => unreachable!(),
        }
    }

    /// Collar radial ranges with the sign of `ρ` as a function of `|x|`.
    fn collars(&self) -> Vec<(f64, f64, f64)> {
        let w = self.domain.collar_width();
        match self.domain {
            Domain::Disk { radius } => vec![(radius - w, radius, 1.0)],
            Domain::Annulus { r_in, r_out } => vec![(r_out - w, r_out, 1.0), (r_in, r_in + w, -1.0)],
            Domain::Torus { .. } => Vec::new(),
        }
    }

    /// `ρ(x)` on the collar.
    pub fn value(&self, x: [f64; 2]) -> Result<f64> {
        let (sign, offset) = self.locate(x)?;
        Ok(sign * x[0].hypot(x[1]) - offset)
    }

    fn locate(&self, x: [f64; 2]) -> Result<(f64, f64)> {
        let r = x[0].hypot(x[1]);
        let eps = 1e-12;
        for (lo, hi, sign) in self.collars() {
            if r >= lo - eps && r <= hi + eps {
                let offset = if sign > 0.0 { hi } else { -lo };
                return Ok((sign, offset));
            }
        }
        let dist = match self.domain {
            Domain::Disk { radius } => radius - r,
            Domain::Annulus { r_in, r_out } => (r - r_in).abs().min((r_out - r).abs()),
            Domain::Torus { .. } => 0.0,
        };
        Err(Error::OutOfCollar(dist))
    }

    /// `∇^s ρ(x)` for `x` in the collar and `s ≤ s_max`.
    pub fn derivs(&self, x: [f64; 2], s: usize) -> Result<SymTensor> {
        if s > self.s_max {
            return Err(Error::OrderTooLarge { order: s, cap: self.s_max });
        }
        let (sign, offset) = self.locate(x)?;
        let mut t = norm_derivatives(x, s).pop().unwrap();
        for c in t.comps.iter_mut() {
            *c *= sign;
        }
        if s == 0 {
            t.comps[0] -= offset;
        }
        Ok(t)
    }

    /// Brute-force `max_collar ‖∇^s ρ‖` for `s = 0..=s_max`.
    pub fn collar_maxima(&self, s_max: usize) -> Vec<f64> {
        let mut best = vec![0.0f64; s_max + 1];
        for (lo, hi, _) in self.collars() {
            for i in 0..=32 {
                let r = lo + (hi - lo) * i as f64 / 32.0;
                for a in 0..4 {
                    let phi = 0.3 + a as f64 * PI / 2.0;
                    let ts = norm_derivatives([r * phi.cos(), r * phi.sin()], s_max);
                    for (s, t) in ts.iter().enumerate().skip(1) {
                        best[s] = best[s].max(t.norm());
                    }
                }
            }
        }
        best
    }

    fn fit_constant(&self) -> f64 {
        let m = self.collar_maxima(self.s_max);
        let mut c = 1.0f64;
        let mut fact = 1.0;
        for (s, ms) in m.iter().enumerate().skip(1) {
            fact *= s as f64;
            c = c.max((ms / fact).powf(1.0 / s as f64));
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn apply_matches_tuple_sum() {
        let t = SymTensor { order: 4, comps: vec![1.0, -2.0, 0.5, 3.0, -1.5] };
        let vs = [[0.3, -1.2], [2.0, 0.7], [-0.4, 0.9], [1.1, 0.2]];
        let mut brute = 0.0;
        for mask in 0..16usize {
            let idx: Vec<usize> = (0..4).map(|k| (mask >> k) & 1).collect();
            brute += t.entry(&idx) * (0..4).map(|k| vs[k][idx[k]]).product::<f64>();
        }
        assert_abs_diff_eq!(t.apply(&vs), brute, epsilon = 1e-13);
    }

    #[test]
    fn normal_and_hessian() {
        let sd = SignedDistance::new(Domain::disk(1.0).unwrap()).unwrap();
        let n = sd.derivs([1.0, 0.0], 1).unwrap();
        assert_abs_diff_eq!(n.comps[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.comps[1], 0.0, epsilon = 1e-14);
        let h = sd.derivs([0.0, 1.0], 2).unwrap();
        assert_abs_diff_eq!(h.entry(&[0, 0]), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.entry(&[0, 1]), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.entry(&[1, 1]), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sd.value([0.6, 0.8]).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_third_derivative() {
        // ∂1³|x| = 3 x1 x2² / |x|^5 · (−1) ... checked via finite differences
        let x = [0.7, -0.4];
        let t = norm_derivatives(x, 3);
        let f = |a: f64, b: f64| (a * a + b * b).sqrt();
        let h = 1e-3;
        let d2 = |a: f64, b: f64| (f(a + h, b) - 2.0 * f(a, b) + f(a - h, b)) / (h * h);
        let d3 = (d2(x[0] + h, x[1]) - d2(x[0] - h, x[1])) / (2.0 * h);
        assert!((t[3].comps[0] - d3).abs() < 1e-5);
    }

    #[test]
    fn annulus_inner_collar_points_inward() {
        let sd = SignedDistance::new(Domain::annulus(0.5, 1.5).unwrap()).unwrap();
        let n = sd.derivs([0.5, 0.0], 1).unwrap();
        assert_abs_diff_eq!(n.comps[0], -1.0, epsilon = 1e-14);
        assert!(sd.value([0.6, 0.0]).unwrap() < 0.0);
        assert!(matches!(sd.derivs([1.0, 0.0], 1), Err(Error::OutOfCollar(_))));
        assert!(matches!(SignedDistance::new(Domain::torus(1.0).unwrap()), Err(Error::NoBoundary)));
    }

    #[test]
    fn disk_constant_is_two() {
        let sd = SignedDistance::new(Domain::disk(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(sd.c_rho(), 2.0, epsilon = 1e-12);
        assert!(sd.c_rho_fit() <= 2.0);
        let m = sd.collar_maxima(S_MAX);
        let mut fact = 1.0;
        for s in 1..=S_MAX {
            fact *= s as f64;
            assert!(m[s] <= 2f64.powi(s as i32) * fact, "s = {s}");
        }
    }
}
