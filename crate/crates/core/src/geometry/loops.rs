use super::{Domain, PointEvaluator, VectorField};
use crate::{Error, Result};
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// A circle used as a homology generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomologyLoop {
    pub center: [f64; 2],
    pub radius: f64,
    /// `+1` counter-clockwise, `-1` clockwise.
    pub orientation: f64,
    /// Number of quadrature intervals `M`.
    pub nodes: usize,
}

impl HomologyLoop {
    pub fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }

    /// Quadrature nodes `k = 0..=M`; the first and last coincide.
    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..=self.nodes)
            .map(|k| {
                let t = 2.0 * PI * (k % self.nodes) as f64 / self.nodes as f64;
                [self.center[0] + self.radius * t.cos(), self.center[1] + self.radius * t.sin()]
            })
            .collect()
    }

    /// Unit tangent at node `k`.
    pub fn tangent(&self, k: usize) -> [f64; 2] {
        let t = 2.0 * PI * k as f64 / self.nodes as f64;
        [-self.orientation * t.sin(), self.orientation * t.cos()]
    }

    /// Whether the circle stays strictly inside the domain.
    pub fn inside(&self, domain: &Domain) -> bool {
        let c = self.center[0].hypot(self.center[1]);
        let (near, far) = ((c - self.radius).abs(), c + self.radius);
        if self.radius <= 0.0 || self.nodes < 3 {
            return false;
        }
        match *domain {
            Domain::Torus { .. } => true,
            Domain::Disk { radius } => far < radius,
            Domain::Annulus { r_in, r_out } => far < r_out && near > r_in,
        }
    }
}

/// `∮ v·τ dσ` by the trapezoid rule on the loop nodes.
pub fn circulation(v: &VectorField, lp: &HomologyLoop) -> Result<f64> {
    if !lp.inside(v.grid().domain()) {
        return Err(Error::LoopOutsideDomain);
    }
    let e = PointEvaluator::from_vector(v);
    let pts = lp.points();
    let ds = lp.length() / lp.nodes as f64;
    let mut acc = 0.0;
    for k in 0..lp.nodes {
        let val = e.eval2(pts[k]);
        let t = lp.tangent(k);
        acc += (val[0] * t[0] + val[1] * t[1]) * ds;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::super::{make_grid, ScalarField};
    use super::*;

    fn annulus(n1: usize) -> alloc::sync::Arc<super::super::Grid2D> {
        make_grid(Domain::annulus(0.5, 1.5).unwrap(), (n1, 64)).unwrap()
    }

    #[test]
    fn closed_loop() {
        let lp = HomologyLoop { center: [0.0, 0.0], radius: 1.0, orientation: 1.0, nodes: 16 };
        let p = lp.points();
        assert_eq!(p.first(), p.last());
    }

    #[test]
    fn constant_field_has_no_circulation() {
        let g = annulus(48);
        let v = VectorField::from_fn(&g, |_, _| [0.3, -1.2]);
        let lp = g.domain().loops(64)[0];
        assert!(circulation(&v, &lp).unwrap().abs() < 1e-12);
    }

    #[test]
    fn winding_field() {
        // 49 rings put a node exactly on r = 1
        let g = annulus(49);
        let v = VectorField::from_fn(&g, |x, y| [-y / (x * x + y * y), x / (x * x + y * y)]);
        let lp = HomologyLoop { center: [0.0, 0.0], radius: 1.0, orientation: 1.0, nodes: 64 };
        assert!((circulation(&v, &lp).unwrap() - 2.0 * PI).abs() < 1e-10);
        let back = HomologyLoop { orientation: -1.0, ..lp };
        assert!((circulation(&v, &back).unwrap() + 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn gradients_have_no_circulation() {
        let g = annulus(48);
        let phi = ScalarField::from_fn(&g, |x, y| (x * y).sin() + x * x);
        let v = VectorField::from_fn(&g, |x, y| [y * (x * y).cos() + 2.0 * x, x * (x * y).cos()]);
        let lp = g.domain().loops(64)[0];
        assert!(circulation(&v, &lp).unwrap().abs() < 1e-10);
        assert!(circulation(&phi.gradient(), &lp).unwrap().abs() < 1e-8);
    }

    #[test]
    fn loop_outside() {
        let g = annulus(48);
        let v = VectorField::zeros(&g);
        let lp = HomologyLoop { center: [0.0, 0.0], radius: 0.4, orientation: 1.0, nodes: 16 };
        assert_eq!(circulation(&v, &lp), Err(Error::LoopOutsideDomain));
    }
}
