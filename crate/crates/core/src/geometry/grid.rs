use super::Domain;
use crate::elliptic::PolarSolver;
use crate::fd::{fornberg, gauss3};
use crate::fft::{wavenumber, Fft2, FftPlan};
use crate::{Error, Result};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Width of the radial first-derivative stencil (fourth order).
pub(crate) const DERIV_WIDTH: usize = 5;
/// Width of the radial interpolation stencil (cubic).
pub(crate) const INTERP_WIDTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Radial order of the Poisson solvers on disk and annulus (2 or 4).
    /// Order 4 matches the derivative operators; with order 2 the boundary
    /// rows leave a first-order divergence defect after projection.
    pub elliptic_order: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { elliptic_order: 4 }
    }
}

/// Uniform radial node layout on disk and annulus.
///
/// Nodes are addressed by a virtual index `v`; on the disk negative indices
/// are parity ghosts, `v = -1 - k` standing for ring `k` seen through the
/// origin (angle shifted by π).
#[derive(Debug, Clone, PartialEq)]
pub struct Radial {
    pub n: usize,
    pub h: f64,
    pub disk: bool,
    start: f64,
}

impl Radial {
    fn new(domain: &Domain, n: usize) -> Self {
        match *domain {
            Domain::Disk { radius } => {
                let h = 2.0 * radius / (2.0 * n as f64 - 1.0);
                Self { n, h, disk: true, start: 0.5 * h }
            }
            Domain::Annulus { r_in, r_out } => Self { n, h: (r_out - r_in) / (n as f64 - 1.0), disk: false, start: r_in },
            Domain::Torus { .. } => unreachable!(),
        }
    }

    pub fn position(&self, v: isize) -> f64 {
        self.start + v as f64 * self.h
    }

    /// Physical ring behind a virtual index, and whether it is mirrored.
    pub fn node(&self, v: isize) -> (usize, bool) {
        if v >= 0 {
            (v as usize, false)
        } else {
            debug_assert!(self.disk);
            ((-v - 1) as usize, true)
        }
    }

    fn clamp_lo(&self, lo: isize, width: usize) -> isize {
        let hi_max = self.n as isize - width as isize;
        let lo = lo.min(hi_max);
        if self.disk {
            lo
        } else {
            lo.max(0)
        }
    }

    /// First index of a `width`-point stencil centred at ring `i`.
    pub fn window(&self, i: usize, width: usize) -> isize {
        self.clamp_lo(i as isize - (width as isize - 1) / 2, width)
    }

    /// First index of a `width`-point stencil around radius `r`.
    pub fn window_at(&self, r: f64, width: usize) -> isize {
        let v = ((r - self.start) / self.h).floor() as isize;
        self.clamp_lo(v - (width as isize / 2 - 1), width)
    }

    /// Weights `[deriv][k]` for the stencil starting at `lo`.
    pub fn weights(&self, x0: f64, lo: isize, width: usize, deriv: usize) -> Vec<Vec<f64>> {
        let xs: Vec<f64> = (0..width as isize).map(|k| self.position(lo + k)).collect();
        fornberg(x0, &xs, deriv)
    }

    /// Stencil `(ring, mirrored, weight)` for derivative `deriv` at ring `i`.
    pub fn stencil(&self, i: usize, width: usize, deriv: usize) -> Vec<(usize, bool, f64)> {
        let lo = self.window(i, width);
        let w = self.weights(self.position(i as isize), lo, width, deriv);
        (0..width)
            .map(|k| {
                let (node, mirrored) = self.node(lo + k as isize);
                (node, mirrored, w[deriv][k])
            })
            .collect()
    }

    /// Weights of the fourth-order radial quadrature `∫ r F(r) dr` in terms
    /// of the ring values of the angular mean `F`.
    fn quadrature(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n];
        let mut intervals: Vec<(f64, f64, isize)> = Vec::new();
        if self.disk {
            intervals.push((0.0, self.position(0), -1));
        }
        for v in 0..(self.n as isize - 1) {
            intervals.push((self.position(v), self.position(v + 1), v));
        }
        for (a, b, v) in intervals {
            let lo = self.clamp_lo(v - 1, INTERP_WIDTH);
            for (x, gw) in gauss3(a, b) {
                let lw = self.weights(x, lo, INTERP_WIDTH, 0);
                for k in 0..INTERP_WIDTH {
                    let vv = lo + k as isize;
                    let (node, _) = self.node(vv);
                    // the integrand r·F(r) is odd through the origin
                    w[node] += gw * lw[0][k] * self.position(vv);
                }
            }
        }
        w
    }
}

#[derive(Debug, Clone)]
pub(crate) struct TorusOps {
    pub fft: Fft2,
    /// Wavenumbers per axis.
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    /// Same with the Nyquist entry zeroed, used for odd derivatives.
    pub kd1: Vec<f64>,
    pub kd2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct PolarOps {
    pub radial: Radial,
    pub fft: FftPlan,
    pub m: Vec<f64>,
    pub md: Vec<f64>,
    pub d1: Vec<Vec<(usize, bool, f64)>>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub solver: PolarSolver,
}

/// A tensor-product grid on one of the domains.
///
/// Node `(i, j)` is stored at `i * n2 + j`. On the torus `i` indexes `x1`
/// and `j` indexes `x2`; on disk and annulus `i` is the ring (inner to
/// outer) and `j` the angle.
#[derive(Debug, Clone)]
pub struct Grid2D {
    domain: Domain,
    n1: usize,
    n2: usize,
    options: GridOptions,
    axis1: Vec<f64>,
    axis2: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    weights: Vec<f64>,
    pub(crate) torus: Option<TorusOps>,
    pub(crate) polar: Option<PolarOps>,
}

pub fn make_grid(domain: Domain, resolution: (usize, usize)) -> Result<Arc<Grid2D>> {
    make_grid_with(domain, resolution, GridOptions::default())
}

pub fn make_grid_with(domain: Domain, resolution: (usize, usize), options: GridOptions) -> Result<Arc<Grid2D>> {
    domain.validate()?;
    let (n1, n2) = resolution;
    let bad = |reason| Err(Error::InvalidResolution { n1, n2, reason });
    if n1 < 8 || n2 < 8 {
        return bad("each resolution component must be at least 8");
    }
    if n2 % 2 != 0 || (domain.is_torus() && n1 % 2 != 0) {
        return bad("periodic directions need an even node count");
    }
    if !matches!(options.elliptic_order, 2 | 4) {
        return Err(Error::InvalidArgument("elliptic order must be 2 or 4"));
    }
    let mut xs = vec![0.0; n1 * n2];
    let mut ys = vec![0.0; n1 * n2];
    let mut weights = vec![0.0; n1 * n2];
    let (axis1, axis2, torus, polar);
    match domain {
        Domain::Torus { period } => {
            axis1 = (0..n1).map(|i| period * i as f64 / n1 as f64).collect::<Vec<_>>();
            axis2 = (0..n2).map(|j| period * j as f64 / n2 as f64).collect::<Vec<_>>();
            let cell = period * period / (n1 * n2) as f64;
            for i in 0..n1 {
                for j in 0..n2 {
                    xs[i * n2 + j] = axis1[i];
                    ys[i * n2 + j] = axis2[j];
                    weights[i * n2 + j] = cell;
                }
            }
            let scale = 2.0 * PI / period;
            let k = |n: usize, zero_nyq: bool| -> Vec<f64> {
                (0..n)
                    .map(|j| if zero_nyq && 2 * j == n { 0.0 } else { scale * wavenumber(j, n) as f64 })
                    .collect()
            };
            torus = Some(TorusOps { fft: Fft2::new(n1, n2), k1: k(n1, false), k2: k(n2, false), kd1: k(n1, true), kd2: k(n2, true) });
            polar = None;
        }
        Domain::Disk { .. } | Domain::Annulus { .. } => {
            let radial = Radial::new(&domain, n1);
            axis1 = (0..n1).map(|i| radial.position(i as isize)).collect::<Vec<_>>();
            axis2 = (0..n2).map(|j| 2.0 * PI * j as f64 / n2 as f64).collect::<Vec<_>>();
            let ring_weights = radial.quadrature();
            let dtheta = 2.0 * PI / n2 as f64;
            let cos: Vec<f64> = axis2.iter().map(|t| t.cos()).collect();
            let sin: Vec<f64> = axis2.iter().map(|t| t.sin()).collect();
            for i in 0..n1 {
                for j in 0..n2 {
                    xs[i * n2 + j] = axis1[i] * cos[j];
                    ys[i * n2 + j] = axis1[i] * sin[j];
                    weights[i * n2 + j] = ring_weights[i] * dtheta;
                }
            }
            let m: Vec<f64> = (0..n2).map(|j| wavenumber(j, n2) as f64).collect();
            let md = (0..n2).map(|j| if 2 * j == n2 { 0.0 } else { m[j] }).collect();
            let d1 = (0..n1).map(|i| radial.stencil(i, DERIV_WIDTH, 1)).collect();
            let solver = PolarSolver::build(&radial, &ring_weights, n2, options.elliptic_order)?;
            polar = Some(PolarOps { radial, fft: FftPlan::new(n2), m, md, d1, cos, sin, solver });
            torus = None;
        }
    }
    Ok(Arc::new(Grid2D { domain, n1, n2, options, axis1, axis2, xs, ys, weights, torus, polar }))
}

impl Grid2D {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn options(&self) -> GridOptions {
        self.options
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Torus: `x1` coordinates; disk/annulus: ring radii.
    pub fn axis1(&self) -> &[f64] {
        &self.axis1
    }

    /// Torus: `x2` coordinates; disk/annulus: angles.
    pub fn axis2(&self) -> &[f64] {
        &self.axis2
    }

    pub fn x(&self) -> &[f64] {
        &self.xs
    }

    pub fn y(&self) -> &[f64] {
        &self.ys
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.xs[idx], self.ys[idx]]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Radial layout (disk and annulus only).
    pub fn radial(&self) -> Option<&Radial> {
        self.polar.as_ref().map(|p| &p.radial)
    }

    /// Smallest node spacing, used by the CFL rule.
    pub fn h_min(&self) -> f64 {
        match self.domain {
            Domain::Torus { period } => period / self.n1.max(self.n2) as f64,
            _ => {
                let p = self.polar.as_ref().unwrap();
                p.radial.h.min(self.axis1[0] * 2.0 * PI / self.n2 as f64)
            }
        }
    }

    /// Radial spacing on disk/annulus, grid spacing on the torus.
    pub fn h(&self) -> f64 {
        match self.domain {
            Domain::Torus { period } => period / self.n1 as f64,
            _ => self.polar.as_ref().unwrap().radial.h,
        }
    }

    /// Node indices on each boundary component: outer ring first, then the
    /// inner ring of the annulus. Empty on the torus.
    pub fn boundary_components(&self) -> Vec<Vec<usize>> {
        let ring = |i: usize| (0..self.n2).map(|j| i * self.n2 + j).collect::<Vec<_>>();
        match self.domain {
            Domain::Torus { .. } => Vec::new(),
            Domain::Disk { .. } => vec![ring(self.n1 - 1)],
            Domain::Annulus { .. } => vec![ring(self.n1 - 1), ring(0)],
        }
    }

    /// Outward unit normal at boundary component `c`, angle index `j`.
    pub fn normal(&self, component: usize, j: usize) -> [f64; 2] {
        let p = self.polar.as_ref().expect("normal on the torus");
        let s = if component == 0 { 1.0 } else { -1.0 };
        [s * p.cos[j], s * p.sin[j]]
    }

    /// Ring radius of boundary component `c`.
    pub fn boundary_radius(&self, component: usize) -> f64 {
        if component == 0 {
            self.axis1[self.n1 - 1]
        } else {
            self.axis1[0]
        }
    }

    /// Whether two grids describe the same discretization.
    pub fn same_as(&self, other: &Grid2D) -> bool {
        core::ptr::eq(self, other)
            || (self.domain == other.domain && self.n1 == other.n1 && self.n2 == other.n2 && self.options == other.options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn torus_grid() {
        let g = make_grid(Domain::torus(2.0 * PI).unwrap(), (64, 64)).unwrap();
        assert_eq!(g.len(), 4096);
        let s: f64 = g.weights().iter().sum();
        assert_relative_eq!(s, 4.0 * PI * PI, max_relative = 1e-12);
    }

    #[test]
    fn resolution_errors() {
        let t = Domain::torus(1.0).unwrap();
        assert!(matches!(make_grid(t, (63, 64)), Err(Error::InvalidResolution { .. })));
        assert!(matches!(make_grid(t, (4, 64)), Err(Error::InvalidResolution { .. })));
        assert!(make_grid(Domain::disk(1.0).unwrap(), (9, 16)).is_ok());
    }

    #[test]
    fn disk_grid_boundary_ring() {
        let g = make_grid(Domain::disk(1.0).unwrap(), (64, 128)).unwrap();
        let b = g.boundary_components();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].len(), 128);
        for &k in &b[0] {
            let [x, y] = g.point(k);
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < 1e-14);
        }
        assert!(g.axis1()[0] > 0.0);
        let s: f64 = g.weights().iter().sum();
        assert_relative_eq!(s, PI, max_relative = 1e-12);
    }

    #[test]
    fn annulus_area() {
        let g = make_grid(Domain::annulus(0.5, 1.5).unwrap(), (48, 128)).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert_relative_eq!(s, 2.0 * PI, max_relative = 1e-10);
        assert_eq!(g.boundary_components().len(), 2);
        assert!((g.axis1()[0] - 0.5).abs() < 1e-15 && (g.axis1()[47] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn quadrature_is_fourth_order() {
        // ∫ r^4 over the unit disk = 2π/6
        let err = |n: usize| {
            let g = make_grid(Domain::disk(1.0).unwrap(), (n, 16)).unwrap();
            let s: f64 = g.weights().iter().zip(g.axis1().iter().flat_map(|r| core::iter::repeat(*r).take(16))).map(|(w, r)| w * r.powi(4) * (3.0 * r).cos()).sum();
            s
        };
        let (a, b, c) = (err(16), err(32), err(64));
        let ratio = (a - b).abs() / (b - c).abs();
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn derivative_stencils_reach_through_origin() {
        let g = make_grid(Domain::disk(1.0).unwrap(), (16, 16)).unwrap();
        let st = &g.polar.as_ref().unwrap().d1[0];
        assert!(st.iter().any(|e| e.1));
        let ann = make_grid(Domain::annulus(0.5, 1.0).unwrap(), (16, 16)).unwrap();
        assert!(ann.polar.as_ref().unwrap().d1[0].iter().all(|e| !e.1));
    }
}
