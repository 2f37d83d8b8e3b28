use super::Grid2D;
use crate::{Error, Result};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

fn check(a: &Grid2D, b: &Grid2D) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Nodal values of a scalar function.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid2D>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Arc<Grid2D>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count does not match the grid");
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        Self::new(grid, vec![0.0; grid.len()])
    }

    pub fn from_fn(grid: &Arc<Grid2D>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid.x().iter().zip(grid.y()).map(|(&x, &y)| f(x, y)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v * w).sum()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.domain().area()
    }

    /// `∫ |f|`.
    pub fn l1(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v.abs() * w).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self::new(&self.grid, values))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(&self.grid, self.values.iter().map(|v| a * v).collect())
    }

    pub fn shift(&self, c: f64) -> Self {
        Self::new(&self.grid, self.values.iter().map(|v| v + c).collect())
    }

    pub fn gradient(&self) -> VectorField {
        let [gx, gy] = self.grid.gradient(&self.values);
        VectorField::new(&self.grid, gx, gy)
    }

    /// Boundary values at the boundary nodes (disk/annulus).
    pub fn trace(&self) -> Result<BoundaryTrace> {
        BoundaryTrace::from_nodes(&self.grid, |k| self.values[k])
    }
}

/// Nodal values of a vector field, stored component-wise in Cartesian
/// components on every grid.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<Grid2D>,
    comps: [Vec<f64>; 2],
}

impl VectorField {
    pub fn new(grid: &Arc<Grid2D>, c1: Vec<f64>, c2: Vec<f64>) -> Self {
        assert!(c1.len() == grid.len() && c2.len() == grid.len(), "value count does not match the grid");
        Self { grid: grid.clone(), comps: [c1, c2] }
    }

    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        Self::new(grid, vec![0.0; grid.len()], vec![0.0; grid.len()])
    }

    pub fn from_fn(grid: &Arc<Grid2D>, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let (mut a, mut b) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
        for (&x, &y) in grid.x().iter().zip(grid.y()) {
            let v = f(x, y);
            a.push(v[0]);
            b.push(v[1]);
        }
        Self::new(grid, a, b)
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn comp(&self, i: usize) -> &[f64] {
        &self.comps[i]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.comps[i]
    }

    pub fn at(&self, idx: usize) -> [f64; 2] {
        [self.comps[0][idx], self.comps[1][idx]]
    }

    pub fn component(&self, i: usize) -> ScalarField {
        ScalarField::new(&self.grid, self.comps[i].clone())
    }

    pub fn into_comps(self) -> [Vec<f64>; 2] {
        self.comps
    }

    /// Largest pointwise Euclidean length.
    pub fn max_abs(&self) -> f64 {
        self.comps[0].iter().zip(&self.comps[1]).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// Largest absolute value over both components.
    pub fn max_component(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ |f|²`.
    pub fn energy(&self) -> f64 {
        let w = self.grid.weights();
        (0..self.grid.len()).map(|k| w[k] * (self.comps[0][k].powi(2) + self.comps[1][k].powi(2))).sum()
    }

    pub fn means(&self) -> [f64; 2] {
        let area = self.grid.domain().area();
        let w = self.grid.weights();
        let m = |c: &Vec<f64>| c.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / area;
        [m(&self.comps[0]), m(&self.comps[1])]
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check(&self.grid, &other.grid)?;
        let f = |i: usize| self.comps[i].iter().zip(&other.comps[i]).map(|(x, y)| a * x + b * y).collect();
        Ok(Self::new(&self.grid, f(0), f(1)))
    }

    pub fn scale(&self, a: f64) -> Self {
        let f = |i: usize| self.comps[i].iter().map(|v| a * v).collect();
        Self::new(&self.grid, f(0), f(1))
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &Self) -> Result<ScalarField> {
        check(&self.grid, &other.grid)?;
        let v = (0..self.grid.len())
            .map(|k| self.comps[0][k] * other.comps[0][k] + self.comps[1][k] * other.comps[1][k])
            .collect();
        Ok(ScalarField::new(&self.grid, v))
    }

    pub fn divergence(&self) -> ScalarField {
        ScalarField::new(&self.grid, self.grid.divergence(self))
    }

    /// Scalar curl `∂1 f2 − ∂2 f1`.
    pub fn curl(&self) -> ScalarField {
        ScalarField::new(&self.grid, self.grid.curl(self))
    }

    pub fn jacobian(&self) -> super::Jacobian {
        self.grid.jacobian(self)
    }

    /// Normal component at the boundary nodes.
    pub fn normal_trace(&self) -> Result<BoundaryTrace> {
        let g = self.grid.clone();
        let n2 = g.resolution().1;
        let (n1, _) = g.resolution();
        BoundaryTrace::from_components(&g, |c, j| {
            let ring = if c == 0 { n1 - 1 } else { 0 };
            let k = ring * n2 + j;
            let n = g.normal(c, j);
            self.comps[0][k] * n[0] + self.comps[1][k] * n[1]
        })
    }

    /// Discrete surrogate norm `sup|f| + sup|∇f|` (Euclidean and Frobenius).
    pub fn surrogate_norm(&self) -> f64 {
        let j = self.jacobian();
        let mut g = 0.0f64;
        for k in 0..self.grid.len() {
            let s = j.m[0][0][k].powi(2) + j.m[0][1][k].powi(2) + j.m[1][0][k].powi(2) + j.m[1][1][k].powi(2);
            g = g.max(s.sqrt());
        }
        self.max_abs() + g
    }
}

/// Values on the boundary rings: outer ring first, then the inner ring of the
/// annulus, each indexed by angle.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    grid: Arc<Grid2D>,
    comps: Vec<Vec<f64>>,
}

impl BoundaryTrace {
    pub fn zeros(grid: &Arc<Grid2D>) -> Result<Self> {
        Self::from_components(grid, |_, _| 0.0)
    }

    /// Build from `f(component, angle_index)`.
    pub fn from_components(grid: &Arc<Grid2D>, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let comps = grid.boundary_components();
        if comps.is_empty() {
            return Err(Error::NoBoundary);
        }
        let n2 = grid.resolution().1;
        let comps = (0..comps.len()).map(|c| (0..n2).map(|j| f(c, j)).collect()).collect();
        Ok(Self { grid: grid.clone(), comps })
    }

    /// Build from a function of the global node index.
    pub fn from_nodes(grid: &Arc<Grid2D>, f: impl Fn(usize) -> f64) -> Result<Self> {
        let idx = grid.boundary_components();
        Self::from_components(grid, |c, j| f(idx[c][j]))
    }

    /// Build from a function of position and outward normal.
    pub fn from_fn(grid: &Arc<Grid2D>, f: impl Fn([f64; 2], [f64; 2]) -> f64) -> Result<Self> {
        let idx = grid.boundary_components();
        Self::from_components(grid, |c, j| f(grid.point(idx[c][j]), grid.normal(c, j)))
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn num_components(&self) -> usize {
        self.comps.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∮ b` by the trapezoid rule (spectral on circles).
    pub fn integral(&self) -> f64 {
        self.weighted(|v| v)
    }

    pub fn l1(&self) -> f64 {
        self.weighted(|v| v.abs())
    }

    fn weighted(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n2 = self.grid.resolution().1;
        let dt = 2.0 * PI / n2 as f64;
        self.comps
            .iter()
            .enumerate()
            .map(|(c, v)| self.grid.boundary_radius(c) * dt * v.iter().map(|x| f(*x)).sum::<f64>())
            .sum()
    }

    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check(&self.grid, &other.grid)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Ok(Self { grid: self.grid.clone(), comps })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        let comps = self.comps.iter().map(|x| x.iter().map(|v| a * v).collect()).collect();
        Self { grid: self.grid.clone(), comps }
    }
}
