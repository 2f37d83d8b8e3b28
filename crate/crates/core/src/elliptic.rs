//! Poisson solvers.
//!
//! Torus: FFT diagonalization. Disk and annulus: real FFT in angle and, per
//! angular mode, a banded finite-difference operator in radius
//!
//! ```text
//! p'' + p'/r − m² p / r²
//! ```
//!
//! (fourth order by default, second order selectable). Boundary rows carry
//! the Dirichlet value or a one-sided derivative of matching order. On the
//! disk the stencils reach through the origin using the parity
//! `p_m(−r) = (−1)^m p_m(r)`, so no pole condition is needed. The singular `m = 0` Neumann mode is solved as a
//! bordered system: a uniform shift `λ` of the interior rows restores
//! discrete compatibility and the quadrature mean is pinned to zero.

use crate::fd::{BandedLu, DenseLu};
use crate::fft::wavenumber;
use crate::geometry::{BoundaryTrace, Domain, Grid2D, Radial, ScalarField};
use crate::{Error, Result};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Default relative Neumann compatibility threshold.
pub const COMPAT_TOL: f64 = 1e-8;
/// Relative zero-mean threshold for the periodic solver.
pub const MEAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bc {
    Neumann,
    Dirichlet,
}

/// Row `i` of a radial operator as `(column, weight)` pairs.
type Row = Vec<(usize, f64)>;

/// Per-mode factorizations, built once per grid.
#[derive(Debug, Clone)]
pub struct PolarSolver {
    n: usize,
    annulus: bool,
    dirichlet: Vec<BandedLu>,
    neumann: Vec<Option<BandedLu>>,
    neumann0: DenseLu,
}

fn add(row: &mut Row, col: usize, w: f64) {
    if let Some(e) = row.iter_mut().find(|e| e.0 == col) {
        e.1 += w;
    } else {
        row.push((col, w));
    }
}

fn rows(radial: &Radial, m: usize, order: usize, bc: Bc) -> Vec<Row> {
    let n = radial.n;
    let width = order + 1;
    let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
    let boundary = |i: usize| i == n - 1 || (!radial.disk && i == 0);
    (0..n)
        .map(|i| {
            let mut row = Row::new();
            if boundary(i) {
                match bc {
                    Bc::Dirichlet => add(&mut row, i, 1.0),
                    Bc::Neumann => {
                        // outward normal derivative
                        let s = if i == n - 1 { 1.0 } else { -1.0 };
                        for (node, _, w) in radial.stencil(i, width, 1) {
                            add(&mut row, node, s * w);
                        }
                    }
                }
            } else {
                let r = radial.position(i as isize);
                let lo = radial.window(i, width);
                let w = radial.weights(r, lo, width, 2);
                for k in 0..width {
                    let (node, mirrored) = radial.node(lo + k as isize);
                    let sign = if mirrored { parity } else { 1.0 };
                    add(&mut row, node, sign * (w[2][k] + w[1][k] / r));
                }
                add(&mut row, i, -((m * m) as f64) / (r * r));
            }
            row
        })
        .collect()
}

fn banded(rows: &[Row]) -> Result<BandedLu> {
    let n = rows.len();
    let (mut kl, mut ku) = (0, 0);
    for (i, row) in rows.iter().enumerate() {
        for &(j, _) in row {
            if j < i {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
    }
    BandedLu::factor(n, kl, ku, |i, j| rows[i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1))
}

impl PolarSolver {
    pub(crate) fn build(radial: &Radial, ring_weights: &[f64], n2: usize, order: usize) -> Result<Self> {
        let n = radial.n;
        let mut dirichlet = Vec::new();
        let mut neumann = Vec::new();
        for m in 0..=n2 / 2 {
            dirichlet.push(banded(&rows(radial, m, order, Bc::Dirichlet))?);
            neumann.push(if m == 0 { None } else { Some(banded(&rows(radial, m, order, Bc::Neumann))?) });
        }
        // bordered m = 0 system: [A  −e; wᵀ 0]
        let a0 = rows(radial, 0, order, Bc::Neumann);
        let nb = n + 1;
        let mut dense = vec![0.0; nb * nb];
        for (i, row) in a0.iter().enumerate() {
            for &(j, w) in row {
                dense[i * nb + j] = w;
            }
            let boundary = i == n - 1 || (!radial.disk && i == 0);
            if !boundary {
                dense[i * nb + n] = -1.0;
            }
        }
        let wsum: f64 = ring_weights.iter().sum();
        for j in 0..n {
            dense[n * nb + j] = ring_weights[j] / wsum;
        }
        let neumann0 = DenseLu::factor(nb, dense)?;
        Ok(Self { n, annulus: !radial.disk, dirichlet, neumann, neumann0 })
    }

    /// Solve mode by mode. `bdry[c][j]` are the boundary data (outer ring
    /// first). Returns the nodal solution and the `m = 0` shift `λ`.
    fn solve(&self, grid: &Grid2D, f: &[f64], bdry: &[&[f64]], bc: Bc) -> (Vec<f64>, f64) {
        let polar = grid.polar.as_ref().unwrap();
        let (n1, n2) = grid.resolution();
        let n = self.n;
        // angular spectra of f per ring and of the boundary data
        let mut fh = vec![Complex64::new(0.0, 0.0); n1 * n2];
        let mut z = vec![Complex64::new(0.0, 0.0); n2];
        for i in 0..n1 {
            for j in 0..n2 {
                z[j] = Complex64::new(f[i * n2 + j], 0.0);
            }
            polar.fft.forward(&mut z);
            fh[i * n2..(i + 1) * n2].copy_from_slice(&z);
        }
        let bh: Vec<Vec<Complex64>> = bdry
            .iter()
            .map(|b| {
                let mut z: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                polar.fft.forward(&mut z);
                z
            })
            .collect();
        let mut ph = vec![Complex64::new(0.0, 0.0); n1 * n2];
        let mut lambda = 0.0;
        let mut rhs = vec![Complex64::new(0.0, 0.0); n + 1];
        for j in 0..n2 {
            let m = wavenumber(j, n2).unsigned_abs() as usize;
            for i in 0..n {
                rhs[i] = fh[i * n2 + j];
            }
            rhs[n - 1] = bh[0][j];
            if self.annulus {
                rhs[0] = bh[1][j];
            }
            rhs[n] = Complex64::new(0.0, 0.0);
            let sol = match bc {
                Bc::Dirichlet => {
                    self.dirichlet[m].solve_in_place(&mut rhs[..n]);
                    rhs[..n].to_vec()
                }
                Bc::Neumann if m == 0 => {
                    let s = self.neumann0.solve(&rhs);
                    lambda = s[n].re / n2 as f64;
                    s[..n].to_vec()
                }
                Bc::Neumann => {
                    self.neumann[m].as_ref().unwrap().solve_in_place(&mut rhs[..n]);
                    rhs[..n].to_vec()
                }
            };
            for i in 0..n {
                ph[i * n2 + j] = sol[i];
            }
        }
        let mut p = vec![0.0; n1 * n2];
        for i in 0..n1 {
            z.copy_from_slice(&ph[i * n2..(i + 1) * n2]);
            polar.fft.inverse(&mut z);
            for j in 0..n2 {
                p[i * n2 + j] = z[j].re;
            }
        }
        (p, lambda)
    }
}

/// `Δp = f` in Ω, `∂p/∂n = b` on ∂Ω.
#[derive(Debug, Clone)]
pub struct NeumannProblem {
    pub f: ScalarField,
    pub b: BoundaryTrace,
    /// Relative compatibility threshold.
    pub tolerance: f64,
    /// Lower bound on the normalising scale of the compatibility residual.
    pub scale: f64,
}

impl NeumannProblem {
    pub fn new(f: ScalarField, b: BoundaryTrace) -> Result<Self> {
        if !f.grid().same_as(b.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { f, b, tolerance: COMPAT_TOL, scale: 0.0 })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Data derived from a field are nearly cancelling; normalise by the
    /// field size instead of the data size.
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// `∫ f − ∮ b`.
    pub fn compatibility_residual(&self) -> f64 {
        self.f.integral() - self.b.integral()
    }

    /// `|∫ f − ∮ b| / max(‖f‖₁ + ‖b‖₁, scale)`, zero for zero data.
    pub fn relative_residual(&self) -> f64 {
        let scale = (self.f.l1() + self.b.l1()).max(self.scale);
        if scale == 0.0 {
            0.0
        } else {
            self.compatibility_residual().abs() / scale
        }
    }
}

#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub p: ScalarField,
    /// Relative continuous compatibility residual of the data.
    pub compatibility: f64,
    /// Uniform interior shift the discrete system needed.
    pub shift: f64,
}

fn polar_grid(grid: &Arc<Grid2D>) -> Result<&PolarSolver> {
    match grid.polar.as_ref() {
        Some(p) => Ok(&p.solver),
        None => Err(Error::WrongDomain("torus grid, use the periodic solver")),
    }
}

pub fn solve_neumann(problem: &NeumannProblem) -> Result<ScalarField> {
    solve_neumann_detailed(problem).map(|s| s.p)
}

pub fn solve_neumann_detailed(problem: &NeumannProblem) -> Result<NeumannSolution> {
    let grid = problem.f.grid();
    let solver = polar_grid(grid)?;
    let rel = problem.relative_residual();
    if rel > problem.tolerance {
        return Err(Error::IncompatibleData { residual: rel, tolerance: problem.tolerance });
    }
    let comps: Vec<&[f64]> = (0..problem.b.num_components()).map(|c| problem.b.component(c)).collect();
    let (p, shift) = solver.solve(grid, problem.f.values(), &comps, Bc::Neumann);
    Ok(NeumannSolution { p: ScalarField::new(grid, p), compatibility: rel, shift })
}

/// `Δψ = f` in Ω, `ψ = boundary_values` on ∂Ω.
pub fn solve_dirichlet(f: &ScalarField, boundary_values: &BoundaryTrace) -> Result<ScalarField> {
    let grid = f.grid();
    let solver = polar_grid(grid)?;
    if !grid.same_as(boundary_values.grid()) {
        return Err(Error::GridMismatch);
    }
    let comps: Vec<&[f64]> = (0..boundary_values.num_components()).map(|c| boundary_values.component(c)).collect();
    let (p, _) = solver.solve(grid, f.values(), &comps, Bc::Dirichlet);
    Ok(ScalarField::new(grid, p))
}

/// Zero-mean `φ` with `Δφ = f` on the torus.
pub fn solve_periodic_poisson(f: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid();
    let ops = grid.torus.as_ref().ok_or(Error::WrongDomain("periodic solver needs the torus"))?;
    let l1 = f.l1();
    let mean = f.integral();
    if l1 > 0.0 && mean.abs() > MEAN_TOL * l1 {
        return Err(Error::NonzeroMean(f.mean()));
    }
    let n2 = grid.resolution().1;
    let mut fh = grid.torus_forward(f.values());
    for (k, v) in fh.iter_mut().enumerate() {
        let kk = ops.k1[k / n2].powi(2) + ops.k2[k % n2].powi(2);
        *v = if kk == 0.0 { Complex64::new(0.0, 0.0) } else { *v / (-kk) };
    }
    Ok(ScalarField::new(grid, grid.torus_inverse(&fh)))
}

/// Discrete operator residual of a polar solve, for diagnostics.
pub fn laplacian_residual(p: &ScalarField, f: &ScalarField) -> Result<f64> {
    let grid = p.grid();
    if grid.polar.is_none() {
        return Err(Error::WrongDomain("residual check is for disk/annulus"));
    }
    let radial = grid.radial().unwrap();
    let order = grid.options().elliptic_order;
    let (n1, n2) = grid.resolution();
    let polar = grid.polar.as_ref().unwrap();
    let mut worst = 0.0f64;
    let mut z = vec![Complex64::new(0.0, 0.0); n2];
    let mut ph = vec![Complex64::new(0.0, 0.0); n1 * n2];
    let mut fh = vec![Complex64::new(0.0, 0.0); n1 * n2];
    for (src, dst) in [(p.values(), &mut ph), (f.values(), &mut fh)] {
        for i in 0..n1 {
            for j in 0..n2 {
                z[j] = Complex64::new(src[i * n2 + j], 0.0);
            }
            polar.fft.forward(&mut z);
            dst[i * n2..(i + 1) * n2].copy_from_slice(&z);
        }
    }
    for j in 0..n2 {
        let m = wavenumber(j, n2).unsigned_abs() as usize;
        let rs = rows(radial, m, order, Bc::Neumann);
        for (i, row) in rs.iter().enumerate() {
            let boundary = i == n1 - 1 || (!radial.disk && i == 0);
            if boundary {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for &(c, w) in row {
                acc += ph[c * n2 + j] * w;
            }
            worst = worst.max((acc - fh[i * n2 + j]).norm() / n2 as f64);
        }
    }
    Ok(worst)
}

/// Default boundary data helper: `∂_n` of a closed-form function.
pub fn normal_derivative_trace(grid: &Arc<Grid2D>, grad: impl Fn(f64, f64) -> [f64; 2]) -> Result<BoundaryTrace> {
    if let Domain::Torus { .. } = grid.domain() {
        return Err(Error::NoBoundary);
    }
    BoundaryTrace::from_fn(grid, |p, n| {
        let g = grad(p[0], p[1]);
        g[0] * n[0] + g[1] * n[1]
    })
}
