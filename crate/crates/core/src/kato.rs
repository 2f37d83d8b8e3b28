//! Numeric evaluation of the symbolic series and the derivative ladder
//! `D^k u`, with an independent finite-difference oracle along
//! characteristics.

use crate::dynamics::{cfl_limit, step_with_tracers, AhtState, DynamicsConfig};
use crate::fd::fornberg;
use crate::geometry::{
    circulation, BoundaryTrace, Domain, Jacobian, PointEvaluator, ScalarField, SignedDistance, SymTensor, VectorField,
};
use crate::hodge::{div_curl_reconstruct, gradient_potential, leray_project, projection_tolerance, DivCurlData, Residuals};
use crate::symbolic::{
    curl_series, div_series, kernel_series, normal_trace_series, Factor, Shape, SymbolicExpr, SERIES_CAP,
};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::ToPrimitive;

/// Where an expression is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locus {
    Interior,
    Boundary,
}

#[derive(Debug, Clone)]
pub enum Evaluated {
    Scalar(ScalarField),
    Vector(VectorField),
    Trace(BoundaryTrace),
}

impl Evaluated {
    pub fn scalar(self) -> Result<ScalarField> {
        match self {
            Evaluated::Scalar(s) => Ok(s),
            _ => Err(Error::MalformedExpr("expected a scalar expression".into())),
        }
    }

    pub fn vector(self) -> Result<VectorField> {
        match self {
            Evaluated::Vector(v) => Ok(v),
            _ => Err(Error::MalformedExpr("expected a vector expression".into())),
        }
    }

    pub fn trace(self) -> Result<BoundaryTrace> {
        match self {
            Evaluated::Trace(t) => Ok(t),
            _ => Err(Error::MalformedExpr("expected a boundary expression".into())),
        }
    }
}

/// `y` and the known ladder `D^0 u, …, D^{k−1} u` with their Jacobians.
#[derive(Debug, Clone)]
pub struct EvalContext {
    y: VectorField,
    grad_y: Jacobian,
    du: Vec<VectorField>,
    grad_du: Vec<Jacobian>,
}

impl EvalContext {
    pub fn new(y: VectorField, u: VectorField) -> Result<Self> {
        if !y.grid().same_as(u.grid()) {
            return Err(Error::GridMismatch);
        }
        let grad_y = y.jacobian();
        let grad_u = u.jacobian();
        Ok(Self { y, grad_y, du: vec![u], grad_du: vec![grad_u] })
    }

    /// Appends the next ladder field.
    pub fn push(&mut self, f: VectorField) {
        self.grad_du.push(f.jacobian());
        self.du.push(f);
    }

    pub fn levels(&self) -> usize {
        self.du.len()
    }

    pub fn field(&self, j: usize) -> Option<&VectorField> {
        self.du.get(j)
    }

    fn check(&self, f: Factor) -> Result<()> {
        match f.order() {
            Some(j) if j >= self.du.len() => Err(Error::MissingFactor(f.token())),
            _ => Ok(()),
        }
    }

    fn matrix(&self, f: Factor, k: usize) -> [[f64; 2]; 2] {
        match f {
            Factor::GradY => self.grad_y.at(k),
            Factor::GradDU(j) => self.grad_du[j].at(k),
            _ => unreachable!("validated"),
        }
    }

    fn vector(&self, f: Factor, k: usize) -> [f64; 2] {
        match f {
            Factor::DU(j) => self.du[j].at(k),
            Factor::Psi(0) => {
                let (y, u) = (self.y.at(k), self.du[0].at(k));
                [y[0] - u[0], y[1] - u[1]]
            }
            // D^j y = 0
            Factor::Psi(j) => {
                let v = self.du[j].at(k);
                [-v[0], -v[1]]
            }
            _ => unreachable!("validated"),
        }
    }
}

fn mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn product(ctx: &EvalContext, fs: &[Factor], k: usize) -> [[f64; 2]; 2] {
    let mut m = ctx.matrix(fs[0], k);
    for &f in &fs[1..] {
        m = mul(m, ctx.matrix(f, k));
    }
    m
}

/// Sums the terms of `expr` on the grid. Traced products give scalar
/// fields, antisymmetrised products the scalar curl `M21 − M12`, boundary
/// forms a boundary trace, kernel products a vector field.
pub fn evaluate_expr(expr: &SymbolicExpr, ctx: &EvalContext, locus: Locus) -> Result<Evaluated> {
    expr.validate()?;
    let grid = ctx.y.grid();
    let n = grid.len();
    let shapes: Vec<Shape> = expr.terms().map(|(m, _)| m.shape).collect();
    for (m, _) in expr.terms() {
        for &f in &m.factors {
            ctx.check(f)?;
        }
    }
    let boundary = shapes.contains(&Shape::Boundary);
    if boundary && locus == Locus::Interior {
        return Err(Error::WrongLocus);
    }
    if !boundary && locus == Locus::Boundary {
        return Err(Error::WrongLocus);
    }
    let kinds = |s: Shape| match s {
        Shape::Trace | Shape::Asym => 0,
        Shape::Vector => 1,
        Shape::Boundary => 2,
        Shape::Matrix => 3,
    };
    if shapes.iter().any(|&s| kinds(s) != kinds(shapes.first().copied().unwrap_or(Shape::Trace))) {
        return Err(Error::MalformedExpr("mixed expression kinds".into()));
    }
    let coeff = |c: &num_bigint::BigInt| c.to_f64().unwrap_or(f64::NAN);
    match shapes.first().copied().unwrap_or(Shape::Trace) {
        Shape::Trace | Shape::Asym => {
            let mut out = vec![0.0; n];
            for (m, c) in expr.terms() {
                let c = coeff(c);
                for (k, o) in out.iter_mut().enumerate() {
                    let p = product(ctx, &m.factors, k);
                    *o += c * if m.shape == Shape::Trace { p[0][0] + p[1][1] } else { p[1][0] - p[0][1] };
                }
            }
            Ok(Evaluated::Scalar(ScalarField::new(grid, out)))
        }
        Shape::Vector => {
            let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
            for (m, c) in expr.terms() {
                let c = coeff(c);
                let (mats, v) = m.factors.split_at(m.factors.len() - 1);
                for k in 0..n {
                    let mut w = ctx.vector(v[0], k);
                    for &f in mats.iter().rev() {
                        let t = ctx.matrix(f, k);
                        w = [t[0][0] * w[0] + t[1][0] * w[1], t[0][1] * w[0] + t[1][1] * w[1]];
                    }
                    a[k] += c * w[0];
                    b[k] += c * w[1];
                }
            }
            Ok(Evaluated::Vector(VectorField::new(grid, a, b)))
        }
        Shape::Boundary => {
            let s_max = expr
                .terms()
                .filter_map(|(m, _)| match m.factors[0] {
                    Factor::HessRho(s) => Some(s),
                    _ => None,
                })
                .max()
                .unwrap_or(1);
            let sd = SignedDistance::with_order(*grid.domain(), s_max)?;
            let comps = grid.boundary_components();
            let n2 = grid.resolution().1;
            let mut vals = vec![vec![0.0; n2]; comps.len()];
            for (c, nodes) in comps.iter().enumerate() {
                for (j, &k) in nodes.iter().enumerate() {
                    let x = grid.point(k);
                    let tensors: Vec<SymTensor> = (0..=s_max).map(|s| sd.derivs(x, s)).collect::<Result<_>>()?;
                    let mut acc = 0.0;
                    for (m, cf) in expr.terms() {
                        let Factor::HessRho(s) = m.factors[0] else { unreachable!("validated") };
                        let vs: Vec<[f64; 2]> = m.factors[1..].iter().map(|&f| ctx.vector(f, k)).collect();
                        acc += coeff(cf) * tensors[s].apply(&vs);
                    }
                    vals[c][j] = acc;
                }
            }
            Ok(Evaluated::Trace(BoundaryTrace::from_components(grid, |c, j| vals[c][j])?))
        }
        Shape::Matrix => Err(Error::MalformedExpr("matrix-valued expressions are not evaluated".into())),
    }
}

/// Per-level report of the ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub k: usize,
    /// `‖D^k u‖_surrogate`.
    pub norm: f64,
    pub residuals: Residuals,
    /// Threshold the residuals were checked against.
    pub tolerance: f64,
    /// Relative size of the incompatible part removed from the data.
    pub projection: f64,
    /// Size of the reconstruction data (`|a| + |w| + |b| + |c|`).
    pub data_scale: f64,
}

#[derive(Debug, Clone)]
pub struct KatoDerivatives {
    /// `D^0 u, …, D^K u` at `t = 0`.
    pub fields: Vec<VectorField>,
    pub y: VectorField,
    /// Entries for `k = 1..=K`.
    pub reports: Vec<LevelReport>,
}

impl KatoDerivatives {
    pub fn order(&self) -> usize {
        self.fields.len() - 1
    }

    /// `‖D^k u‖_surrogate` for `k = 0..=K`.
    pub fn norms(&self) -> Vec<f64> {
        self.fields.iter().map(|f| f.surrogate_norm()).collect()
    }
}

/// Factor by which ladder residuals may exceed the solver tolerance.
pub const RESIDUAL_FACTOR: f64 = 10.0;

/// Size below which a level-`k` quantity of data with surrogate norm
/// `y_norm` is indistinguishable from roundoff.
pub fn roundoff_floor(y_norm: f64, k: usize) -> f64 {
    1e3 * f64::EPSILON * y_norm.max(1.0).powi(k as i32 + 1)
}

/// Harmonic constraints `Π K^k[u, y−u]`: loop circulations (annulus),
/// component means (torus), none (disk).
fn kernel_constraints(kernel: &VectorField) -> Result<Vec<f64>> {
    let grid = kernel.grid();
    match grid.domain() {
        Domain::Torus { .. } => Ok(kernel.means().to_vec()),
        Domain::Disk { .. } => Ok(Vec::new()),
        Domain::Annulus { .. } => grid.domain().loops(grid.resolution().1).iter().map(|l| circulation(kernel, l)).collect(),
    }
}

/// `D^k u` for `k = 0..=K` by div–curl reconstruction from the evaluated
/// series.
pub fn kato_ladder(y: &VectorField, order: usize) -> Result<KatoDerivatives> {
    if order == 0 {
        return Err(Error::InvalidArgument("ladder order must be at least 1"));
    }
    if order > SERIES_CAP {
        return Err(Error::OrderTooLarge { order, cap: SERIES_CAP });
    }
    let grid = y.grid().clone();
    let u = leray_project(y)?.u;
    let mut ctx = EvalContext::new(y.clone(), u.clone())?;
    let mut fields = vec![u];
    let mut reports = Vec::with_capacity(order);
    let polar = !grid.domain().is_torus();
    let ynorm = y.surrogate_norm();
    for k in 1..=order {
        let a = evaluate_expr(&div_series(k)?, &ctx, Locus::Interior)?.scalar()?;
        let w = evaluate_expr(&curl_series(k)?, &ctx, Locus::Interior)?.scalar()?;
        let b = if polar { Some(evaluate_expr(&normal_trace_series(k)?, &ctx, Locus::Boundary)?.trace()?) } else { None };
        let kernel = evaluate_expr(&kernel_series(k)?, &ctx, Locus::Interior)?.vector()?;
        let data = DivCurlData { a, w, b, c: kernel_constraints(&kernel)? };
        let rec = div_curl_reconstruct(&data)?;
        let scale = data.scale();
        let floor = roundoff_floor(ynorm, k);
        let tolerance = (RESIDUAL_FACTOR * projection_tolerance(&grid) * scale).max(floor);
        let residual = rec.residuals.max();
        if residual > tolerance {
            return Err(Error::ResidualTooLarge { k, residual, tolerance });
        }
        reports.push(LevelReport {
            k,
            norm: rec.f.surrogate_norm(),
            residuals: rec.residuals,
            tolerance,
            projection: rec.projection,
            data_scale: scale,
        });
        ctx.push(rec.f.clone());
        fields.push(rec.f);
    }
    Ok(KatoDerivatives { fields, y: y.clone(), reports })
}

/// `P = g − u·(y−u)` where `g` solves the Neumann problem with data
/// `(div(u·∇y), (u·∇y)·n)` (periodic Poisson on the torus).
pub fn direct_p_field(y: &VectorField) -> Result<ScalarField> {
    let u = leray_project(y)?.u;
    let j = y.jacobian();
    let (u1, u2) = (u.comp(0), u.comp(1));
    let adv = |i: usize| -> Vec<f64> { (0..u1.len()).map(|k| j.m[i][0][k] * u1[k] + j.m[i][1][k] * u2[k]).collect() };
    let v = VectorField::new(y.grid(), adv(0), adv(1));
    let (g, _) = gradient_potential(&v)?;
    let psi = y.sub(&u)?;
    g.sub(&u.dot(&psi)?)
}

/// `∇P + (∇u)ᵀ(y−u)` with `P` from [`direct_p_field`]: the first material
/// derivative of `u` without the series machinery.
pub fn direct_du(y: &VectorField) -> Result<VectorField> {
    let u = leray_project(y)?.u;
    let gp = direct_p_field(y)?.gradient();
    let j = u.jacobian();
    let psi = y.sub(&u)?;
    let (p1, p2) = (psi.comp(0), psi.comp(1));
    let c = |i: usize| -> Vec<f64> {
        (0..p1.len()).map(|k| gp.comp(i)[k] + j.m[0][i][k] * p1[k] + j.m[1][i][k] * p2[k]).collect()
    };
    Ok(VectorField::new(y.grid(), c(0), c(1)))
}

/// Highest order the oracle supports.
pub const ORACLE_CAP: usize = 4;

/// One oracle evaluation per seed point.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub seed: [f64; 2],
    pub value: [f64; 2],
    /// Estimated roundoff amplification of the stencil.
    pub noise: f64,
}

/// `D^k u(0, x)` at each seed from central differences in `t` of
/// `u(t, Φ(t, x))` on the nodes `t = j h`, `|j| ≤ k + 1`. The field and the
/// tracers advance together with RK4 at steps of at most `h`.
pub fn fd_oracle(y0: &VectorField, seeds: &[[f64; 2]], k: usize, h: f64, cfg: &DynamicsConfig) -> Result<Vec<OracleSample>> {
    if k > ORACLE_CAP {
        return Err(Error::OrderTooLarge { order: k, cap: ORACLE_CAP });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("oracle step must be positive"));
    }
    let m = k + 1;
    let s0 = AhtState::new(y0.clone())?;
    let mut values = vec![vec![[0.0; 2]; 2 * m + 1]; seeds.len()];
    let ev0 = PointEvaluator::from_vector(&s0.u);
    for (i, &x) in seeds.iter().enumerate() {
        values[i][m] = ev0.eval2(x);
    }
    for dir in [1.0, -1.0] {
        let mut state = s0.clone();
        let mut pts = seeds.to_vec();
        for j in 1..=m {
            let limit = cfl_limit(&state.u, cfg.cfl_safety);
            let sub = if limit.is_finite() { (h / limit).ceil().max(1.0) as usize } else { 1 };
            for _ in 0..sub {
                state = step_with_tracers(&state, dir * h / sub as f64, cfg, &mut pts)?;
            }
            let ev = PointEvaluator::from_vector(&state.u);
            let slot = if dir > 0.0 { m + j } else { m - j };
            for (i, &x) in pts.iter().enumerate() {
                values[i][slot] = ev.eval2(x);
            }
        }
    }
    let nodes: Vec<f64> = (0..=2 * m).map(|j| (j as f64 - m as f64) * h).collect();
    let w = &fornberg(0.0, &nodes, k)[k];
    let wsum: f64 = w.iter().map(|x| x.abs()).sum();
    let yscale = y0.max_abs();
    let mut out = Vec::with_capacity(seeds.len());
    for (i, &seed) in seeds.iter().enumerate() {
        let vs = &values[i];
        let fmax = vs.iter().fold(0.0f64, |a, v| a.max(v[0].abs()).max(v[1].abs()));
        let noise = (1e-14 * yscale + 1e-13 * fmax) * wsum;
        // nothing above roundoff: the sampled velocity vanishes identically
        if fmax <= 1e-12 * yscale {
            out.push(OracleSample { seed, value: [0.0; 2], noise });
            continue;
        }
        let mut value = [0.0; 2];
        for (wj, v) in w.iter().zip(vs) {
            value[0] += wj * v[0];
            value[1] += wj * v[1];
        }
        if noise > 0.5 * value[0].hypot(value[1]) {
            return Err(Error::UnstableStencil { noise, value: value[0].hypot(value[1]) });
        }
        out.push(OracleSample { seed, value, noise });
    }
    Ok(out)
}

/// Default oracle step `1e-3/‖y0‖_surrogate`.
pub fn default_oracle_step(y0: &VectorField) -> f64 {
    1e-3 / y0.surrogate_norm().max(f64::MIN_POSITIVE)
}

/// [`fd_oracle`] starting from `h0`, halving until consecutive estimates
/// agree to `rel_tol` (at most `max_halvings` times). Returns the finer
/// estimate and the step used.
pub fn fd_oracle_converged(
    y0: &VectorField,
    seeds: &[[f64; 2]],
    k: usize,
    h0: f64,
    rel_tol: f64,
    max_halvings: usize,
    cfg: &DynamicsConfig,
) -> Result<(Vec<OracleSample>, f64)> {
    let mut h = h0;
    let mut prev = fd_oracle(y0, seeds, k, h, cfg)?;
    for _ in 0..max_halvings {
        h *= 0.5;
        let next = fd_oracle(y0, seeds, k, h, cfg)?;
        let scale = next.iter().fold(0.0f64, |a, s| a.max(s.value[0].hypot(s.value[1])));
        let diff = prev.iter().zip(&next).fold(0.0f64, |a, (p, q)| a.max((p.value[0] - q.value[0]).hypot(p.value[1] - q.value[1])));
        if diff <= rel_tol * scale || scale == 0.0 {
            return Ok((next, h));
        }
        prev = next;
    }
    Ok((prev, h))
}

/// `max_seeds |ladder − oracle| / max_seeds |oracle|` for level `k`.
pub fn oracle_disagreement(ladder: &KatoDerivatives, k: usize, oracle: &[OracleSample]) -> Result<f64> {
    let f = ladder.fields.get(k).ok_or(Error::InsufficientOrder { requested: k, available: ladder.order() })?;
    let ev = PointEvaluator::from_vector(f);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for s in oracle {
        let v = ev.eval2(s.seed);
        num = num.max((v[0] - s.value[0]).hypot(v[1] - s.value[1]));
        den = den.max(s.value[0].hypot(s.value[1]));
    }
    Ok(if den == 0.0 { num } else { num / den })
}

/// Seeded points well inside the domain.
pub fn oracle_seeds(domain: &Domain, count: usize, seed: u64) -> Vec<[f64; 2]> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| match *domain {
            Domain::Torus { period } => [rng.gen_range(0.0..period), rng.gen_range(0.0..period)],
            Domain::Disk { radius } => {
                let (r, t) = (radius * 0.7 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..core::f64::consts::TAU));
                [r * t.cos(), r * t.sin()]
            }
            Domain::Annulus { r_in, r_out } => {
                let (r, t) = (r_in + (r_out - r_in) * rng.gen_range(0.2..0.8), rng.gen_range(0.0..core::f64::consts::TAU));
                [r * t.cos(), r * t.sin()]
            }
        })
        .collect()
}

/// Largest relative sup difference between two fields.
pub fn relative_sup_error(a: &VectorField, reference: &VectorField) -> Result<f64> {
    let d = a.sub(reference)?.max_abs();
    let s = reference.max_abs();
    Ok(if s == 0.0 { d } else { d / s })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_grid, Grid2D};
    use crate::presets::{initial_field, random_smooth_field, Preset};
    use alloc::sync::Arc;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};

    fn torus(n: usize) -> Arc<Grid2D> {
        make_grid(Domain::torus(2.0 * PI).unwrap(), (n, n)).unwrap()
    }

    fn parse(s: &str) -> SymbolicExpr {
        SymbolicExpr::parse_text(s).unwrap()
    }

    #[test]
    fn trace_of_shear_vanishes() {
        let g = torus(16);
        let u = VectorField::from_fn(&g, |_, y| [y.sin(), 0.0]);
        let ctx = EvalContext::new(u.clone(), u).unwrap();
        let e = evaluate_expr(&parse("+1 trace GradDU(0) GradDU(0)"), &ctx, Locus::Interior).unwrap().scalar().unwrap();
        assert!(e.max_abs() < 1e-13);
        let z = VectorField::zeros(&g);
        let ctx = EvalContext::new(z.clone(), z).unwrap();
        let e = evaluate_expr(&parse("+1 trace GradDU(0) GradDU(0)"), &ctx, Locus::Interior).unwrap().scalar().unwrap();
        assert_eq!(e.max_abs(), 0.0);
    }

    #[test]
    fn asym_matches_pointwise_matrices() {
        let g = torus(16);
        let u = random_smooth_field(&g, 4, 0.5);
        let ctx = EvalContext::new(u.clone(), u.clone()).unwrap();
        let e = evaluate_expr(&parse("+1 asym GradDU(0) GradDU(0)"), &ctx, Locus::Interior).unwrap().scalar().unwrap();
        let j = u.jacobian();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let k = rng.gen_range(0..g.len());
            let m = j.at(k);
            // (M·M)_{21} − (M·M)_{12}
            let m21 = m[1][0] * m[0][0] + m[1][1] * m[1][0];
            let m12 = m[0][0] * m[0][1] + m[0][1] * m[1][1];
            assert!((e.values()[k] - (m21 - m12)).abs() < 1e-13);
        }
    }

    #[test]
    fn missing_factor_and_locus() {
        let g = make_grid(Domain::disk(1.0).unwrap(), (16, 16)).unwrap();
        let u = VectorField::zeros(&g);
        let ctx = EvalContext::new(u.clone(), u).unwrap();
        let e = parse("+1 trace GradDU(2) GradDU(0)");
        assert!(matches!(evaluate_expr(&e, &ctx, Locus::Interior), Err(Error::MissingFactor(_))));
        let b = normal_trace_series(1).unwrap();
        assert!(matches!(evaluate_expr(&b, &ctx, Locus::Interior), Err(Error::WrongLocus)));
    }

    #[test]
    fn boundary_form_on_disk() {
        // ∇²ρ{u,u} for the unit circle is |u_τ|²: (I − n nᵀ)/r
        let g = make_grid(Domain::disk(1.0).unwrap(), (16, 32)).unwrap();
        let u = VectorField::from_fn(&g, |x, y| [-y, x]);
        let ctx = EvalContext::new(u.clone(), u).unwrap();
        let t = evaluate_expr(&normal_trace_series(1).unwrap(), &ctx, Locus::Boundary).unwrap().trace().unwrap();
        assert!(t.component(0).iter().all(|v| (v + 1.0).abs() < 1e-12));
    }

    #[test]
    fn steady_gradient_ladder_vanishes() {
        for g in [torus(32), make_grid(Domain::disk(1.0).unwrap(), (24, 48)).unwrap()] {
            let y = initial_field(&g, Preset::GradientSteady).unwrap();
            let l = kato_ladder(&y, 3).unwrap();
            for f in &l.fields {
                assert!(f.max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn first_derivative_against_direct_construction() {
        let g = torus(64);
        let y = random_smooth_field(&g, 5, 0.5);
        let l = kato_ladder(&y, 1).unwrap();
        let d = direct_du(&y).unwrap();
        assert!(relative_sup_error(&l.fields[1], &d).unwrap() < 1e-8);
        // mean of Du − K¹ is the mean of a gradient
        let k1 = evaluate_expr(&kernel_series(1).unwrap(), &EvalContext::new(y.clone(), l.fields[0].clone()).unwrap(), Locus::Interior)
            .unwrap()
            .vector()
            .unwrap();
        let m = l.fields[1].sub(&k1).unwrap().means();
        assert!(m[0].abs() < 1e-10 && m[1].abs() < 1e-10);
        let p = direct_p_field(&y).unwrap();
        let pg = p.gradient();
        assert!(pg.means()[0].abs() < 1e-12);
    }

    #[test]
    fn zero_velocity_direct_p() {
        let g = make_grid(Domain::disk(1.0).unwrap(), (16, 32)).unwrap();
        let y = initial_field(&g, Preset::GradientSteady).unwrap();
        assert!(direct_p_field(&y).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn annulus_ladder_circulations() {
        let g = make_grid(Domain::annulus(0.5, 1.5).unwrap(), (32, 64)).unwrap();
        let y = random_smooth_field(&g, 2, 0.5);
        let l = kato_ladder(&y, 2).unwrap();
        for r in &l.reports {
            assert!(r.residuals.circ <= 1e-10 * r.data_scale.max(1.0), "{r:?}");
        }
        let du = direct_du(&y).unwrap();
        assert!(relative_sup_error(&l.fields[1], &du).unwrap() < 1e-2);
    }

    #[test]
    fn oracle_first_order_against_snapshots() {
        let g = torus(32);
        let y = random_smooth_field(&g, 8, 0.5);
        let cfg = DynamicsConfig::default();
        let seeds = oracle_seeds(g.domain(), 3, 1);
        let h = default_oracle_step(&y);
        let o = fd_oracle(&y, &seeds, 1, h, &cfg).unwrap();
        // (∂_t u + u·∇u) from two snapshots at ±h
        let s0 = AhtState::new(y.clone()).unwrap();
        let sp = crate::dynamics::step(&s0, h, &cfg).unwrap();
        let sm = crate::dynamics::step(&s0, -h, &cfg).unwrap();
        let dt = sp.u.combine(0.5 / h, &sm.u, -0.5 / h).unwrap();
        let j = s0.u.jacobian();
        let (u1, u2) = (s0.u.comp(0), s0.u.comp(1));
        let c = |i: usize| -> Vec<f64> { (0..g.len()).map(|k| dt.comp(i)[k] + j.m[i][0][k] * u1[k] + j.m[i][1][k] * u2[k]).collect() };
        let direct = PointEvaluator::from_vector(&VectorField::new(&g, c(0), c(1)));
        let scale = o.iter().fold(0.0f64, |a, s| a.max(s.value[0].hypot(s.value[1])));
        for s in &o {
            let v = direct.eval2(s.seed);
            assert!((v[0] - s.value[0]).hypot(v[1] - s.value[1]) <= 1e-4 * scale);
        }
    }

    #[test]
    fn oracle_steady_is_zero() {
        let g = torus(32);
        let y = initial_field(&g, Preset::GradientSteady).unwrap();
        let seeds = oracle_seeds(g.domain(), 3, 1);
        for k in 1..=3 {
            let o = fd_oracle(&y, &seeds, k, default_oracle_step(&y), &DynamicsConfig::default()).unwrap();
            assert!(o.iter().all(|s| s.value[0].abs() <= 1e-8 && s.value[1].abs() <= 1e-8));
        }
        assert!(matches!(
            fd_oracle(&y, &seeds, 5, 1e-3, &DynamicsConfig::default()),
            Err(Error::OrderTooLarge { .. })
        ));
    }
}
