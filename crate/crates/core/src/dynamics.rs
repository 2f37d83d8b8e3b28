//! Time integration of `∂_t y + (P y)·∇y = 0` and its transport diagnostics.

use crate::geometry::{Grid2D, PointEvaluator, ScalarField, VectorField};
use crate::hodge::{leray_project, Projection};
use crate::{Error, Result};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CFL_SAFETY: f64 = 0.5;
/// `‖P y‖_∞` below which a run is considered converged to a gradient.
pub const CONVERGED_TOL: f64 = 1e-9;

/// High-mode damping applied after every step, as a rate per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Damping rate of the highest mode.
    pub strength: f64,
    /// Torus: exponent `2p` of the exponential filter `exp(−σ dt η^{2p})`.
    pub torus_order: i32,
    /// Polar: fraction of angular modes left untouched; the rest are damped
    /// with a quartic ramp.
    pub polar_keep: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { strength: 40.0, torus_order: 36, polar_keep: 2.0 / 3.0 }
    }
}

impl FilterConfig {
    pub const NONE: FilterConfig = FilterConfig { strength: 0.0, torus_order: 36, polar_keep: 1.0 };

    fn multiplier(&self, torus: bool, dt: f64) -> impl Fn(f64) -> f64 {
        let (s, p, keep) = (self.strength * dt.abs(), self.torus_order, self.polar_keep);
        move |eta: f64| {
            if s == 0.0 {
                1.0
            } else if torus {
                (-s * eta.powi(p)).exp()
            } else if eta <= keep {
                1.0
            } else {
                (-s * ((eta - keep) / (1.0 - keep)).powi(4)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    pub cfl_safety: f64,
    pub filter: FilterConfig,
    /// Stop a run once `‖P y‖_∞` falls below this.
    pub converged_tol: f64,
    /// Optional cap on the step, for time-accuracy studies once the velocity
    /// has decayed and the CFL limit alone would allow huge steps.
    pub max_dt: Option<f64>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self { cfl_safety: CFL_SAFETY, filter: FilterConfig::default(), converged_tol: CONVERGED_TOL, max_dt: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub dt: f64,
    /// `|dt|` over the CFL limit at the start of the step.
    pub cfl: f64,
    /// `∫|y|²` removed by the filter in this step.
    pub filter_removed: f64,
    /// `∫ ∫|u|² dt` over the step, midpoint rule on the half-step stages.
    pub kinetic_integral: f64,
}

#[derive(Debug, Clone)]
pub struct AhtState {
    pub t: f64,
    pub y: VectorField,
    /// `P y`.
    pub u: VectorField,
    pub p: ScalarField,
    pub stats: StepStats,
}

impl AhtState {
    pub fn new(y: VectorField) -> Result<Self> {
        Self::at(0.0, y)
    }

    pub fn at(t: f64, y: VectorField) -> Result<Self> {
        if !y.is_finite() {
            return Err(Error::NonFiniteField);
        }
        let Projection { u, p, .. } = leray_project(&y)?;
        Ok(Self { t, y, u, p, stats: StepStats::default() })
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        self.y.grid()
    }
}

/// Largest stable `|dt|` for velocity `u`: `safety·h_min/max|u|` on the
/// torus; on polar grids the node-wise minimum of `safety·Δr/|u_r|` and
/// `safety·rΔθ/|u_θ|`. Infinite for `u = 0`.
pub fn cfl_limit(u: &VectorField, safety: f64) -> f64 {
    let g = u.grid();
    let (n1, n2) = g.resolution();
    let mut rate = 0.0f64;
    if g.domain().is_torus() {
        rate = u.max_abs() / g.h_min();
    } else {
        let dth = 2.0 * PI / n2 as f64;
        let dr = g.h();
        for i in 0..n1 {
            let r = g.axis1()[i];
            for j in 0..n2 {
                let k = i * n2 + j;
                let [x, y] = g.point(k);
                let (c, s) = (x / r, y / r);
                let [a, b] = u.at(k);
                let (ur, ut) = (a * c + b * s, -a * s + b * c);
                rate = rate.max(ur.abs() / dr).max(ut.abs() / (r * dth));
            }
        }
    }
    if rate == 0.0 {
        f64::INFINITY
    } else {
        safety / rate
    }
}

/// `−u·∇y`.
fn advection(y: &VectorField, u: &VectorField) -> VectorField {
    let j = y.jacobian();
    let (u1, u2) = (u.comp(0), u.comp(1));
    let c = |i: usize| -> Vec<f64> { (0..u1.len()).map(|k| -(j.m[i][0][k] * u1[k] + j.m[i][1][k] * u2[k])).collect() };
    VectorField::new(y.grid(), c(0), c(1))
}

fn velocity_at(u: &VectorField, pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    if pts.is_empty() {
        return Vec::new();
    }
    let ev = PointEvaluator::from_vector(u);
    pts.iter().map(|&p| ev.eval2(p)).collect()
}

fn axpy_pts(x: &[[f64; 2]], a: f64, v: &[[f64; 2]]) -> Vec<[f64; 2]> {
    x.iter().zip(v).map(|(p, d)| [p[0] + a * d[0], p[1] + a * d[1]]).collect()
}

/// One RK4 step, re-projecting at every stage, then the high-mode filter.
pub fn step(state: &AhtState, dt: f64, cfg: &DynamicsConfig) -> Result<AhtState> {
    step_with_tracers(state, dt, cfg, &mut [])
}

/// [`step`], also advancing `tracers` along `dx/dt = u(t, x)` with the same
/// stages (so the tracers are fourth order in time jointly with `y`).
pub fn step_with_tracers(state: &AhtState, dt: f64, cfg: &DynamicsConfig, tracers: &mut [[f64; 2]]) -> Result<AhtState> {
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let limit = cfl_limit(&state.u, cfg.cfl_safety);
    if dt.abs() > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt: dt.abs(), limit });
    }
    let y0 = &state.y;
    let k1 = advection(y0, &state.u);
    let v1 = velocity_at(&state.u, tracers);

    let y2 = y0.combine(1.0, &k1, 0.5 * dt)?;
    let u2 = leray_project(&y2)?.u;
    let x2 = axpy_pts(tracers, 0.5 * dt, &v1);
    let k2 = advection(&y2, &u2);
    let v2 = velocity_at(&u2, &x2);

    let y3 = y0.combine(1.0, &k2, 0.5 * dt)?;
    let u3 = leray_project(&y3)?.u;
    let x3 = axpy_pts(tracers, 0.5 * dt, &v2);
    let k3 = advection(&y3, &u3);
    let v3 = velocity_at(&u3, &x3);

    let y4 = y0.combine(1.0, &k3, dt)?;
    let u4 = leray_project(&y4)?.u;
    let x4 = axpy_pts(tracers, dt, &v3);
    let k4 = advection(&y4, &u4);
    let v4 = velocity_at(&u4, &x4);

    let [mut a, mut b] = y0.clone().into_comps();
    let w = dt / 6.0;
    for k in 0..a.len() {
        a[k] += w * (k1.comp(0)[k] + 2.0 * k2.comp(0)[k] + 2.0 * k3.comp(0)[k] + k4.comp(0)[k]);
        b[k] += w * (k1.comp(1)[k] + 2.0 * k2.comp(1)[k] + 2.0 * k3.comp(1)[k] + k4.comp(1)[k]);
    }
    for (i, x) in tracers.iter_mut().enumerate() {
        for c in 0..2 {
            x[c] += w * (v1[i][c] + 2.0 * v2[i][c] + 2.0 * v3[i][c] + v4[i][c]);
        }
    }
    let grid = y0.grid();
    let before = VectorField::new(grid, a.clone(), b.clone()).energy();
    if cfg.filter.strength > 0.0 {
        grid.filter_pair(&mut a, &mut b, cfg.filter.multiplier(grid.domain().is_torus(), dt));
    }
    let y = VectorField::new(grid, a, b);
    if !y.is_finite() {
        return Err(Error::NonFiniteField);
    }
    let removed = before - y.energy();
    let mut next = AhtState::at(state.t + dt, y)?;
    let kinetic_integral = 0.5 * dt * (u2.energy() + u3.energy());
    next.stats = StepStats { dt, cfl: dt.abs() / limit, filter_removed: removed, kinetic_integral };
    Ok(next)
}

/// Smooth functions `f: R² → R` whose integrals over the domain are
/// invariant under rearrangement of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestBattery {
    /// Range scale `Z = sup|y0|`.
    pub scale: f64,
    pub gaussians: Vec<([f64; 2], f64)>,
}

impl TestBattery {
    /// Monomials of degree 1..=4 times a smooth cutoff, plus three seeded
    /// Gaussians, all scaled to the range of `y0`.
    pub fn for_field(y0: &VectorField, seed: u64) -> Self {
        let scale = y0.max_abs().max(1e-300);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gaussians = (0..3)
            .map(|_| ([rng.gen_range(-0.5..0.5) * scale, rng.gen_range(-0.5..0.5) * scale], 0.5 * scale))
            .collect();
        Self { scale, gaussians }
    }

    /// Number of test functions.
    pub fn len(&self) -> usize {
        MONOMIALS.len() + self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values of every test function at `z`.
    pub fn eval(&self, z: [f64; 2]) -> Vec<f64> {
        let (a, b) = (z[0] / self.scale, z[1] / self.scale);
        // C^∞ bump supported in |z| < 2Z, smooth and positive on the range
        let s = (a * a + b * b) / 4.0;
        let cut = if s < 1.0 { (1.0 - 1.0 / (1.0 - s)).exp() } else { 0.0 };
        let mut out: Vec<f64> = MONOMIALS.iter().map(|&(i, j)| a.powi(i) * b.powi(j) * cut).collect();
        for (c, sg) in &self.gaussians {
            let d2 = (z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2);
            out.push((-d2 / (2.0 * sg * sg)).exp());
        }
        out
    }

    /// `∫ f(y(x)) dx` for every test function.
    pub fn integrals(&self, y: &VectorField) -> Vec<f64> {
        let w = y.grid().weights();
        let mut acc = vec![0.0; self.len()];
        for k in 0..w.len() {
            for (a, v) in acc.iter_mut().zip(self.eval(y.at(k))) {
                *a += w[k] * v;
            }
        }
        acc
    }
}

const MONOMIALS: [(i32, i32); 14] =
    [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3), (4, 0), (3, 1), (2, 2), (1, 3), (0, 4)];

/// `|∫ f(y) − ∫ f(y0)| / (1 + |∫ f(y0)|)` per test function.
pub fn rearrangement_drift(y: &VectorField, reference: &[f64], battery: &TestBattery) -> Vec<f64> {
    battery.integrals(y).iter().zip(reference).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `∫ ½|y − x|²` (disk and annulus only).
    pub cost: Option<f64>,
    /// `∫ |u|²`.
    pub kinetic: f64,
    /// Dissipation residual against the previous record.
    pub dissipation_residual: Option<f64>,
    pub drift: Vec<f64>,
    pub y_sup: [f64; 2],
    pub y_l2: [f64; 2],
    pub u_sup: f64,
    /// Energy removed by the filter since the previous record.
    pub filter_removed: f64,
    /// `∫ ∫|u|² dt` since the previous record (composite midpoint rule).
    pub kinetic_integral: Option<f64>,
    pub steps: usize,
}

impl DiagnosticsRecord {
    pub fn max_drift(&self) -> f64 {
        self.drift.iter().fold(0.0, |m, &d| m.max(d))
    }

    /// Dissipation residual over the mean kinetic energy of the interval.
    pub fn dissipation_ratio(&self, prev: &DiagnosticsRecord) -> Option<f64> {
        let k = self.kinetic_integral.map_or(0.5 * (self.kinetic + prev.kinetic), |i| i / (self.t - prev.t));
        self.dissipation_residual.map(|r| if k > 0.0 { r / k } else { 0.0 })
    }
}

pub fn cost(y: &VectorField) -> Option<f64> {
    let g = y.grid();
    if g.domain().is_torus() {
        return None;
    }
    let w = g.weights();
    Some(
        (0..g.len())
            .map(|k| {
                let [a, b] = y.at(k);
                let [x, z] = g.point(k);
                0.5 * w[k] * ((a - x).powi(2) + (b - z).powi(2))
            })
            .sum(),
    )
}

fn l2(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, w)| a * a * w).sum::<f64>().sqrt()
}

/// Diagnostics of `state`; `reference` holds the battery integrals of `y0`.
pub fn diagnostics(state: &AhtState, battery: &TestBattery, reference: &[f64]) -> DiagnosticsRecord {
    let w = state.grid().weights();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    DiagnosticsRecord {
        t: state.t,
        cost: cost(&state.y),
        kinetic: state.u.energy(),
        dissipation_residual: None,
        drift: rearrangement_drift(&state.y, reference, battery),
        y_sup: [sup(state.y.comp(0)), sup(state.y.comp(1))],
        y_l2: [l2(state.y.comp(0), w), l2(state.y.comp(1), w)],
        u_sup: state.u.max_abs(),
        filter_removed: 0.0,
        kinetic_integral: None,
        steps: 0,
    }
}

/// `|(J2 − J1)/(t2 − t1) + ∫|u|²|` with the kinetic term time-averaged over
/// the interval: the per-step midpoint sum when `next` carries it, else the
/// endpoint average.
pub fn dissipation_residual(prev: &DiagnosticsRecord, next: &DiagnosticsRecord) -> Result<f64> {
    match (prev.cost, next.cost) {
        (Some(j1), Some(j2)) => {
            let dt = next.t - prev.t;
            if dt == 0.0 {
                return Err(Error::InvalidArgument("records at the same time"));
            }
            let k = next.kinetic_integral.map_or(0.5 * (prev.kinetic + next.kinetic), |i| i / dt);
            Ok(((j2 - j1) / dt + k).abs())
        }
        _ => Err(Error::WrongDomain("transport cost needs a bounded domain")),
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub state: AhtState,
    pub diag: DiagnosticsRecord,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub initial: Sample,
    pub samples: Vec<Sample>,
    pub steps: usize,
    /// Stopped early because `‖P y‖_∞ ≤ converged_tol`.
    pub converged: bool,
}

impl RunOutput {
    pub fn records(&self) -> impl Iterator<Item = &DiagnosticsRecord> {
        core::iter::once(&self.initial.diag).chain(self.samples.iter().map(|s| &s.diag))
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().unwrap_or(&self.initial)
    }
}

/// Integrates to time `t_end` under the CFL rule, landing exactly on every
/// multiple of `sample_every`, and records diagnostics there.
pub fn run(state0: &AhtState, t_end: f64, sample_every: f64, cfg: &DynamicsConfig, battery: &TestBattery) -> Result<RunOutput> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument("final time must be positive"));
    }
    if !(sample_every > 0.0) {
        return Err(Error::InvalidArgument("sample interval must be positive"));
    }
    let reference = battery.integrals(&state0.y);
    let initial = Sample { state: state0.clone(), diag: diagnostics(state0, battery, &reference) };
    let mut samples: Vec<Sample> = Vec::new();
    let mut state = state0.clone();
    let (mut steps, mut since, mut removed, mut kin) = (0usize, 0usize, 0.0f64, 0.0f64);
    let mut index = 1u64;
    let t0 = state0.t;
    let converged = loop {
        let target = (t0 + index as f64 * sample_every).min(t0 + t_end);
        let limit = cfl_limit(&state.u, cfg.cfl_safety).min(cfg.max_dt.unwrap_or(f64::INFINITY));
        let hit = limit >= target - state.t;
        let dt = (target - state.t).min(limit);
        state = step(&state, dt, cfg)?;
        steps += 1;
        since += 1;
        removed += state.stats.filter_removed;
        kin += state.stats.kinetic_integral;
        let converged = state.u.max_abs() <= cfg.converged_tol;
        if hit || converged {
            if hit {
                state.t = target;
            }
            let mut diag = diagnostics(&state, battery, &reference);
            diag.filter_removed = removed;
            diag.steps = since;
            diag.kinetic_integral = Some(kin);
            let prev = samples.last().map_or(&initial.diag, |s| &s.diag);
            diag.dissipation_residual = dissipation_residual(prev, &diag).ok();
            samples.push(Sample { state: state.clone(), diag });
            since = 0;
            removed = 0.0;
            kin = 0.0;
            index += 1;
            if converged || target >= t0 + t_end {
                break converged;
            }
        }
    };
    Ok(RunOutput { initial, samples, steps, converged })
}

/// The domain's position field `x` (the identity map).
pub fn identity_field(grid: &Arc<Grid2D>) -> VectorField {
    VectorField::from_fn(grid, |x, y| [x, y])
}

/// Whether the run's cost is non-increasing up to `slack·dt·∫|u|²` per
/// interval.
pub fn cost_monotone(out: &RunOutput, slack: f64) -> bool {
    let recs: Vec<&DiagnosticsRecord> = out.records().collect();
    recs.windows(2).all(|w| match (w[0].cost, w[1].cost) {
        (Some(a), Some(b)) => b <= a + slack * (w[1].t - w[0].t) * 0.5 * (w[0].kinetic + w[1].kinetic),
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::geometry::make_grid;
    use crate::presets::{initial_field, IpmProfile, Preset};

    fn torus(n: usize) -> Arc<Grid2D> {
        make_grid(Domain::torus(2.0 * PI).unwrap(), (n, n)).unwrap()
    }

    #[test]
    fn gradient_is_steady() {
        for g in [torus(32), make_grid(Domain::disk(1.0).unwrap(), (24, 48)).unwrap()] {
            let s = AhtState::new(initial_field(&g, Preset::GradientSteady).unwrap()).unwrap();
            let n = step(&s, 0.01, &DynamicsConfig::default()).unwrap();
            assert!(n.y.sub(&s.y).unwrap().max_abs() <= 1e-10);
        }
    }

    #[test]
    fn ipm_first_component_stays_zero() {
        let g = torus(32);
        let mut s = AhtState::new(initial_field(&g, Preset::IpmEmbed { profile: IpmProfile::Bubble }).unwrap()).unwrap();
        let cfg = DynamicsConfig::default();
        for _ in 0..20 {
            let dt = cfl_limit(&s.u, cfg.cfl_safety);
            s = step(&s, dt, &cfg).unwrap();
        }
        assert!(s.y.comp(0).iter().all(|v| v.abs() <= 1e-12));
        assert!(s.u.max_abs() > 1e-3);
    }

    #[test]
    fn zero_step_and_cfl_violation() {
        let g = torus(16);
        let s = AhtState::new(crate::presets::random_smooth_field(&g, 1, 0.5)).unwrap();
        let cfg = DynamicsConfig::default();
        let same = step(&s, 0.0, &cfg).unwrap();
        assert_eq!(same.y.comp(0), s.y.comp(0));
        let lim = cfl_limit(&s.u, cfg.cfl_safety);
        assert!(matches!(step(&s, 2.0 * lim, &cfg), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn short_run_single_record() {
        let g = torus(16);
        let s = AhtState::new(crate::presets::random_smooth_field(&g, 1, 0.5)).unwrap();
        let cfg = DynamicsConfig::default();
        let lim = cfl_limit(&s.u, cfg.cfl_safety);
        let b = TestBattery::for_field(&s.y, 0);
        let out = run(&s, 0.5 * lim, 1.0, &cfg, &b).unwrap();
        assert_eq!(out.steps, 1);
        assert_eq!(out.samples.len(), 1);
        assert!(out.records().all(|r| r.kinetic.is_finite()));
        assert!(out.initial.diag.drift.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn steady_run_has_no_drift() {
        let g = make_grid(Domain::disk(1.0).unwrap(), (16, 32)).unwrap();
        let s = AhtState::new(initial_field(&g, Preset::GradientSteady).unwrap()).unwrap();
        let b = TestBattery::for_field(&s.y, 0);
        let out = run(&s, 1.0, 0.25, &DynamicsConfig::default(), &b).unwrap();
        assert!(out.converged);
        for r in out.records() {
            assert!(r.max_drift() <= 1e-10);
        }
        let r = &out.samples[0].diag;
        assert!(dissipation_residual(&out.initial.diag, r).unwrap() <= 1e-10);
    }

    #[test]
    fn torus_has_no_cost() {
        let g = torus(16);
        let s = AhtState::new(crate::presets::random_smooth_field(&g, 1, 0.5)).unwrap();
        let b = TestBattery::for_field(&s.y, 0);
        let d = diagnostics(&s, &b, &b.integrals(&s.y));
        assert!(matches!(dissipation_residual(&d, &d), Err(Error::WrongDomain(_))));
    }
}
