//! Trajectories of the flow `∂_t Φ = u(t, Φ)`, the time-Taylor expansion of
//! `Φ` from the derivative ladder, and analyticity-radius estimates.

use crate::dynamics::{cfl_limit, step, AhtState, DynamicsConfig, RunOutput};
use crate::geometry::{Domain, PointEvaluator, VectorField};
use crate::kato::KatoDerivatives;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Velocity snapshots `u(t_i)` with cubic Lagrange interpolation in time.
#[derive(Debug, Clone)]
pub struct Snapshots {
    times: Vec<f64>,
    evals: Vec<PointEvaluator>,
    domain: Domain,
    umax: f64,
}

impl Snapshots {
    /// `times` strictly increasing, one field per time.
    pub fn new(times: Vec<f64>, fields: &[VectorField]) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::InvalidArgument("one snapshot per time is required"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("snapshot times must increase"));
        }
        let grid = fields[0].grid();
        if fields.iter().any(|f| !f.grid().same_as(grid)) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            umax: fields.iter().fold(0.0, |a, f| a.max(f.max_abs())),
            domain: *grid.domain(),
            evals: fields.iter().map(PointEvaluator::from_vector).collect(),
            times,
        })
    }

    /// A time-independent velocity.
    pub fn steady(u: &VectorField) -> Self {
        Self::new(vec![0.0], core::slice::from_ref(u)).expect("single snapshot")
    }

    /// The velocities of a run at `t0` and every sample.
    pub fn from_run(out: &RunOutput) -> Result<Self> {
        let states: Vec<&AhtState> = core::iter::once(&out.initial.state).chain(out.samples.iter().map(|s| &s.state)).collect();
        let fields: Vec<VectorField> = states.iter().map(|s| s.u.clone()).collect();
        Self::new(states.iter().map(|s| s.t).collect(), &fields)
    }

    /// Evolves `state0` backwards to `t_lo` and forwards to `t_hi`, storing
    /// `u` every `spacing`.
    pub fn record(state0: &AhtState, t_lo: f64, t_hi: f64, spacing: f64, cfg: &DynamicsConfig) -> Result<Self> {
        if !(spacing > 0.0) || t_lo > 0.0 || t_hi < 0.0 {
            return Err(Error::InvalidArgument("need t_lo ≤ 0 ≤ t_hi and positive spacing"));
        }
        let mut back = Vec::new();
        let mut fwd = Vec::new();
        for (end, out) in [(t_lo, &mut back), (t_hi, &mut fwd)] {
            let n = (end.abs() / spacing).ceil() as usize;
            let mut s = state0.clone();
            for i in 1..=n {
                let target = state0.t + end * i as f64 / n as f64;
                while s.t != target {
                    let limit = cfl_limit(&s.u, cfg.cfl_safety).min(cfg.max_dt.unwrap_or(f64::INFINITY));
                    let rest = target - s.t;
                    let dt = if limit >= rest.abs() { rest } else { limit.copysign(rest) };
                    let t_next = if dt == rest { target } else { s.t + dt };
                    s = step(&s, dt, cfg)?;
                    s.t = t_next;
                }
                out.push((s.t, s.u.clone()));
            }
        }
        back.reverse();
        let all: Vec<(f64, VectorField)> = back.into_iter().chain([(state0.t, state0.u.clone())]).chain(fwd).collect();
        let fields: Vec<VectorField> = all.iter().map(|(_, u)| u.clone()).collect();
        Self::new(all.iter().map(|(t, _)| *t).collect(), &fields)
    }

    /// Smallest gap between snapshots (`∞` for a single one).
    pub fn spacing(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `max |u|` over all snapshots.
    pub fn max_speed(&self) -> f64 {
        self.umax
    }

    /// `u(t, x)`, interpolating in time over the four nearest snapshots.
    pub fn velocity(&self, t: f64, x: [f64; 2]) -> Result<[f64; 2]> {
        let n = self.times.len();
        if n == 1 {
            return Ok(self.evals[0].eval2(x));
        }
        let (lo, hi) = self.span();
        let slack = 1e-12 * (hi - lo);
        if t < lo - slack || t > hi + slack {
            return Err(Error::InvalidArgument("time outside the snapshot span"));
        }
        let width = n.min(4);
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        let start = (i + 1).saturating_sub(width / 2).min(n - width);
        let ts = &self.times[start..start + width];
        let mut out = [0.0; 2];
        for a in 0..width {
            let mut w = 1.0;
            for b in 0..width {
                if a != b {
                    w *= (t - ts[b]) / (ts[a] - ts[b]);
                }
            }
            let v = self.evals[start + a].eval2(x);
            out[0] += w * v[0];
            out[1] += w * v[1];
        }
        Ok(out)
    }
}

/// Target for the dt-halving error of a trajectory.
pub const TRAJECTORY_TOL: f64 = 1e-8;
/// Largest excursion outside the domain that is projected back, relative
/// to the domain size.
pub const FALLBACK_TOL: f64 = 1e-6;
const MAX_HALVINGS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: [f64; 2],
    pub times: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
    pub dt: f64,
    /// Sup difference against the run with half the step.
    pub halving_error: f64,
    /// Steps after which the point was projected back into the domain.
    pub fallbacks: usize,
    pub max_excursion: f64,
}

impl Trajectory {
    pub fn end(&self) -> [f64; 2] {
        self.points[self.points.len() - 1]
    }

    /// `Φ(t, x0)` by cubic Hermite interpolation between samples.
    pub fn at(&self, t: f64) -> Result<[f64; 2]> {
        let (a, b) = (self.times[0], self.times[self.times.len() - 1]);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if t < lo - 1e-12 * (hi - lo).abs() || t > hi + 1e-12 * (hi - lo).abs() {
            return Err(Error::InvalidArgument("time outside the trajectory"));
        }
        if self.times.len() == 1 {
            return Ok(self.seed);
        }
        let s = ((t - a) / self.dt).clamp(0.0, (self.times.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.times.len() - 2);
        let (h, u) = (self.dt, s - i as f64);
        let (h00, h10) = (2.0 * u.powi(3) - 3.0 * u * u + 1.0, u.powi(3) - 2.0 * u * u + u);
        let (h01, h11) = (-2.0 * u.powi(3) + 3.0 * u * u, u.powi(3) - u * u);
        let (p0, p1, v0, v1) = (self.points[i], self.points[i + 1], self.velocities[i], self.velocities[i + 1]);
        Ok([0, 1].map(|c| h00 * p0[c] + h10 * h * v0[c] + h01 * p1[c] + h11 * h * v1[c]))
    }
}

fn domain_scale(d: &Domain) -> f64 {
    match *d {
        Domain::Torus { period } => period,
        Domain::Disk { radius } => radius,
        Domain::Annulus { r_out, .. } => r_out,
    }
}

/// Radial projection onto the closed domain; returns the excursion.
fn project_to_domain(d: &Domain, p: &mut [f64; 2]) -> f64 {
    let r = p[0].hypot(p[1]);
    let target = match *d {
        Domain::Torus { .. } => return 0.0,
        Domain::Disk { radius } => r.min(radius),
        Domain::Annulus { r_in, r_out } => r.clamp(r_in, r_out),
    };
    if target == r || r == 0.0 {
        return 0.0;
    }
    p[0] *= target / r;
    p[1] *= target / r;
    (r - target).abs()
}

/// RK4 for `Φ` from `t0 = snapshot time 0` to `t_end` with `n` equal steps.
pub fn integrate_with_steps(snaps: &Snapshots, x0: [f64; 2], t_end: f64, n: usize) -> Result<Trajectory> {
    let n = n.max(1);
    let dt = t_end / n as f64;
    let tol = FALLBACK_TOL * domain_scale(snaps.domain());
    let mut p = x0;
    let mut v = snaps.velocity(0.0, p)?;
    let mut tr = Trajectory {
        seed: x0,
        times: vec![0.0],
        points: vec![x0],
        velocities: vec![v],
        dt,
        halving_error: 0.0,
        fallbacks: 0,
        max_excursion: 0.0,
    };
    let add = |p: [f64; 2], k: [f64; 2], s: f64| [p[0] + s * k[0], p[1] + s * k[1]];
    for i in 0..n {
        let t = i as f64 * dt;
        let k1 = v;
        let k2 = snaps.velocity(t + 0.5 * dt, add(p, k1, 0.5 * dt))?;
        let k3 = snaps.velocity(t + 0.5 * dt, add(p, k2, 0.5 * dt))?;
        let k4 = snaps.velocity(t + dt, add(p, k3, dt))?;
        for c in 0..2 {
            p[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        let excursion = project_to_domain(snaps.domain(), &mut p);
        if excursion > 0.0 {
            if excursion > tol {
                return Err(Error::LeftDomain(excursion));
            }
            tr.fallbacks += 1;
            tr.max_excursion = tr.max_excursion.max(excursion);
        }
        let t_next = if i + 1 == n { t_end } else { (i + 1) as f64 * dt };
        v = snaps.velocity(t_next, p)?;
        tr.times.push(t_next);
        tr.points.push(p);
        tr.velocities.push(v);
    }
    Ok(tr)
}

/// `Φ(t, x0)` for `t` between 0 and `t_end` (either sign), with
/// `dt ≤ min(snapshot spacing, 1e-3/max|u|)` and halving until two
/// consecutive runs agree to [`TRAJECTORY_TOL`] (at most four times).
pub fn integrate_trajectory(snaps: &Snapshots, x0: [f64; 2], t_end: f64) -> Result<Trajectory> {
    if !t_end.is_finite() {
        return Err(Error::InvalidArgument("end time must be finite"));
    }
    let dt_max = snaps.spacing().min(1e-3 / snaps.max_speed().max(f64::MIN_POSITIVE));
    let mut n = ((t_end.abs() / dt_max).ceil() as usize).max(1);
    let mut coarse = integrate_with_steps(snaps, x0, t_end, n)?;
    for _ in 0..MAX_HALVINGS {
        n *= 2;
        let mut fine = integrate_with_steps(snaps, x0, t_end, n)?;
        let err = coarse
            .points
            .iter()
            .zip(fine.points.iter().step_by(2))
            .fold(0.0f64, |a, (p, q)| a.max((p[0] - q[0]).hypot(p[1] - q[1])));
        fine.halving_error = err;
        coarse = fine;
        if err <= TRAJECTORY_TOL {
            break;
        }
    }
    Ok(coarse)
}

/// Taylor coefficients `T_k = D^{k−1}u(0, x)/k!` at a set of seeds.
#[derive(Debug, Clone)]
pub struct TaylorFlow {
    pub seeds: Vec<[f64; 2]>,
    /// `coeffs[i][k−1] = T_k(seeds[i])` for `k = 1..=K+1`.
    pub coeffs: Vec<Vec<[f64; 2]>>,
}

impl TaylorFlow {
    pub fn new(derivs: &KatoDerivatives, seeds: &[[f64; 2]]) -> Self {
        let mut fact = 1.0;
        let mut coeffs = vec![Vec::with_capacity(derivs.fields.len()); seeds.len()];
        for (j, f) in derivs.fields.iter().enumerate() {
            fact *= (j + 1) as f64;
            let ev = PointEvaluator::from_vector(f);
            for (c, &x) in coeffs.iter_mut().zip(seeds) {
                let v = ev.eval2(x);
                c.push([v[0] / fact, v[1] / fact]);
            }
        }
        Self { seeds: seeds.to_vec(), coeffs }
    }

    /// Highest truncation order available.
    pub fn max_order(&self) -> usize {
        self.coeffs.first().map_or(0, |c| c.len()).saturating_sub(1)
    }

    /// `x0 + Σ_{k=1}^{K+1} t^k T_k(x0)` for seed `i`.
    pub fn eval(&self, i: usize, t: f64, order: usize) -> Result<[f64; 2]> {
        if order > self.max_order() {
            return Err(Error::InsufficientOrder { requested: order, available: self.max_order() });
        }
        let mut p = self.seeds[i];
        let mut tk = 1.0;
        for c in &self.coeffs[i][..=order] {
            tk *= t;
            p[0] += tk * c[0];
            p[1] += tk * c[1];
        }
        Ok(p)
    }
}

/// Truncated Taylor series of `Φ(t, x0)` of order `K` (using `D^0..D^K u`).
pub fn taylor_flow(derivs: &KatoDerivatives, x0: [f64; 2], t: f64, order: usize) -> Result<[f64; 2]> {
    if order > derivs.order() {
        return Err(Error::InsufficientOrder { requested: order, available: derivs.order() });
    }
    TaylorFlow::new(derivs, &[x0]).eval(0, t, order)
}

/// One row of a Taylor-versus-ODE table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorErrorRow {
    pub seed_id: usize,
    pub t: f64,
    pub order: usize,
    pub ode: [f64; 2],
    pub taylor: [f64; 2],
    pub abs_err: f64,
}

/// Rows for orders `0..=max_order` at time `t` for every trajectory.
pub fn taylor_error_table(flow: &TaylorFlow, trajectories: &[Trajectory], t: f64, max_order: usize) -> Result<Vec<TaylorErrorRow>> {
    let mut rows = Vec::new();
    for (i, tr) in trajectories.iter().enumerate() {
        let ode = tr.at(t)?;
        for order in 0..=max_order {
            let taylor = flow.eval(i, t, order)?;
            rows.push(TaylorErrorRow { seed_id: i, t, order, ode, taylor, abs_err: (ode[0] - taylor[0]).hypot(ode[1] - taylor[1]) });
        }
    }
    Ok(rows)
}

/// Orders with `‖D^k u‖ < UNDERFLOW·‖y‖^{k+1}` are left out of the radius
/// fit (roundoff of a vanishing ladder scales like the ladder itself).
pub const UNDERFLOW: f64 = 1e-13;
/// Smallest ladder order accepted by [`radius_estimate`].
pub const RADIUS_MIN_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    /// `1/limsup (‖D^k u‖/k!)^{1/k}` from a log-linear fit over `k ≥ 2`;
    /// `∞` when the ladder vanishes.
    pub empirical: f64,
    /// `1/(C_Ω L ‖y‖_surrogate)`.
    pub bound: f64,
    /// Number of orders in the fit.
    pub fit_points: usize,
}

/// Empirical radius of the time series and the constructive lower bound.
pub fn radius_estimate(derivs: &KatoDerivatives, c_omega: f64, l_star: f64) -> Result<RadiusEstimate> {
    if derivs.order() < RADIUS_MIN_ORDER {
        return Err(Error::InsufficientOrder { requested: RADIUS_MIN_ORDER, available: derivs.order() });
    }
    let ynorm = derivs.y.surrogate_norm();
    let bound = 1.0 / (c_omega * l_star * ynorm);
    let mut fact = 1.0;
    let mut pts = Vec::new();
    for (k, n) in derivs.norms().into_iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        if k >= 2 && n >= UNDERFLOW * ynorm.powi(k as i32 + 1) {
            pts.push((k as f64, (n / fact).ln()));
        }
    }
    let empirical = match pts.len() {
        0 => f64::INFINITY,
        1 => (-pts[0].1 / pts[0].0).exp(),
        m => {
            let m = m as f64;
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
            let (mx, my) = (sx / m, sy / m);
            let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
            (-sxy / sxx).exp()
        }
    };
    Ok(RadiusEstimate { empirical, bound, fit_points: pts.len() })
}
