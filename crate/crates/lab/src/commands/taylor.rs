use crate::output::{OutDir, Table};
use crate::report::Gate;
use crate::{ExperimentConfig, LabResult, Report};
use aht_core::combinatorics::find_l;
use aht_core::dynamics::AhtState;
use aht_core::flowmap::{integrate_trajectory, radius_estimate, taylor_error_table, Snapshots, TaylorFlow};
use aht_core::kato::{kato_ladder, oracle_seeds};

/// Required error reduction per added order.
pub const DECAY_FACTOR: f64 = 0.5;
/// Fraction of points on which the reduction must hold for every order.
pub const DECAY_FRACTION: f64 = 0.9;

/// Compares the truncated time-Taylor series of the flow with integrated
/// trajectories and estimates the analyticity radius.
pub fn taylor(cfg: &ExperimentConfig, mut out: OutDir) -> LabResult<Report> {
    let g = cfg.grid()?;
    let consts = cfg.constants(&g)?;
    let mut rep = Report::new("taylor", &cfg.name, consts);
    let y = cfg.initial_field(&g)?;
    let ts = &cfg.taylor;
    let order = ts.order.max(1);
    let ladder = kato_ladder(&y, order.max(ts.radius_order))?;
    let t = ts.t.unwrap_or(0.1 / y.surrogate_norm().max(f64::MIN_POSITIVE));
    let state = AhtState::new(y.clone())?;
    let snaps = Snapshots::record(&state, 0.0, t, t / ts.snapshots as f64, &cfg.dynamics())?;
    let seeds = oracle_seeds(g.domain(), ts.points, ts.point_seed);
    let flow = TaylorFlow::new(&ladder, &seeds);
    let mut trajs = Vec::with_capacity(seeds.len());
    let mut halving = 0.0f64;
    for &x in &seeds {
        let tr = integrate_trajectory(&snaps, x, t)?;
        halving = halving.max(tr.halving_error);
        trajs.push(tr);
    }
    let rows = taylor_error_table(&flow, &trajs, t, order)?;
    let mut tab = Table::new("taylor", &["seed_id", "t", "K", "ode_x", "ode_y", "taylor_x", "taylor_y", "abs_err"]);
    for r in &rows {
        tab.push(vec![r.seed_id.into(), r.t.into(), r.order.into(), r.ode[0].into(), r.ode[1].into(), r.taylor[0].into(), r.taylor[1].into(), r.abs_err.into()]);
    }
    out.table(&tab)?;
    // decay from K to K+1 for K = 1..order−1, on every point
    let per_point = order + 1;
    let good = rows
        .chunks(per_point)
        .filter(|c| c[1..].windows(2).all(|w| w[1].abs_err <= DECAY_FACTOR * w[0].abs_err))
        .count();
    rep.metric("t", t);
    rep.metric("trajectory_halving_error", halving);
    rep.gate(Gate::at_least("geometric_decay_fraction", good as f64 / seeds.len() as f64, DECAY_FRACTION));
    rep.gate(Gate::check("exact_at_t0", (0..seeds.len()).all(|i| flow.eval(i, 0.0, order).map(|p| p == seeds[i]).unwrap_or(false))));

    let ls = find_l(&consts)?;
    let rad = radius_estimate(&ladder, consts.c_omega, ls.l)?;
    let mut rt = Table::new("radius", &["k", "norm", "norm_over_factorial"]);
    let mut fact = 1.0;
    for (k, n) in ladder.norms().into_iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        rt.push(vec![k.into(), n.into(), (n / fact).into()]);
    }
    out.table(&rt)?;
    rep.metric("l_star", ls.l);
    rep.metric("radius_empirical", rad.empirical);
    rep.metric("radius_bound", rad.bound);
    rep.metric("radius_fit_points", rad.fit_points as f64);
    rep.gate(Gate::at_least("radius_empirical_over_bound", rad.empirical / rad.bound, 1.0));
    rep.finish(out)
}
