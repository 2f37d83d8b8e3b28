use crate::output::{OutDir, Table};
use crate::report::Gate;
use crate::{ExperimentConfig, LabResult, Report};
use aht_core::dynamics::DynamicsConfig;
use aht_core::geometry::PointEvaluator;
use aht_core::hodge::projection_tolerance;
use aht_core::kato::{direct_du, evaluate_expr, fd_oracle_converged, kato_ladder, oracle_seeds, roundoff_floor, EvalContext, Locus, ORACLE_CAP};
use aht_core::symbolic::curl_series;

/// First-order identities: relative sup error on the torus.
pub const IDENTITY_TOL_TORUS: f64 = 1e-6;
/// First-order identities on disk and annulus.
pub const IDENTITY_TOL_POLAR: f64 = 1e-3;

/// `err/scale ≤ tol`, unless the reference itself is roundoff (steady
/// data), in which case the absolute error must stay under the floor.
fn relative_gate(name: &str, err: f64, scale: f64, floor: f64, tol: f64) -> Gate {
    if scale > floor {
        Gate::at_most(name, err / scale, tol)
    } else {
        Gate::at_most(name, err, floor)
    }
}

/// Agreement with the oracle required at level `k`.
pub fn oracle_tolerance(k: usize) -> f64 {
    if k <= 2 {
        0.02
    } else {
        0.05
    }
}

/// Builds the ladder, checks the first-order identities against the direct
/// construction and the ladder against the oracle along characteristics.
pub fn kato(cfg: &ExperimentConfig, mut out: OutDir) -> LabResult<Report> {
    let g = cfg.grid()?;
    let mut rep = Report::new("kato", &cfg.name, cfg.constants(&g)?);
    let y = cfg.initial_field(&g)?;
    let ladder = kato_ladder(&y, cfg.kato.order)?;
    let mut t = Table::new(
        "ladder",
        &["k", "norm", "div_residual", "curl_residual", "bc_residual", "circ_residual", "tolerance", "projection", "data_scale"],
    );
    t.push(vec![0usize.into(), ladder.fields[0].surrogate_norm().into(), 0.0.into(), 0.0.into(), 0.0.into(), 0.0.into(), 0.0.into(), 0.0.into(), 0.0.into()]);
    for r in &ladder.reports {
        let s = &r.residuals;
        t.push(vec![r.k.into(), r.norm.into(), s.div.into(), s.curl.into(), s.bc.into(), s.circ.into(), r.tolerance.into(), r.projection.into(), r.data_scale.into()]);
    }
    out.table(&t)?;

    // k = 1 identities
    let tol = if g.domain().is_torus() { IDENTITY_TOL_TORUS } else { IDENTITY_TOL_POLAR };
    let du = &ladder.fields[1];
    let direct = direct_du(&y)?;
    let ctx = EvalContext::new(y.clone(), ladder.fields[0].clone())?;
    let w = evaluate_expr(&curl_series(1)?, &ctx, Locus::Interior)?.scalar()?;
    let floor = roundoff_floor(y.surrogate_norm(), 1);
    rep.metric("projection_tolerance", projection_tolerance(&g));
    rep.gate(relative_gate("du_vs_direct", du.sub(&direct)?.max_abs(), direct.max_abs(), floor, tol));
    rep.gate(relative_gate("curl_du_identity", du.curl().sub(&w)?.max_abs(), w.max_abs(), floor, tol));

    if cfg.kato.oracle {
        let seeds = oracle_seeds(g.domain(), cfg.kato.oracle_points, cfg.kato.oracle_seed);
        let h0 = cfg.kato.oracle_step.unwrap_or(1e-2 / y.surrogate_norm().max(f64::MIN_POSITIVE));
        let mut t = Table::new("oracle", &["k", "point", "x", "y", "ladder_1", "ladder_2", "oracle_1", "oracle_2", "abs_err", "step"]);
        let dyn_cfg = DynamicsConfig { max_dt: None, ..cfg.dynamics() };
        for k in 1..=cfg.kato.order.min(ORACLE_CAP) {
            let (samples, h) = fd_oracle_converged(&y, &seeds, k, h0, cfg.kato.oracle_tol, cfg.kato.oracle_halvings, &dyn_cfg)?;
            let ev = PointEvaluator::from_vector(&ladder.fields[k]);
            let (mut num, mut den) = (0.0f64, 0.0f64);
            for (i, s) in samples.iter().enumerate() {
                let v = ev.eval2(s.seed);
                let e = (v[0] - s.value[0]).hypot(v[1] - s.value[1]);
                num = num.max(e);
                den = den.max(s.value[0].hypot(s.value[1]));
                t.push(vec![k.into(), i.into(), s.seed[0].into(), s.seed[1].into(), v[0].into(), v[1].into(), s.value[0].into(), s.value[1].into(), e.into(), h.into()]);
            }
            rep.gate(relative_gate(&format!("oracle_k{k}"), num, den, roundoff_floor(y.surrogate_norm(), k), oracle_tolerance(k)));
        }
        out.table(&t)?;
    }
    rep.finish(out)
}
