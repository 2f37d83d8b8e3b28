use crate::output::{OutDir, Table};
use crate::report::Gate;
use crate::config::InitialSpec;
use crate::{ExperimentConfig, LabResult, Report};
use aht_core::dynamics::{cost_monotone, run, AhtState, TestBattery};

/// Largest rearrangement drift accepted.
pub const DRIFT_TOL: f64 = 5e-3;
/// Largest dissipation residual relative to the kinetic energy.
pub const DISSIPATION_TOL: f64 = 1e-3;
/// Filter energy removed per unit time, relative to `∫|y0|²`.
pub const FILTER_TOL: f64 = 1e-6;
/// Bound on the first component of an IPM-embedded run.
pub const IPM_TOL: f64 = 1e-12;
/// Relative size treated as roundoff.
pub const ROUNDOFF: f64 = 1e3 * f64::EPSILON;
/// Required decay of the transport cost over a rotation run.
pub const COST_DECAY: f64 = 0.5;

/// Evolves the datum and tabulates every diagnostic at the sample times.
pub fn evolve(cfg: &ExperimentConfig, mut out: OutDir) -> LabResult<Report> {
    let g = cfg.grid()?;
    let mut rep = Report::new("evolve", &cfg.name, cfg.constants(&g)?);
    let y0 = cfg.initial_field(&g)?;
    let s0 = AhtState::new(y0.clone())?;
    let battery = TestBattery::for_field(&y0, cfg.run.battery_seed);
    let res = run(&s0, cfg.run.t_end, cfg.run.sample_every, &cfg.dynamics(), &battery)?;
    let mut t = Table::new(
        "diagnostics",
        &["t", "cost", "kinetic", "kinetic_integral", "dissipation_residual", "dissipation_ratio", "drift", "y1_sup", "y2_sup", "y1_l2", "y2_l2", "u_sup", "filter_removed", "steps"],
    );
    let opt = |x: Option<f64>| x.unwrap_or(f64::NAN).into();
    let mut prev = &res.initial.diag;
    let (mut worst_ratio, mut drift, mut removed, mut y1) = (None::<f64>, 0.0f64, 0.0f64, res.initial.diag.y_sup[0]);
    let mut kinetic = 0.0f64;
    for r in res.records() {
        let ratio = if std::ptr::eq(r, prev) { None } else { r.dissipation_ratio(prev) };
        if let Some(q) = ratio {
            worst_ratio = Some(worst_ratio.map_or(q, |w: f64| w.max(q)));
        }
        drift = drift.max(r.max_drift());
        removed += r.filter_removed.abs();
        kinetic = kinetic.max(r.kinetic);
        y1 = y1.max(r.y_sup[0]);
        t.push(vec![
            r.t.into(),
            opt(r.cost),
            r.kinetic.into(),
            opt(r.kinetic_integral),
            opt(r.dissipation_residual),
            opt(ratio),
            r.max_drift().into(),
            r.y_sup[0].into(),
            r.y_sup[1].into(),
            r.y_l2[0].into(),
            r.y_l2[1].into(),
            r.u_sup.into(),
            r.filter_removed.into(),
            r.steps.into(),
        ]);
        prev = r;
    }
    out.table(&t)?;
    let t_final = res.last().state.t;
    rep.metric("t_final", t_final);
    rep.metric("steps", res.steps as f64);
    rep.metric("converged", res.converged as u8 as f64);
    rep.gate(Gate::at_most("max_drift", drift, DRIFT_TOL));
    let rate = if t_final > 0.0 { removed / (t_final * y0.energy().max(f64::MIN_POSITIVE)) } else { 0.0 };
    rep.gate(Gate::at_most("filter_rate", rate, FILTER_TOL));
    if let (Some(j0), Some(j1)) = (res.initial.diag.cost, res.last().diag.cost) {
        rep.metric("cost_initial", j0);
        rep.metric("cost_final", j1);
        rep.gate(Gate::check("cost_monotone", cost_monotone(&res, 1e-12)));
        // without kinetic energy the ratio is roundoff over roundoff
        if let Some(w) = worst_ratio.filter(|_| kinetic > ROUNDOFF * y0.energy()) {
            rep.gate(Gate::at_most("dissipation_ratio", w, DISSIPATION_TOL));
        }
        if matches!(cfg.initial, InitialSpec::Rotation { .. }) {
            rep.gate(Gate::at_most("cost_decay", j1 / j0, COST_DECAY));
        }
    }
    if matches!(cfg.initial, InitialSpec::IpmEmbed { .. }) {
        rep.gate(Gate::at_most("ipm_first_component", y1, IPM_TOL));
    }
    if matches!(cfg.initial, InitialSpec::GradientSteady) {
        let change = res.last().state.y.sub(&y0)?.max_abs() / y0.max_abs();
        rep.gate(Gate::at_most("steady_change", change, 1e-10));
    }
    let last = &res.last().state;
    out.table(&super::field_table("final_field", &[("y", &last.y), ("u", &last.u)], &[]))?;
    rep.finish(out)
}
