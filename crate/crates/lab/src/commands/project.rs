use crate::output::{OutDir, Table};
use crate::report::Gate;
use crate::{ExperimentConfig, LabResult, Report};
use aht_core::hodge::{leray_project, projection_tolerance};
use aht_core::{Grid2D, VectorField};
use std::sync::Arc;

/// Coarse-grid defect below which the doubling factor is not gated;
/// a field the grid already resolves has no O(h²) error to track.
pub const DOUBLING_FLOOR: f64 = 1e-8;

/// Relative defects of `P y` on one grid.
struct Defects {
    div: f64,
    idempotence: f64,
    curl: f64,
    normal: f64,
    y_norm: f64,
}

fn defects(y: &VectorField) -> LabResult<(Defects, aht_core::hodge::Projection)> {
    let n = y.surrogate_norm().max(f64::MIN_POSITIVE);
    let pr = leray_project(y)?;
    let uu = leray_project(&pr.u)?.u;
    let normal = if y.grid().domain().is_torus() { 0.0 } else { pr.u.normal_trace()?.max_abs() };
    let d = Defects {
        div: pr.u.divergence().max_abs() / n,
        idempotence: uu.sub(&pr.u)?.max_abs() / n,
        curl: pr.u.curl().sub(&y.curl())?.max_abs() / n,
        normal: normal / n,
        y_norm: n,
    };
    Ok((d, pr))
}

fn half(cfg: &ExperimentConfig, g: &Arc<Grid2D>) -> Option<[usize; 2]> {
    let (n1, n2) = g.resolution();
    let r = [n1 / 2, n2 / 2];
    (!g.domain().is_torus() && r[0] >= 8 && r[1] >= 8 && r[1] % 2 == 0 && cfg.grid_at(r).is_ok()).then_some(r)
}

/// Projects the initial datum and checks divergence, idempotence, curl
/// preservation and tangency; on disk and annulus also the decay of the
/// divergence defect against the half-resolution grid.
pub fn project(cfg: &ExperimentConfig, mut out: OutDir) -> LabResult<Report> {
    let g = cfg.grid()?;
    let mut rep = Report::new("project", &cfg.name, cfg.constants(&g)?);
    let y = cfg.initial_field(&g)?;
    let (d, pr) = defects(&y)?;
    let tol = projection_tolerance(&g);
    rep.metric("y_surrogate", d.y_norm);
    rep.metric("u_over_y_sup", pr.u.max_abs() / y.max_abs().max(f64::MIN_POSITIVE));
    rep.metric("identity_defect", pr.u.sub(&y)?.max_abs() / y.max_abs().max(f64::MIN_POSITIVE));
    rep.metric("compatibility", pr.compatibility);
    rep.metric("tolerance", tol);
    rep.gate(Gate::at_most("divergence", d.div, tol));
    rep.gate(Gate::at_most("idempotence", d.idempotence, 2.0 * tol));
    rep.gate(Gate::at_most("curl_preservation", d.curl, tol));
    if !g.domain().is_torus() {
        rep.gate(Gate::at_most("normal_trace", d.normal, tol));
    }
    let mut levels = Table::new("projection", &["n1", "n2", "divergence", "idempotence", "curl", "normal_trace", "tolerance"]);
    let mut row = |g: &Arc<Grid2D>, d: &Defects| {
        let (n1, n2) = g.resolution();
        levels.push(vec![n1.into(), n2.into(), d.div.into(), d.idempotence.into(), d.curl.into(), d.normal.into(), projection_tolerance(g).into()]);
    };
    if let Some(r) = half(cfg, &g) {
        let gh = cfg.grid_at(r)?;
        let (dh, _) = defects(&cfg.initial_field(&gh)?)?;
        row(&gh, &dh);
        rep.metric("divergence_half", dh.div);
        rep.metric("divergence_doubling_factor", dh.div / d.div);
        if dh.div > DOUBLING_FLOOR {
            rep.gate(Gate::at_least("divergence_doubling_factor", dh.div / d.div, 3.5));
        }
    }
    row(&g, &d);
    out.table(&levels)?;
    out.table(&super::field_table("field", &[("y", &y), ("u", &pr.u)], &[("p", &pr.p)]))?;
    rep.finish(out)
}
