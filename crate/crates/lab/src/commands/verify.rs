use crate::output::{OutDir, Table};
use crate::report::Gate;
use crate::{ExperimentConfig, LabResult, Report};
use aht_core::combinatorics::{find_l, gamma, upsilon_sum, verify_bounds, CoefficientTable, Family};
use num_bigint::BigInt;

/// Sweeps Chemin's lemma, certifies every coefficient family, and runs the
/// γ(L) pipeline with the constants of the configured grid.
pub fn verify(cfg: &ExperimentConfig, mut out: OutDir) -> LabResult<Report> {
    let g = cfg.grid()?;
    let consts = cfg.constants(&g)?;
    let mut rep = Report::new("verify", &cfg.name, consts);
    let v = &cfg.verify;

    let mut ut = Table::new("upsilon", &["s", "m", "value", "value_f64", "bound", "holds"]);
    let mut chemin = true;
    for s in 1..=v.s_max {
        for m in 0..=v.m_max {
            let u = upsilon_sum(s, m)?;
            chemin &= u.holds();
            let f = |q: &num_rational::BigRational| num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN);
            ut.push(vec![s.into(), m.into(), u.value.to_string().into(), f(&u.value).into(), u.bound.to_string().into(), u.holds().into()]);
        }
    }
    out.table(&ut)?;
    rep.gate(Gate::check("chemin_lemma", chemin));

    let table = CoefficientTable::generate(v.series_max, v.kernel_max)?;
    let report = verify_bounds(&table);
    let mut ct = Table::new("coefficients", &["family", "k", "s", "alpha", "value", "bound", "ratio", "passed"]);
    for e in &table.entries {
        let alpha = e.alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        ct.push(vec![e.family.name().into(), e.k.into(), e.s.into(), alpha.into(), e.value.to_string().into(), e.bound.to_string().into(), e.ratio_f64().into(), e.passes().into()]);
    }
    out.table(&ct)?;
    let mut ft = Table::new("families", &["family", "checked", "failures", "worst_ratio"]);
    for f in &report.families {
        let worst = num_traits::ToPrimitive::to_f64(&f.worst_ratio).unwrap_or(f64::NAN);
        ft.push(vec![f.family.name().into(), f.checked.into(), f.failures.len().into(), worst.into()]);
        rep.gate(Gate::at_most(&format!("bounds_{}", f.family.name()), f.failures.len() as f64, 0.0));
        rep.metric(&format!("worst_ratio_{}", f.family.name()), worst);
    }
    out.table(&ft)?;
    let one = BigInt::from(1);
    if v.kernel_max >= 1 {
        rep.gate(Gate::check("c_kernel_1_1_is_one", table.get(Family::Ckr, 1, &[1]) == Some(&one)));
    }
    if v.series_max >= 1 {
        rep.gate(Gate::check("c1_1_00_is_one", table.get(Family::C1, 1, &[0, 0]) == Some(&one)));
    }

    let l0 = 1.5 * consts.l_min();
    let mut gt = Table::new("gamma", &["L", "gamma", "gamma_kmax_double"]);
    let (mut prev, mut monotone, mut stable) = (f64::INFINITY, true, 0.0f64);
    for j in 0..v.doublings {
        let l = l0 * 2f64.powi(j as i32);
        let a = gamma(l, &consts, v.k_max)?;
        let b = gamma(l, &consts, 2 * v.k_max)?;
        monotone &= a.is_finite() && a <= prev;
        stable = stable.max((a - b).abs() / a);
        prev = a;
        gt.push(vec![l.into(), a.into(), b.into()]);
    }
    out.table(&gt)?;
    rep.gate(Gate::check("gamma_finite_nonincreasing", monotone));
    rep.metric("gamma_truncation_change", stable);
    let ls = find_l(&consts)?;
    rep.metric("l_star", ls.l);
    rep.metric("gamma_l_star", ls.gamma);
    rep.metric("radius_factor", ls.radius_factor);
    rep.gate(Gate::at_most("gamma_at_l_star", ls.gamma, 1.0 / consts.c_r));
    rep.finish(out)
}
