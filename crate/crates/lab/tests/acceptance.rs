//! Acceptance suite: runs every config under `configs/acceptance` and prints
//! one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

use aht_lab::commands::{run, Command};
use aht_lab::report::Relation;
use aht_lab::{ExperimentConfig, Report};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

const KATO_BUDGET: Duration = Duration::from_secs(120);
const VERIFY_BUDGET: Duration = Duration::from_secs(300);
const REFINEMENT_FACTOR: f64 = 3.0;

const RUNS: &[(&str, Command)] = &[
    ("project_torus", Command::Project),
    ("project_disk", Command::Project),
    ("identity_torus", Command::Kato),
    ("identity_disk_s1", Command::Kato),
    ("identity_disk_s2", Command::Kato),
    ("identity_disk_s3", Command::Kato),
    ("kato_torus_s1", Command::Kato),
    ("kato_torus_s2", Command::Kato),
    ("kato_torus_s3", Command::Kato),
    ("taylor_torus_s1", Command::Taylor),
    ("taylor_torus_s2", Command::Taylor),
    ("taylor_torus_s3", Command::Taylor),
    ("verify_disk", Command::Verify),
    ("verify_annulus", Command::Verify),
    ("rotation_disk", Command::Evolve),
    ("rotation_disk_coarse", Command::Evolve),
    ("drift_torus", Command::Evolve),
    ("ipm_torus", Command::Evolve),
];

struct Outcome {
    report: Report,
    elapsed: Duration,
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/acceptance")
}

fn run_all(root: &Path) -> Result<BTreeMap<&'static str, Outcome>, String> {
    let mut out = BTreeMap::new();
    for &(name, cmd) in RUNS {
        let cfg = ExperimentConfig::load(&config_dir().join(format!("{name}.toml"))).map_err(|e| format!("{name}: {e}"))?;
        let start = Instant::now();
        let report = run(cmd, &cfg, &root.join(name)).map_err(|e| format!("{name}: {e}"))?;
        out.insert(name, Outcome { report, elapsed: start.elapsed() });
    }
    Ok(out)
}

/// Worst value of each named gate across `runs`; a missing gate fails.
fn gates(res: &BTreeMap<&str, Outcome>, runs: &[&str], gates: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut worst = Vec::new();
    for g in gates {
        let mut w: Option<f64> = None;
        for r in runs {
            let Some(gate) = res[r].report.find_gate(g) else {
                ok = false;
                w = Some(f64::NAN);
                continue;
            };
            ok &= gate.passed;
            let pick = match gate.relation {
                Relation::AtMost => f64::max,
                Relation::AtLeast => f64::min,
            };
            w = Some(w.map_or(gate.value, |v| if v.is_nan() { v } else { pick(v, gate.value) }));
        }
        worst.push(format!("{g}={:.3e}", w.unwrap_or(f64::NAN)));
    }
    (ok, worst.join(" "))
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).into_iter().flatten().flatten() {
        let p = entry.path();
        if p.is_dir() {
            files.extend(csv_files(&p));
        } else if p.extension().is_some_and(|e| e == "csv") {
            files.push(p);
        }
    }
    files.sort();
    files
}

fn main() -> ExitCode {
    let base = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let _ = std::fs::remove_dir_all(&base);
    let (first, second) = (base.join("run1"), base.join("run2"));
    let res = match run_all(&first) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance: error {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut lines: Vec<(usize, bool, String)> = Vec::new();

    let (ok, d) = gates(&res, &["project_torus", "project_disk"], &["divergence", "idempotence", "curl_preservation"]);
    let (ok_b, d_b) = gates(&res, &["project_disk"], &["normal_trace", "divergence_doubling_factor"]);
    lines.push((1, ok && ok_b, format!("{d} {d_b}")));

    let (ok_t, d_t) = gates(&res, &["identity_torus"], &["du_vs_direct", "curl_du_identity"]);
    let (ok_d, d_d) = gates(&res, &["identity_disk_s1", "identity_disk_s2", "identity_disk_s3"], &["du_vs_direct", "curl_du_identity"]);
    lines.push((2, ok_t && ok_d, format!("torus {d_t}; disk {d_d}")));

    let kato = ["kato_torus_s1", "kato_torus_s2", "kato_torus_s3"];
    let (ok, d) = gates(&res, &kato, &["oracle_k1", "oracle_k2", "oracle_k3"]);
    let t: Duration = kato.iter().map(|r| res[r].elapsed).sum();
    lines.push((3, ok && t <= KATO_BUDGET, format!("{d} runtime={:.1}s", t.as_secs_f64())));

    let (ok, d) = gates(&res, &["taylor_torus_s1", "taylor_torus_s2", "taylor_torus_s3"], &["geometric_decay_fraction", "exact_at_t0", "radius_empirical_over_bound"]);
    lines.push((4, ok, d));

    let (ok, d) = gates(&res, &["verify_disk"], &["chemin_lemma", "bounds_c1", "bounds_c2", "bounds_c3", "bounds_c4", "bounds_ckr", "c_kernel_1_1_is_one", "c1_1_00_is_one"]);
    let t = res["verify_disk"].elapsed;
    lines.push((5, ok && t <= VERIFY_BUDGET, format!("{d} runtime={:.1}s", t.as_secs_f64())));

    let (ok, d) = gates(&res, &["verify_disk", "verify_annulus"], &["gamma_finite_nonincreasing", "gamma_at_l_star"]);
    let ls: Vec<String> = ["verify_disk", "verify_annulus"].iter().map(|r| format!("{r} L*={:.4e}", res[r].report.metrics["l_star"])).collect();
    lines.push((6, ok, format!("{d} {}", ls.join(" "))));

    let (ok_r, d_r) = gates(&res, &["rotation_disk"], &["dissipation_ratio", "cost_monotone", "cost_decay"]);
    let fine = res["rotation_disk"].report.find_gate("dissipation_ratio").map_or(f64::NAN, |g| g.value);
    let coarse = res["rotation_disk_coarse"].report.find_gate("dissipation_ratio").map_or(f64::NAN, |g| g.value);
    let refine = coarse / fine;
    let (ok_dr, d_dr) = gates(&res, &["drift_torus"], &["max_drift"]);
    let (ok_i, d_i) = gates(&res, &["ipm_torus"], &["ipm_first_component"]);
    lines.push((7, ok_r && refine >= REFINEMENT_FACTOR && ok_dr && ok_i, format!("{d_r} refinement={refine:.2} {d_dr} {d_i}")));

    let det = match run_all(&second) {
        Ok(_) => {
            let (a, b) = (csv_files(&first), csv_files(&second));
            let rel = |p: &Path, root: &Path| p.strip_prefix(root).map(Path::to_path_buf).unwrap_or_default();
            let same_set = a.iter().map(|p| rel(p, &first)).eq(b.iter().map(|p| rel(p, &second)));
            let differing: Vec<String> = a
                .iter()
                .filter(|p| std::fs::read(p).ok() != std::fs::read(second.join(rel(p, &first))).ok())
                .map(|p| rel(p, &first).display().to_string())
                .collect();
            (same_set && differing.is_empty() && !a.is_empty(), format!("{} csv files compared, {} differ {}", a.len(), differing.len(), differing.join(" ")))
        }
        Err(e) => (false, format!("rerun error {e}")),
    };
    lines.push((8, det.0, det.1));

    let mut all = true;
    for (n, ok, detail) in &lines {
        all &= ok;
        println!("criterion {n}: {} {}", if *ok { "PASS" } else { "FAIL" }, detail.trim_end());
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
