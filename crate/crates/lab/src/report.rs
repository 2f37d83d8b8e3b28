//! Gated experiment reports.

use crate::output::{OutDir, Table};
use crate::LabResult;
use aht_core::combinatorics::Constants;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Gate {
    /// Passes iff `value ≤ threshold` (NaN fails).
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::AtMost, threshold, passed: value <= threshold }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::AtLeast, threshold, passed: value >= threshold }
    }

    /// A yes/no check reported as `1 ≥ 1`.
    pub fn check(name: &str, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsBlock {
    /// Surrogate-norm estimate, not the Hölder operator norm.
    pub surrogate_c_omega: f64,
    pub c_r: f64,
    pub c_rho: f64,
    pub c_gamma: f64,
}

impl From<Constants> for ConstantsBlock {
    fn from(c: Constants) -> Self {
        Self { surrogate_c_omega: c.c_omega, c_r: c.c_r, c_rho: c.c_rho, c_gamma: c.c_gamma }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub name: String,
    pub version: String,
    pub constants: ConstantsBlock,
    pub metrics: BTreeMap<String, f64>,
    pub gates: Vec<Gate>,
    pub files: Vec<String>,
}

impl Report {
    pub fn new(command: &str, name: &str, constants: Constants) -> Self {
        Self {
            command: command.into(),
            name: name.into(),
            version: crate::VERSION.into(),
            constants: constants.into(),
            metrics: BTreeMap::new(),
            gates: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    pub fn gate(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn find_gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn gate_table(&self) -> Table {
        let mut t = Table::new("gates", &["gate", "value", "relation", "threshold", "passed"]);
        for g in &self.gates {
            let rel = match g.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            t.push(vec![g.name.as_str().into(), g.value.into(), rel.into(), g.threshold.into(), g.passed.into()]);
        }
        t
    }

    /// Writes `gates.csv`/`gates.json`, `report.json` and the sidecar.
    pub fn finish(mut self, mut out: OutDir) -> LabResult<Self> {
        out.table(&self.gate_table())?;
        self.files = out.files.clone();
        self.files.push("report.json".into());
        out.json("report.json", &self)?;
        out.sidecar(&self.command)?;
        Ok(self)
    }

    /// One line per gate.
    pub fn summary(&self) -> String {
        let mut s = format!("{} [{}] {}\n", self.command, self.name, if self.passed() { "PASS" } else { "FAIL" });
        for g in &self.gates {
            let rel = if g.relation == Relation::AtMost { "<=" } else { ">=" };
            s.push_str(&format!("  {} {}: {:.3e} {rel} {:.3e}\n", if g.passed { "ok  " } else { "FAIL" }, g.name, g.value, g.threshold));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_semantics() {
        assert!(Gate::at_most("a", 1.0, 1.0).passed);
        assert!(!Gate::at_most("a", f64::NAN, 1.0).passed);
        assert!(!Gate::at_least("a", 0.5, 1.0).passed);
        assert!(Gate::check("a", true).passed && !Gate::check("a", false).passed);
    }
}
