//! The five experiment commands. Each writes its tables into the output
//! directory and returns a gated [`Report`].

mod evolve;
mod kato;
mod project;
mod taylor;
mod verify;

pub use evolve::evolve;
pub use kato::kato;
pub use project::project;
pub use taylor::taylor;
pub use verify::verify;

use crate::output::{OutDir, Table};
use crate::{ExperimentConfig, LabResult, Report};
use aht_core::{ScalarField, VectorField};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Project,
    Evolve,
    Kato,
    Taylor,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Project => "project",
            Command::Evolve => "evolve",
            Command::Kato => "kato",
            Command::Taylor => "taylor",
            Command::Verify => "verify",
        }
    }
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> LabResult<Report> {
    let dir = OutDir::create(out)?;
    match cmd {
        Command::Project => project(cfg, dir),
        Command::Evolve => evolve(cfg, dir),
        Command::Kato => kato(cfg, dir),
        Command::Taylor => taylor(cfg, dir),
        Command::Verify => verify(cfg, dir),
    }
}

/// Node coordinates followed by the given vector and scalar fields.
pub(crate) fn field_table(name: &str, vectors: &[(&str, &VectorField)], scalars: &[(&str, &ScalarField)]) -> Table {
    let mut cols = vec!["x".to_string(), "y".to_string()];
    for (n, _) in vectors {
        cols.push(format!("{n}_1"));
        cols.push(format!("{n}_2"));
    }
    cols.extend(scalars.iter().map(|(n, _)| n.to_string()));
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(name, &refs);
    let grid = vectors.first().map(|v| v.1.grid()).or(scalars.first().map(|s| s.1.grid())).expect("at least one field");
    for k in 0..grid.len() {
        let p = grid.point(k);
        let mut row = vec![p[0].into(), p[1].into()];
        for (_, v) in vectors {
            let a = v.at(k);
            row.push(a[0].into());
            row.push(a[1].into());
        }
        row.extend(scalars.iter().map(|(_, s)| s.values()[k].into()));
        t.push(row);
    }
    t
}
