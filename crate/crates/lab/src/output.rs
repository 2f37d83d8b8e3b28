//! Tables written as CSV with a JSON mirror. Floats use the shortest
//! round-trip exponent form, so identical runs give identical bytes.

use crate::LabResult;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_nan() => "nan".into(),
            Cell::Float(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Float(x) => format!("{x:e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> LabResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv))?;
        }
        w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
    }
}

/// Output directory that records what was written.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    pub files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> LabResult<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> LabResult<()> {
        std::fs::write(self.root.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// `<name>.csv` and its mirror `<name>.json`.
    pub fn table(&mut self, t: &Table) -> LabResult<()> {
        self.write(&format!("{}.csv", t.name), &t.to_csv()?)?;
        self.json(&format!("{}.json", t.name), t)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> LabResult<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Non-reproducible metadata, kept out of the tables.
    pub fn sidecar(&mut self, command: &str) -> LabResult<()> {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = serde_json::json!({ "command": command, "unix_time": secs, "version": crate::VERSION });
        self.json("meta.json", &meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_formatting() {
        let mut t = Table::new("x", &["k", "v", "s"]);
        t.push(vec![3usize.into(), 0.1.into(), "a,b".into()]);
        t.push(vec![Cell::Int(-1), f64::NAN.into(), f64::INFINITY.into()]);
        t.push(vec![0usize.into(), 1e-20.into(), 2.5e3.into()]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "k,v,s\n3,1e-1,\"a,b\"\n-1,nan,inf\n0,1e-20,2.5e3\n");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, -2.2250738585072014e-308] {
            assert_eq!(Cell::Float(x).csv().parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_mirror_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path()).unwrap();
        let mut t = Table::new("tab", &["a"]);
        t.push(vec![1.5.into()]);
        out.table(&t).unwrap();
        assert_eq!(out.files, ["tab.csv", "tab.json"]);
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("tab.json")).unwrap()).unwrap();
        assert_eq!(v["rows"][0][0], 1.5);
    }
}
