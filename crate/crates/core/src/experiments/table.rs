use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    /// Shortest scientific form that parses back to the same f64.
    fn render(&self, out: &mut String) {
        match self {
            Cell::Num(v) => write!(out, "{v:e}").unwrap(),
            Cell::Int(v) => write!(out, "{v}").unwrap(),
            Cell::Text(s) => out.push_str(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
}

/// A named result table with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        let mut buf = String::new();
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| {
                    buf.clear();
                    c.render(&mut buf);
                    buf.clone()
                })
                .collect();
            w.write_record(&fields)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `<dir>/<scenario>_<name>.csv` and returns the path.
    pub fn write_csv(&self, dir: &Path, scenario: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{scenario}_{}.csv", self.name));
        std::fs::write(&path, self.to_csv_string()?)?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Content hash in the style of a git blob id (header "blob <len>\0"),
/// with SHA-256.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

/// JSON sidecar accompanying a set of tables.
#[derive(Clone, Debug, Serialize)]
pub struct Sidecar<'a, C: Serialize> {
    pub config: &'a C,
    pub input_hash: String,
    pub tool_version: &'static str,
    pub tables: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl<'a, C: Serialize> Sidecar<'a, C> {
    pub fn new(config: &'a C, tables: &[Table], wall_clock_seconds: f64) -> Result<Self> {
        let canonical = serde_json::to_vec(config)?;
        Ok(Self {
            config,
            input_hash: content_hash(&canonical),
            tool_version: env!("CARGO_PKG_VERSION"),
            tables: tables.iter().map(|t| t.name.clone()).collect(),
            wall_clock_seconds,
        })
    }

    pub fn write(&self, dir: &Path, scenario: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{scenario}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["a", "b", "c"]);
        t.push(vec![0.1.into(), 3usize.into(), "x".into()]);
        t.push(vec![f64::NAN.into(), 0usize.into(), "y".into()]);
        assert_eq!(t.to_csv_string().unwrap(), "a,b,c\n1e-1,3,x\nNaN,0,y\n");
    }

    #[test]
    fn git_style_hash_of_empty_blob() {
        // sha256 of "blob 0\0"
        assert_eq!(
            content_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }

    proptest! {
        #[test]
        fn numbers_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let mut s = String::new();
            Cell::Num(v).render(&mut s);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
