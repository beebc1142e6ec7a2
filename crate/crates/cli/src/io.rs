//! Artifact writers and the matching readers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! reader here recovers the exact bits that were written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Output directory, created on first use.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    }

    /// Pretty JSON with a trailing newline.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Numerical(format!("cannot serialize {name}: {e}")))?;
        s.push('\n');
        self.write_text(name, &s)
    }

    pub fn write_table(&self, name: &str, table: &Table) -> CliResult<()> {
        self.write_text(name, &table.to_csv())
    }
}

/// A header plus string cells; the common currency of all CSV artifacts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        // Writes into memory cannot fail.
        w.write_record(&self.header).expect("in-memory csv");
        for r in &self.rows {
            w.write_record(r).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 cells")
    }

    pub fn from_csv(text: &str) -> CliResult<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| CliError::Config(format!("csv header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| CliError::Config(format!("csv row {}: {e}", i + 1)))?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_csv(&text)
    }

    pub fn column(&self, name: &str) -> CliResult<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("missing column {name:?}")))
    }

    pub fn f64_at(&self, row: usize, col: usize) -> CliResult<f64> {
        let cell = &self.rows[row][col];
        cell.parse::<f64>().map_err(|e| {
            CliError::Config(format!("row {}, column {:?}: {cell:?}: {e}", row + 1, self.header[col]))
        })
    }
}

pub fn fmt(v: f64) -> String {
    v.to_string()
}

/// `real`/`0`/`false` and `generated`/`1`/`true`, case-insensitive.
pub fn parse_label(s: &str) -> CliResult<bool> {
    match s.to_ascii_lowercase().as_str() {
        "generated" | "1" | "true" | "fake" => Ok(true),
        "real" | "0" | "false" => Ok(false),
        other => Err(CliError::Config(format!("label {other:?}: expected real or generated"))),
    }
}

pub fn label_name(generated: bool) -> &'static str {
    if generated {
        "generated"
    } else {
        "real"
    }
}

/// Rows of `id, <features…>, label`. Every column except `id` and `label` is a feature.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoints {
    pub feature_names: Vec<String>,
    pub ids: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl LabeledPoints {
    pub fn from_table(t: &Table) -> CliResult<Self> {
        let id = t.column("id")?;
        let label = t.column("label")?;
        let feats: Vec<usize> = (0..t.header.len()).filter(|&c| c != id && c != label).collect();
        if feats.is_empty() {
            return Err(CliError::Config("no feature columns besides id and label".into()));
        }
        if t.rows.is_empty() {
            return Err(CliError::Config("no data rows".into()));
        }
        let mut out = Self {
            feature_names: feats.iter().map(|&c| t.header[c].clone()).collect(),
            ids: Vec::with_capacity(t.rows.len()),
            points: Vec::with_capacity(t.rows.len()),
            labels: Vec::with_capacity(t.rows.len()),
        };
        for r in 0..t.rows.len() {
            let p = feats.iter().map(|&c| t.f64_at(r, c)).collect::<CliResult<Vec<f64>>>()?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config(format!("row {}: non-finite feature", r + 1)));
            }
            out.ids.push(t.rows[r][id].clone());
            out.points.push(p);
            out.labels.push(parse_label(&t.rows[r][label])?);
        }
        Ok(out)
    }

    pub fn to_table(&self) -> Table {
        let mut header = vec!["id".to_string()];
        header.extend(self.feature_names.iter().cloned());
        header.push("label".into());
        let mut t = Table::new(&header);
        for ((id, p), l) in self.ids.iter().zip(&self.points).zip(&self.labels) {
            let mut row = vec![id.clone()];
            row.extend(p.iter().map(|v| fmt(*v)));
            row.push(label_name(*l).into());
            t.push(row);
        }
        t
    }

    pub fn real_rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(|&i| !self.labels[i])
    }
}

/// `prefix0, prefix1, …`.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trips_exact_floats() {
        let vals = [0.1 + 0.2, -1e-300, 1.0 / 3.0, f64::MAX, 5e-324];
        let mut t = Table::new(&["id", "v"]);
        for (i, v) in vals.iter().enumerate() {
            t.push(vec![i.to_string(), fmt(*v)]);
        }
        let back = Table::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(back.f64_at(i, 1).unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn labeled_points_round_trip() {
        let lp = LabeledPoints {
            feature_names: numbered("x", 2),
            ids: vec!["a".into(), "b".into()],
            points: vec![vec![0.1, -2.5], vec![1e-17, 3.0]],
            labels: vec![false, true],
        };
        let back = LabeledPoints::from_table(&Table::from_csv(&lp.to_table().to_csv()).unwrap()).unwrap();
        assert_eq!(back, lp);
    }

    #[test]
    fn malformed_inputs_are_config_errors() {
        let t = Table::from_csv("id,x0,label\n0,abc,real\n").unwrap();
        assert!(matches!(LabeledPoints::from_table(&t), Err(CliError::Config(_))));
        let t = Table::from_csv("id,x0\n0,1\n").unwrap();
        assert!(LabeledPoints::from_table(&t).is_err());
        let t = Table::from_csv("id,x0,label\n0,1,maybe\n").unwrap();
        assert!(LabeledPoints::from_table(&t).is_err());
        assert!(Table::from_csv("a,b\n1,2,3\n").is_err());
    }
}
