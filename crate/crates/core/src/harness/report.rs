use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TrainConfig;
use crate::error::Result;

/// A labelled table of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub values: Vec<f64>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>) {
        self.rows.push(TableRow {
            label: label.into(),
            values,
        });
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.rows.iter().find(|r| r.label == label).map(|r| r.values.as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.label);
            for v in &r.values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Columns of numbers for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Whitespace-separated columns with a `#` header, as read by gnuplot.
    pub fn to_dat(&self) -> String {
        let mut out = format!("# {}\n", self.columns.join(" "));
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Everything a run produced, with a content fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<TrainConfig>,
    /// Content hashes of the inputs (datasets, weights).
    pub inputs: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub series: Vec<Series>,
    pub fingerprint: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(kind: &str, config: Option<&TrainConfig>) -> Self {
        Self {
            kind: kind.into(),
            config: config.cloned(),
            inputs: BTreeMap::new(),
            tables: Vec::new(),
            series: Vec::new(),
            fingerprint: String::new(),
        }
    }

    pub fn input(&mut self, name: &str, content: &[u8]) {
        self.inputs.insert(name.into(), sha256_hex(content));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Sets the fingerprint: the first 40 hex digits of the SHA-256 of the
    /// report serialized without it.
    pub fn seal(&mut self) {
        self.fingerprint.clear();
        let body = serde_json::to_vec(self).expect("report serializes");
        self.fingerprint = sha256_hex(&body)[..40].to_string();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `report.json`, one CSV per table and one `.dat` per series.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, text: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            written.push(path);
            Ok(())
        };
        put("report.json".into(), self.to_json())?;
        for t in &self.tables {
            put(format!("{}.csv", t.name), t.to_csv())?;
        }
        for s in &self.series {
            put(format!("{}.dat", s.name), s.to_dat())?;
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_tracks_content() {
        let mut a = Report::new("x", None);
        let mut t = Table::new("t", &["v"]);
        t.push("row", vec![1.5]);
        a.tables.push(t);
        a.seal();
        let mut b = a.clone();
        b.seal();
        assert_eq!(a.fingerprint, b.fingerprint);
        assert_eq!(a.fingerprint.len(), 40);
        b.tables[0].rows[0].values[0] = 1.6;
        b.seal();
        assert_ne!(a.fingerprint, b.fingerprint);
        assert_eq!(a.tables[0].to_csv(), "label,v\nrow,1.5\n");
    }
}
