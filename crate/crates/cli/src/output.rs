//! Tabular data files: CSV with a `# key=value` header block, or JSON lines
//! with a leading metadata object.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};
use squeeze::observables::ObservableSeries;

use crate::config::Format;

/// Column order of observable series files.
pub const SERIES_COLUMNS: [&str; 12] = [
    "t",
    "mean_x",
    "mean_y",
    "mean_z",
    "var_y",
    "var_z",
    "cov_zy",
    "xi2",
    "m_xy",
    "var_y_given_z",
    "n_traj",
    "err_xi2",
];

/// Numeric table; missing or non-finite cells are written empty (CSV) or
/// `null` (JSON).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn from_series(series: &ObservableSeries) -> Self {
        let mut t = Table::new(&SERIES_COLUMNS).meta("n_sites", series.n_sites);
        for r in &series.rows {
            let m = &r.moments;
            t.push(vec![
                r.t,
                m.mean[0],
                m.mean[1],
                m.mean[2],
                m.var_y(),
                m.var_z(),
                m.cov_zy(),
                r.xi2.unwrap_or(f64::NAN),
                r.m_xy,
                r.var_y_given_z.unwrap_or(f64::NAN),
                r.n_traj as f64,
                r.err_xi2,
            ]);
        }
        t
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        match format {
            Format::Csv => {
                for (k, v) in &self.meta {
                    writeln!(f, "# {k}={v}")?;
                }
                let mut w = csv::Writer::from_writer(f);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(|v| if v.is_finite() { v.to_string() } else { String::new() }))?;
                }
                w.flush()?;
            }
            Format::Jsonl => {
                let meta: Map<String, Value> =
                    self.meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
                writeln!(f, "{}", json!({ "meta": meta }))?;
                for row in &self.rows {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.clone(), if v.is_finite() { json!(v) } else { Value::Null }))
                        .collect();
                    writeln!(f, "{}", Value::Object(obj))?;
                }
            }
        }
        Ok(())
    }

    /// Reads a CSV table written by [`Table::write`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let mut meta = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            let Some(rest) = line.strip_prefix('#') else { break };
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push((k.to_string(), v.to_string()));
            }
        }
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
        let columns: Vec<String> = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|c| if c.is_empty() { Ok(f64::NAN) } else { c.parse::<f64>() })
                .collect::<std::result::Result<Vec<_>, _>>()
                .with_context(|| format!("{}: row {}", path.display(), i + 1))?;
            if row.len() != columns.len() {
                bail!("{}: row {} has {} cells for {} columns", path.display(), i + 1, row.len(), columns.len());
            }
            rows.push(row);
        }
        Ok(Table { meta, columns, rows })
    }
}
