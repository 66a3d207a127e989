//! Reading sample/series files and writing study outputs.
//!
//! Input files are CSV with an optional header; a plain
//! one-number-per-line file is the single-column case. Series files follow
//! the `date,value` convention: with two or more columns the second column
//! is the default value column, overridable by name or zero-based index.

use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{MarketStudyRow, PowerRow, ReturnSeries, UniqueRow};

/// Which column of a delimited file holds the values.
#[derive(Debug, Clone, Default)]
pub enum ColumnSelector {
    /// Single-column files use column 0, wider files column 1.
    #[default]
    Auto,
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

fn parse_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push(rec);
    }
    Ok(records)
}

fn resolve_column(records: &[csv::StringRecord], selector: &ColumnSelector) -> Result<(usize, bool)> {
    let first = &records[0];
    match selector {
        ColumnSelector::Index(i) => {
            // header present when the selected cell of row 0 is not numeric
            let has_header = first
                .get(*i)
                .is_some_and(|c| c.parse::<f64>().is_err());
            Ok((*i, has_header))
        }
        ColumnSelector::Name(name) => {
            let idx = first
                .iter()
                .position(|c| c.eq_ignore_ascii_case(name))
                .ok_or_else(|| {
                    Error::Parse(format!("no column named `{name}` in the header row"))
                })?;
            Ok((idx, true))
        }
        ColumnSelector::Auto => {
            let idx = if first.len() >= 2 { 1 } else { 0 };
            let has_header = first
                .get(idx)
                .is_some_and(|c| c.parse::<f64>().is_err());
            Ok((idx, has_header))
        }
    }
}

/// Reads the numeric column of a delimited file.
pub fn read_values(path: &Path, selector: &ColumnSelector) -> Result<Vec<f64>> {
    let records = parse_records(path)?;
    if records.is_empty() {
        return Err(Error::Parse(format!("{}: no data", path.display())));
    }
    let (idx, has_header) = resolve_column(&records, selector)?;
    let mut values = Vec::with_capacity(records.len());
    for (row, rec) in records.iter().enumerate().skip(has_header as usize) {
        let cell = rec.get(idx).ok_or_else(|| {
            Error::Parse(format!(
                "{}: row {} has no column {idx}",
                path.display(),
                row + 1
            ))
        })?;
        let v = cell.parse::<f64>().map_err(|_| {
            Error::Parse(format!(
                "{}: row {}: `{cell}` is not a number",
                path.display(),
                row + 1
            ))
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Parse(format!("{}: no data", path.display())));
    }
    Ok(values)
}

/// Reads one series per file; the series id is the file stem.
pub fn read_series(path: &Path, selector: &ColumnSelector) -> Result<ReturnSeries> {
    let values = read_values(path, selector)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(ReturnSeries { id, values })
}

pub fn write_power_csv<W: std::io::Write>(out: W, rows: &[PowerRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["spec", "n", "test", "level", "reps", "rejection_rate", "mc_stderr"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.spec.to_string(),
            r.n.to_string(),
            r.test.to_string(),
            r.level.to_string(),
            r.reps.to_string(),
            r.rejection_rate.to_string(),
            r.mc_stderr.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_unique_csv<W: std::io::Write>(out: W, rows: &[UniqueRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "spec",
        "n",
        "test",
        "level",
        "reps",
        "unique_rate",
        "rejection_rate",
        "mc_stderr",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.spec.to_string(),
            r.n.to_string(),
            r.test.to_string(),
            r.level.to_string(),
            r.reps.to_string(),
            r.unique_rate.to_string(),
            r.rejection_rate.to_string(),
            r.mc_stderr.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_market_csv<W: std::io::Write>(out: W, rows: &[MarketStudyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "level",
        "windows",
        "rejects_any",
        "test",
        "total_rejection",
        "unique_rejection",
    ])
    .map_err(csv_err)?;
    for r in rows {
        for t in &r.tests {
            w.write_record([
                r.n.to_string(),
                r.level.to_string(),
                r.windows.to_string(),
                r.rejects_any.to_string(),
                t.test.to_string(),
                t.total_rejection.to_string(),
                t.unique_rejection.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv write: {e}"))
}
