//! CSV and JSON result files.
//!
//! Both formats carry the same fields in the order of [`CSV_COLUMNS`]. Real
//! numbers are rounded to 12 significant digits and then printed in their
//! shortest exact form, so parsing an emitted file gives back the rounded
//! records exactly.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::{ConvergenceTrace, ResultRecord};

pub const CSV_COLUMNS: [&str; 9] = [
    "sweep_param",
    "sweep_value",
    "scheme",
    "mean_sum_sr",
    "std_err",
    "mean_iterations",
    "num_topologies",
    "master_seed",
    "wall_time_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown output format '{other}'"))),
        }
    }
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn num(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// Copy of the record with every real field rounded as it is written.
pub fn rounded(r: &ResultRecord) -> ResultRecord {
    ResultRecord {
        sweep_value: round_sig(r.sweep_value),
        mean_sum_sr: round_sig(r.mean_sum_sr),
        std_err: round_sig(r.std_err),
        mean_iterations: round_sig(r.mean_iterations),
        wall_time_s: round_sig(r.wall_time_s),
        ..r.clone()
    }
}

fn check_field(name: &str, value: &str) -> Result<()> {
    if value.is_empty() || value.contains([',', '\n', '\r', '"']) {
        return Err(Error::InvalidConfig(format!("{name} '{value}' cannot be written to CSV")));
    }
    Ok(())
}

pub fn to_csv(records: &[ResultRecord]) -> Result<String> {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        check_field("sweep_param", &r.sweep_param)?;
        check_field("scheme", &r.scheme)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.sweep_param,
            num(r.sweep_value),
            r.scheme,
            num(r.mean_sum_sr),
            num(r.std_err),
            num(r.mean_iterations),
            r.num_topologies,
            r.master_seed,
            num(r.wall_time_s)
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if header.split(',').ne(CSV_COLUMNS) {
        return Err(Error::Parse(format!("unexpected CSV header '{header}'")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != CSV_COLUMNS.len() {
                return Err(Error::Parse(format!("row {}: expected 9 fields, found {}", i + 1, f.len())));
            }
            let real = |j: usize| {
                f[j].parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {} {}: {e}", i + 1, CSV_COLUMNS[j])))
            };
            let int = |j: usize| {
                f[j].parse::<u64>()
                    .map_err(|e| Error::Parse(format!("row {} {}: {e}", i + 1, CSV_COLUMNS[j])))
            };
            Ok(ResultRecord {
                sweep_param: f[0].to_string(),
                sweep_value: real(1)?,
                scheme: f[2].to_string(),
                mean_sum_sr: real(3)?,
                std_err: real(4)?,
                mean_iterations: real(5)?,
                num_topologies: int(6)? as usize,
                master_seed: int(7)?,
                wall_time_s: real(8)?,
            })
        })
        .collect()
}

/// A JSON array of objects with the CSV fields as keys.
pub fn to_json(records: &[ResultRecord]) -> Result<String> {
    let rounded: Vec<ResultRecord> = records.iter().map(rounded).collect();
    serde_json::to_string_pretty(&rounded)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_json(text: &str) -> Result<Vec<ResultRecord>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn render(records: &[ResultRecord], format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(records),
        Format::Json => to_json(records),
    }
}

/// Writes the records to `path`, or to stdout when `path` is `None`.
pub fn emit_results(records: &[ResultRecord], format: Format, path: Option<&Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no records to write".into()));
    }
    write_text(&render(records, format)?, path)
}

pub fn write_text(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::File {
            path: p.to_path_buf(),
            source,
        })?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Long-format traces: one row per (sample, iteration). Iteration 0 is the
/// jammer-free starting point.
pub fn traces_to_csv(traces: &[ConvergenceTrace]) -> String {
    let mut out = String::from("sample,topology,cu,d2d,rb,iteration,chi_tilde\n");
    for t in traces {
        for (i, v) in t.values.iter().enumerate() {
            writeln!(out, "{},{},{},{},{},{},{}", t.sample, t.topology, t.cu, t.d2d, t.rb, i, num(*v))
                .expect("writing to a String cannot fail");
        }
    }
    out
}

pub fn traces_to_json(traces: &[ConvergenceTrace]) -> Result<String> {
    let rows: Vec<serde_json::Value> = traces
        .iter()
        .map(|t| {
            serde_json::json!({
                "sample": t.sample,
                "topology": t.topology,
                "cu": t.cu,
                "d2d": t.d2d,
                "rb": t.rb,
                "iterations": t.iterations,
                "chi_tilde": t.values.iter().map(|&v| round_sig(v)).collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&rows)
        .map(|s| s + "\n")
        .map_err(|e| Error::Parse(e.to_string()))
}
