use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tournament::MatrixReport;
use crate::error::{Error, Result};

pub const JSON_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Heatmap,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Heatmap => "txt",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "heatmap" | "text-heatmap" => Ok(Format::Heatmap),
            _ => Err(Error::Parse(format!("unknown report format {s:?}"))),
        }
    }
}

pub fn export(report: &MatrixReport, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(report),
        Format::Json => to_json(report),
        Format::Heatmap => Ok(to_heatmap(report)),
    }
}

pub fn to_csv(report: &MatrixReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in report.pairings() {
        w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct JsonOut<'a> {
    schema: u32,
    #[serde(flatten)]
    report: &'a MatrixReport,
}

#[derive(Deserialize)]
struct JsonIn {
    schema: u32,
    #[serde(flatten)]
    report: MatrixReport,
}

pub fn to_json(report: &MatrixReport) -> Result<String> {
    serde_json::to_string_pretty(&JsonOut {
        schema: JSON_SCHEMA,
        report,
    })
    .map_err(|e| Error::Parse(e.to_string()))
}

pub fn load_json(text: &str) -> Result<MatrixReport> {
    let parsed: JsonIn = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if parsed.schema != JSON_SCHEMA {
        return Err(Error::Parse(format!(
            "report schema {} is not supported (expected {JSON_SCHEMA})",
            parsed.schema
        )));
    }
    Ok(parsed.report)
}

pub fn heatmap_cell(p_hat: f64, verdict: super::Verdict) -> String {
    format!("{:.1}% ({verdict})", p_hat * 100.0)
}

/// Players down the side, opponents across the top.
pub fn to_heatmap(report: &MatrixReport) -> String {
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(report.grid.len() + 1);
    let mut header = vec![String::new()];
    header.extend(report.opponents.iter().map(|o| o.to_string()));
    rows.push(header);
    for (p, results) in report.players.iter().zip(&report.grid) {
        let mut row = vec![p.to_string()];
        row.extend(results.iter().map(|r| heatmap_cell(r.p_hat, r.verdict)));
        rows.push(row);
    }
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
