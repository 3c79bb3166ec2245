//! File formats: per-epoch trace CSV, summary CSV, and the JSON Nakamoto report.
//!
//! Every CSV starts with a schema line (`# ecsim-trace v1`, `# ecsim-summary v1`)
//! ahead of the header row.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{NakamotoReport, SeriesBundle, SummaryRow};
use crate::netsim::Trace;

pub const TRACE_SCHEMA: &str = "# ecsim-trace v1";
pub const SUMMARY_SCHEMA: &str = "# ecsim-summary v1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported or missing schema line: expected `{expected}`, found `{found}`")]
    Schema { expected: &'static str, found: String },
    #[error("trace row {row}: epochs must run 1, 2, 3, ... (found {epoch})")]
    EpochGap { row: usize, epoch: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: u64,
    #[serde(rename = "H")]
    pub h: u32,
    #[serde(rename = "Z")]
    pub z: u32,
    #[serde(rename = "X")]
    pub x: u32,
    #[serde(rename = "Y")]
    pub y: u32,
    #[serde(rename = "W_min")]
    pub w_min: u64,
    #[serde(rename = "W_max")]
    pub w_max: u64,
    pub n_views_distinct_tips: usize,
    pub adversary_lead: i64,
    pub released_flag: u8,
    pub equivocations_emitted: u32,
}

pub fn trace_rows(trace: &Trace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            epoch: r.epoch,
            h: r.h,
            z: r.z,
            x: r.x,
            y: r.y,
            w_min: r.w_min,
            w_max: r.w_max,
            n_views_distinct_tips: r.distinct_tips,
            adversary_lead: r.lead,
            released_flag: r.released as u8,
            equivocations_emitted: r.equivocations,
        })
        .collect()
}

fn write_csv<T: Serialize>(schema: &str, rows: &[T], header: &[&str], mut out: impl Write) -> Result<(), IoError> {
    writeln!(out, "{schema}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

const TRACE_HEADER: [&str; 11] = [
    "epoch",
    "H",
    "Z",
    "X",
    "Y",
    "W_min",
    "W_max",
    "n_views_distinct_tips",
    "adversary_lead",
    "released_flag",
    "equivocations_emitted",
];

pub fn write_trace_csv(trace: &Trace, out: impl Write) -> Result<(), IoError> {
    write_csv(TRACE_SCHEMA, &trace_rows(trace), &TRACE_HEADER, out)
}

fn read_rows<T: for<'de> Deserialize<'de>>(schema: &'static str, text: &str) -> Result<Vec<T>, IoError> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    if first.trim_end() != schema {
        return Err(IoError::Schema {
            expected: schema,
            found: first.to_string(),
        });
    }
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

pub fn read_trace_csv(text: &str) -> Result<Vec<TraceRow>, IoError> {
    let rows: Vec<TraceRow> = read_rows(TRACE_SCHEMA, text)?;
    for (i, row) in rows.iter().enumerate() {
        if row.epoch != i as u64 + 1 {
            return Err(IoError::EpochGap { row: i + 1, epoch: row.epoch });
        }
    }
    Ok(rows)
}

/// Series for trace rows, with genesis prepended at index 0.
pub fn series_from_rows(rows: &[TraceRow]) -> SeriesBundle {
    let h = std::iter::once(0).chain(rows.iter().map(|r| r.h)).collect();
    let z = std::iter::once(0).chain(rows.iter().map(|r| r.z)).collect();
    let mut s = SeriesBundle::from_counts(h, z);
    s.w_min = std::iter::once(1).chain(rows.iter().map(|r| r.w_min)).collect();
    s.w_max = std::iter::once(1).chain(rows.iter().map(|r| r.w_max)).collect();
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub m: f64,
    pub beta: f64,
    pub strategy: String,
    pub mitigation: String,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_final_lead: f64,
    pub nakamoto_rate: f64,
    pub persistence_violations: u64,
    pub liveness_violations: u64,
    pub seed: u64,
}

impl From<&SummaryRow> for SummaryRecord {
    fn from(r: &SummaryRow) -> Self {
        SummaryRecord {
            m: r.m,
            beta: r.beta,
            strategy: r.strategy.name().to_string(),
            mitigation: r.mitigation.name().to_string(),
            trials: r.trials,
            successes: r.successes,
            success_rate: r.success_rate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            mean_final_lead: r.mean_final_lead,
            nakamoto_rate: r.nakamoto_rate,
            persistence_violations: r.persistence_violations,
            liveness_violations: r.liveness_violations,
            seed: r.seed,
        }
    }
}

const SUMMARY_HEADER: [&str; 14] = [
    "m",
    "beta",
    "strategy",
    "mitigation",
    "trials",
    "successes",
    "success_rate",
    "ci_low",
    "ci_high",
    "mean_final_lead",
    "nakamoto_rate",
    "persistence_violations",
    "liveness_violations",
    "seed",
];

pub fn write_summary_csv(rows: &[SummaryRow], out: impl Write) -> Result<(), IoError> {
    let recs: Vec<SummaryRecord> = rows.iter().map(SummaryRecord::from).collect();
    write_csv(SUMMARY_SCHEMA, &recs, &SUMMARY_HEADER, out)
}

pub fn read_summary_csv(text: &str) -> Result<Vec<SummaryRecord>, IoError> {
    read_rows(SUMMARY_SCHEMA, text)
}

pub fn write_report_json(report: &NakamotoReport, mut out: impl Write) -> Result<(), IoError> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::Strategy;
    use crate::config::Cell;
    use crate::mitigations::Mitigation;

    #[test]
    fn empty_summary_is_header_only() {
        let mut buf = Vec::new();
        write_summary_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with(SUMMARY_SCHEMA));
        assert!(read_summary_csv(&text).unwrap().is_empty());
    }

    #[test]
    fn summary_round_trip() {
        let cell = Cell {
            m: 5.0,
            beta: 0.25,
            strategy: Strategy::Private,
            mitigation: Mitigation::LongestChain,
        };
        let row = crate::analysis::summarize(&cell, &[], 10, 3);
        let mut buf = Vec::new();
        write_summary_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let back = read_summary_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, vec![SummaryRecord::from(&row)]);
    }

    #[test]
    fn trace_schema_is_checked() {
        assert!(matches!(read_trace_csv("epoch,H\n1,2\n"), Err(IoError::Schema { .. })));
        let text = format!("{TRACE_SCHEMA}\n{}\n2,1,0,1,1,2,2,1,0,0,0\n", TRACE_HEADER.join(","));
        assert!(matches!(read_trace_csv(&text), Err(IoError::EpochGap { .. })));
    }
}
