//! Grid sweeps and their CSV / JSON reports.
//!
//! Points are visited lambda-major. They are evaluated in chunks (in
//! parallel when requested) and each chunk is written, in grid order, before
//! the next one starts, so an interrupted sweep leaves a valid prefix on disk.
//!
//! CSV columns: `n, lambda, mu_max, residual, method, iterations, status`,
//! then `<tag>_value, <tag>_pass` for every bound tag in
//! [`BoundTag::ALL`] order and `<check>_value, <check>_pass` for every
//! [`IdentityKind`]. Cells of checks that do not apply are empty. Reals are
//! written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::{verify_point, IdentityKind, Outcome, VerificationRecord, VerifyConfig};
use crate::bounds::BoundTag;
use crate::eigen::{validate_tol, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::gegenbauer::{DENSE_THRESHOLD, LAMBDA_MIN};
use crate::par::Execution;

const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Validation(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub ns: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub tol: f64,
    pub dense_cap: usize,
    pub check_monotone: bool,
    pub format: ReportFormat,
    pub output: Option<PathBuf>,
}

impl GridSpec {
    /// Grid with default tolerance and dense cap, no output file.
    pub fn new(ns: Vec<usize>, lambdas: Vec<f64>) -> Self {
        GridSpec {
            ns,
            lambdas,
            tol: DEFAULT_TOL,
            dense_cap: super::DEFAULT_DENSE_CAP,
            check_monotone: true,
            format: ReportFormat::Csv,
            output: None,
        }
    }

    /// `from, from + step, ..., <= to`.
    pub fn n_range(from: usize, to: usize, step: usize) -> Result<Vec<usize>> {
        if step == 0 {
            return Err(Error::Validation("n step must be positive".into()));
        }
        if from > to {
            return Err(Error::Validation(format!("empty n range {from}..{to}")));
        }
        Ok((from..=to).step_by(step).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.lambdas.is_empty() {
            return Err(Error::Validation("sweep grid is empty".into()));
        }
        if let Some(n) = self.ns.iter().find(|&&n| n == 0) {
            return Err(Error::Validation(format!("grid contains n = {n}; n must be at least 1")));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(l.is_finite() && **l >= LAMBDA_MIN)) {
            return Err(Error::Validation(format!(
                "grid contains lambda = {l}; lambda must be at least {LAMBDA_MIN}"
            )));
        }
        validate_tol(self.tol)?;
        if self.dense_cap > DENSE_THRESHOLD {
            return Err(Error::Validation(format!(
                "dense cap {} exceeds the dense threshold {DENSE_THRESHOLD}",
                self.dense_cap
            )));
        }
        Ok(())
    }

    /// All `(n, lambda)` pairs, lambda-major.
    pub fn points(&self) -> Vec<(usize, f64)> {
        self.lambdas
            .iter()
            .flat_map(|&l| self.ns.iter().map(move |&n| (n, l)))
            .collect()
    }

    fn config(&self) -> VerifyConfig {
        VerifyConfig { tol: self.tol, dense_cap: self.dense_cap, check_monotone: self.check_monotone }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl SweepSummary {
    fn add(&mut self, outcome: Outcome) {
        self.total += 1;
        match outcome {
            Outcome::Pass => self.passed += 1,
            Outcome::Fail => self.failed += 1,
            Outcome::Inconclusive => self.inconclusive += 1,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub records: Vec<VerificationRecord>,
    pub summary: SweepSummary,
}

/// Destination for records, written in grid order.
pub trait RecordSink {
    fn write(&mut self, record: &VerificationRecord) -> Result<()>;
    /// Called after each chunk.
    fn flush(&mut self) -> Result<()>;
    fn finish(&mut self, summary: &SweepSummary) -> Result<()>;
}

fn report_err(e: impl std::fmt::Display) -> Error {
    Error::Report(e.to_string())
}

/// `{:.16e}`: 17 significant digits, round-trips every double.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["n", "lambda", "mu_max", "residual", "method", "iterations", "status"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for tag in BoundTag::ALL {
        h.push(format!("{}_value", tag.label()));
        h.push(format!("{}_pass", tag.label()));
    }
    for kind in IdentityKind::ALL {
        h.push(format!("{}_value", kind.label()));
        h.push(format!("{}_pass", kind.label()));
    }
    h
}

pub fn csv_row(r: &VerificationRecord) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(format_real).unwrap_or_default();
    let mut row = vec![
        r.n.to_string(),
        format_real(r.lambda),
        opt(r.mu_max),
        opt(r.residual),
        r.method.map(|m| m.as_str().to_string()).unwrap_or_default(),
        r.iterations.map(|i| i.to_string()).unwrap_or_default(),
        r.outcome.as_str().to_string(),
    ];
    for tag in BoundTag::ALL {
        match r.bound(tag) {
            Some(b) => {
                row.push(format_real(b.value));
                row.push(b.outcome.as_str().to_string());
            }
            None => row.extend([String::new(), String::new()]),
        }
    }
    for kind in IdentityKind::ALL {
        match r.identity(kind) {
            Some(c) => {
                row.push(format_real(c.value));
                row.push(c.outcome.as_str().to_string());
            }
            None => row.extend([String::new(), String::new()]),
        }
    }
    row
}

pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(inner);
        writer.write_record(csv_header()).map_err(report_err)?;
        Ok(CsvSink { writer })
    }
}

impl<W: Write> RecordSink for CsvSink<W> {
    fn write(&mut self, record: &VerificationRecord) -> Result<()> {
        self.writer.write_record(csv_row(record)).map_err(report_err)
    }

    fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(report_err)
    }

    fn finish(&mut self, _summary: &SweepSummary) -> Result<()> {
        self.flush()
    }
}

/// `{"records": [...], "summary": {...}}`, streamed record by record.
pub struct JsonSink<W: Write> {
    writer: W,
    first: bool,
}

impl<W: Write> JsonSink<W> {
    pub fn new(mut writer: W) -> Result<Self> {
        writer.write_all(b"{\"records\":[").map_err(report_err)?;
        Ok(JsonSink { writer, first: true })
    }
}

impl<W: Write> RecordSink for JsonSink<W> {
    fn write(&mut self, record: &VerificationRecord) -> Result<()> {
        if !self.first {
            self.writer.write_all(b",").map_err(report_err)?;
        }
        self.first = false;
        self.writer.write_all(b"\n").map_err(report_err)?;
        serde_json::to_writer(&mut self.writer, record).map_err(report_err)
    }

    fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(report_err)
    }

    fn finish(&mut self, summary: &SweepSummary) -> Result<()> {
        self.writer.write_all(b"\n],\"summary\":").map_err(report_err)?;
        serde_json::to_writer(&mut self.writer, summary).map_err(report_err)?;
        self.writer.write_all(b"}\n").map_err(report_err)?;
        self.flush()
    }
}

/// Runs the sweep, streaming records into `sink` in grid order.
pub fn sweep_into(
    grid: &GridSpec,
    exec: Execution,
    sink: &mut dyn RecordSink,
) -> Result<SweepReport> {
    grid.validate()?;
    let cfg = grid.config();
    let points = grid.points();
    let mut records = Vec::with_capacity(points.len());
    let mut summary = SweepSummary::default();
    for chunk in points.chunks(CHUNK) {
        let done = exec.map(chunk, |&(n, l)| verify_point(n, l, &cfg));
        for rec in done {
            let rec = rec?;
            summary.add(rec.outcome);
            sink.write(&rec)?;
            records.push(rec);
        }
        sink.flush()?;
    }
    sink.finish(&summary)?;
    Ok(SweepReport { records, summary })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Runs the sweep; when `grid.output` is set the report is written there.
pub fn sweep(grid: &GridSpec, exec: Execution) -> Result<SweepReport> {
    struct Discard;
    impl RecordSink for Discard {
        fn write(&mut self, _: &VerificationRecord) -> Result<()> {
            Ok(())
        }
        fn flush(&mut self) -> Result<()> {
            Ok(())
        }
        fn finish(&mut self, _: &SweepSummary) -> Result<()> {
            Ok(())
        }
    }
    grid.validate()?;
    match (&grid.output, grid.format) {
        (None, _) => sweep_into(grid, exec, &mut Discard),
        (Some(path), ReportFormat::Csv) => sweep_into(grid, exec, &mut CsvSink::new(create(path)?)?),
        (Some(path), ReportFormat::Json) => {
            sweep_into(grid, exec, &mut JsonSink::new(create(path)?)?)
        }
    }
}
