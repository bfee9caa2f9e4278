//! `annotations.csv` and `annotation_failures.csv`.

use std::io::{Read, Write};

use serde::Deserialize;
use thiserror::Error;

use super::{model_key, AnnotationSet, Provider, SubScores};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Invalid { line: u64, reason: String },
}

/// One successful annotation as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRow {
    pub task_id: String,
    pub provider: Provider,
    pub model_name: String,
    pub scores: SubScores,
    pub attempt_count: u32,
}

impl AnnotationRow {
    pub fn model_key(&self) -> String {
        model_key(self.provider, &self.model_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureRow {
    pub task_id: String,
    pub provider: Provider,
    pub model_name: String,
    pub reason: String,
}

impl FailureRow {
    pub fn model_key(&self) -> String {
        model_key(self.provider, &self.model_name)
    }
}

#[derive(Deserialize)]
struct RawAnnotation {
    task_id: String,
    provider: String,
    model_name: String,
    pv: i64,
    da: i64,
    tk: i64,
    ag: i64,
    attempt_count: u32,
}

#[derive(Deserialize)]
struct RawFailure {
    task_id: String,
    provider: String,
    model_name: String,
    reason: String,
}

pub fn write_annotations<W: Write>(out: W, set: &AnnotationSet) -> Result<(), RecordError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "task_id",
        "provider",
        "model_name",
        "pv",
        "da",
        "tk",
        "ag",
        "attempt_count",
    ])?;
    for a in &set.annotations {
        let s = a.scores;
        w.write_record([
            a.task_id.clone(),
            a.model.provider().label().to_string(),
            a.model.model_name().to_string(),
            s.pv().to_string(),
            s.da().to_string(),
            s.tk().to_string(),
            s.ag().to_string(),
            a.attempt_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_failures<W: Write>(out: W, set: &AnnotationSet) -> Result<(), RecordError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["task_id", "provider", "model_name", "reason"])?;
    for f in &set.failures {
        w.write_record([
            f.task_id.as_str(),
            f.model.provider().label(),
            f.model.model_name(),
            f.reason.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Reads `annotations.csv`; any invalid row is an error, since this file is
/// produced by the pipeline itself.
pub fn read_annotations<R: Read>(input: R) -> Result<Vec<AnnotationRow>, RecordError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let invalid = |reason: String| RecordError::Invalid { line, reason };
        let raw: RawAnnotation = rec
            .deserialize(Some(&headers))
            .map_err(|e| invalid(e.to_string()))?;
        let provider = raw.provider.parse().map_err(invalid)?;
        let scores = SubScores::new(raw.pv, raw.da, raw.tk, raw.ag)
            .map_err(|e| invalid(e.to_string()))?;
        rows.push(AnnotationRow {
            task_id: raw.task_id,
            provider,
            model_name: raw.model_name,
            scores,
            attempt_count: raw.attempt_count,
        });
    }
    Ok(rows)
}

pub fn read_failures<R: Read>(input: R) -> Result<Vec<FailureRow>, RecordError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let raw: RawFailure = rec
            .deserialize(Some(&headers))
            .map_err(|e| RecordError::Invalid {
                line,
                reason: e.to_string(),
            })?;
        rows.push(FailureRow {
            task_id: raw.task_id,
            provider: raw
                .provider
                .parse()
                .map_err(|reason| RecordError::Invalid { line, reason })?,
            model_name: raw.model_name,
            reason: raw.reason,
        });
    }
    Ok(rows)
}
