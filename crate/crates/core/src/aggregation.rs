//! Task-to-occupation aggregation.
//!
//! Each model's occupation index is the weighted mean of its task scores,
//! with core tasks weighted 2 and supplemental tasks 1. The four factor
//! indices use the same weights on a single subscale. Models are combined
//! at the occupation level by an unweighted mean, and only occupations with
//! at least `min_models` successful models are kept.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{AnnotationRow, Factor, SubScores};
use crate::ingest::{OnetCode, Soc6Code, TaskRecord, TaskType};

#[derive(Debug, Error)]
pub enum AggregationError {
    #[error("occupation has no annotated tasks")]
    EmptyOccupation,
    #[error("task `{0}` has no weight")]
    MissingWeight(String),
    #[error("annotation refers to unknown task `{0}`")]
    UnknownTask(String),
    #[error("no employment weight for occupation {0}")]
    MissingEmployment(String),
    #[error("employment weights for {0} sum to zero")]
    ZeroEmployment(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Invalid { line: u64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskWeight {
    pub task_id: String,
    pub w: f64,
}

impl TaskWeight {
    pub fn of_type(task_type: TaskType) -> f64 {
        match task_type {
            TaskType::Core => 2.0,
            TaskType::Supplemental => 1.0,
        }
    }

    pub fn for_task(task: &TaskRecord) -> Self {
        Self {
            task_id: task.task_id.clone(),
            w: Self::of_type(task.task_type),
        }
    }
}

/// One model's scores for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskScore {
    pub task_id: String,
    pub scores: SubScores,
}

/// Equal-weight mean of the four subscores, in [0, 2].
pub fn task_overall_score(s: &SubScores) -> f64 {
    0.25 * f64::from(s.sum())
}

fn weighted_mean(
    annotations: &[TaskScore],
    weights: &[TaskWeight],
    value: impl Fn(&SubScores) -> f64,
) -> Result<f64, AggregationError> {
    if annotations.is_empty() {
        return Err(AggregationError::EmptyOccupation);
    }
    let by_id: HashMap<&str, f64> = weights.iter().map(|w| (w.task_id.as_str(), w.w)).collect();
    let mut ordered: Vec<&TaskScore> = annotations.iter().collect();
    ordered.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    let mut num = 0.0;
    let mut den = 0.0;
    for a in ordered {
        let w = *by_id
            .get(a.task_id.as_str())
            .ok_or_else(|| AggregationError::MissingWeight(a.task_id.clone()))?;
        num += w * value(&a.scores);
        den += w;
    }
    Ok(num / den)
}

/// Weighted overall index of one occupation under one model.
pub fn occupation_index_per_model(
    annotations: &[TaskScore],
    weights: &[TaskWeight],
) -> Result<f64, AggregationError> {
    weighted_mean(annotations, weights, task_overall_score)
}

pub fn factor_index_per_model(
    annotations: &[TaskScore],
    weights: &[TaskWeight],
    factor: Factor,
) -> Result<f64, AggregationError> {
    weighted_mean(annotations, weights, |s| f64::from(s.get(factor)))
}

/// Unweighted mean over models, or `None` when fewer than `min_models`
/// models are available.
pub fn consensus_index(per_model: &BTreeMap<String, f64>, min_models: usize) -> Option<f64> {
    if per_model.is_empty() || per_model.len() < min_models {
        return None;
    }
    Some(stable_mean(per_model.values().copied()))
}

/// Mean taken relative to the first element, so a constant input comes
/// back exactly.
fn stable_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else {
        return f64::NAN;
    };
    let n = values.clone().count() as f64;
    first + values.map(|v| v - first).sum::<f64>() / n
}

/// One model's indices for one occupation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerModelIndex {
    pub onet_soc: OnetCode,
    pub model: String,
    pub overall: f64,
    pub pv_index: f64,
    pub da_index: f64,
    pub tk_index: f64,
    pub ag_index: f64,
    pub n_tasks: usize,
}

impl PerModelIndex {
    pub fn factor(&self, f: Factor) -> f64 {
        match f {
            Factor::Pv => self.pv_index,
            Factor::Da => self.da_index,
            Factor::Tk => self.tk_index,
            Factor::Ag => self.ag_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationIndex {
    pub onet_soc: OnetCode,
    pub overall: f64,
    pub pv_index: f64,
    pub da_index: f64,
    pub tk_index: f64,
    pub ag_index: f64,
    pub n_tasks: usize,
    pub n_models: usize,
    /// Empty when the index was read back from `index.csv`.
    pub per_model_overall: BTreeMap<String, f64>,
}

impl OccupationIndex {
    pub fn factor(&self, f: Factor) -> f64 {
        match f {
            Factor::Pv => self.pv_index,
            Factor::Da => self.da_index,
            Factor::Tk => self.tk_index,
            Factor::Ag => self.ag_index,
        }
    }
}

/// Occupations sharing a SOC-6 code, combined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Soc6Index {
    pub soc6: Soc6Code,
    pub overall: f64,
    pub pv_index: f64,
    pub da_index: f64,
    pub tk_index: f64,
    pub ag_index: f64,
    pub n_tasks: usize,
    /// Smallest model count among the fused occupations.
    pub n_models: usize,
    pub n_occupations: usize,
    pub per_model_overall: BTreeMap<String, f64>,
}

impl Soc6Index {
    pub fn factor(&self, f: Factor) -> f64 {
        match f {
            Factor::Pv => self.pv_index,
            Factor::Da => self.da_index,
            Factor::Tk => self.tk_index,
            Factor::Ag => self.ag_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub onet_soc: OnetCode,
    pub n_models: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Aggregated {
    pub indices: Vec<OccupationIndex>,
    pub per_model: Vec<PerModelIndex>,
    pub exclusions: Vec<Exclusion>,
}

/// Builds per-model and consensus indices for every occupation in `tasks`.
/// Occupations with fewer than `min_models` annotating models, including
/// those with none, land in `exclusions`.
pub fn build_occupation_indices(
    tasks: &[TaskRecord],
    annotations: &[AnnotationRow],
    min_models: usize,
) -> Result<Aggregated, AggregationError> {
    let task_by_id: HashMap<&str, &TaskRecord> =
        tasks.iter().map(|t| (t.task_id.as_str(), t)).collect();

    let mut weights: BTreeMap<&OnetCode, Vec<TaskWeight>> = BTreeMap::new();
    for t in tasks {
        weights.entry(&t.onet_soc).or_default().push(TaskWeight::for_task(t));
    }

    let mut grouped: BTreeMap<&OnetCode, BTreeMap<String, Vec<TaskScore>>> = BTreeMap::new();
    for a in annotations {
        let task = task_by_id
            .get(a.task_id.as_str())
            .ok_or_else(|| AggregationError::UnknownTask(a.task_id.clone()))?;
        grouped
            .entry(&task.onet_soc)
            .or_default()
            .entry(a.model_key())
            .or_default()
            .push(TaskScore {
                task_id: a.task_id.clone(),
                scores: a.scores,
            });
    }

    let mut out = Aggregated::default();
    for (code, occ_weights) in &weights {
        let Some(models) = grouped.get(code) else {
            out.exclusions.push(Exclusion {
                onet_soc: (*code).clone(),
                n_models: 0,
                reason: format!("annotated by 0 models, need {min_models}"),
            });
            continue;
        };
        let mut per_model = Vec::with_capacity(models.len());
        for (model, scores) in models {
            let factor = |f| factor_index_per_model(scores, occ_weights, f);
            per_model.push(PerModelIndex {
                onet_soc: (*code).clone(),
                model: model.clone(),
                overall: occupation_index_per_model(scores, occ_weights)?,
                pv_index: factor(Factor::Pv)?,
                da_index: factor(Factor::Da)?,
                tk_index: factor(Factor::Tk)?,
                ag_index: factor(Factor::Ag)?,
                n_tasks: scores.len(),
            });
        }
        let per_model_overall: BTreeMap<String, f64> =
            per_model.iter().map(|p| (p.model.clone(), p.overall)).collect();
        match consensus_index(&per_model_overall, min_models) {
            None => out.exclusions.push(Exclusion {
                onet_soc: (*code).clone(),
                n_models: per_model.len(),
                reason: format!("annotated by {} models, need {min_models}", per_model.len()),
            }),
            Some(overall) => {
                let mean = |f: Factor| stable_mean(per_model.iter().map(|p| p.factor(f)));
                let n_tasks = models
                    .values()
                    .flatten()
                    .map(|s| s.task_id.as_str())
                    .collect::<BTreeSet<_>>()
                    .len();
                out.indices.push(OccupationIndex {
                    onet_soc: (*code).clone(),
                    overall,
                    pv_index: mean(Factor::Pv),
                    da_index: mean(Factor::Da),
                    tk_index: mean(Factor::Tk),
                    ag_index: mean(Factor::Ag),
                    n_tasks,
                    n_models: per_model.len(),
                    per_model_overall,
                });
            }
        }
        out.per_model.extend(per_model);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Soc6Weighting {
    #[default]
    Uniform,
    Employment,
}

impl FromStr for Soc6Weighting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "employment" => Ok(Self::Employment),
            other => Err(format!("unknown SOC-6 weighting `{other}` (uniform|employment)")),
        }
    }
}

/// Combines detailed occupations that share a SOC-6 code. Index fields are
/// averaged (unweighted, or by `employment` in employment mode) and task
/// counts summed.
pub fn fuse_to_soc6(
    indices: &[OccupationIndex],
    weighting: Soc6Weighting,
    employment: Option<&HashMap<OnetCode, f64>>,
) -> Result<BTreeMap<Soc6Code, Soc6Index>, AggregationError> {
    let mut groups: BTreeMap<Soc6Code, Vec<&OccupationIndex>> = BTreeMap::new();
    for idx in indices {
        groups.entry(idx.onet_soc.soc6()).or_default().push(idx);
    }
    let mut out = BTreeMap::new();
    for (soc6, mut members) in groups {
        members.sort_by(|a, b| a.onet_soc.cmp(&b.onet_soc));
        let weights: Vec<f64> = match weighting {
            Soc6Weighting::Uniform => vec![1.0; members.len()],
            Soc6Weighting::Employment => members
                .iter()
                .map(|m| {
                    employment
                        .and_then(|e| e.get(&m.onet_soc).copied())
                        .ok_or_else(|| AggregationError::MissingEmployment(m.onet_soc.to_string()))
                })
                .collect::<Result<_, _>>()?,
        };
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(AggregationError::ZeroEmployment(soc6.to_string()));
        }
        let mean = |get: &dyn Fn(&OccupationIndex) -> f64| {
            members.iter().zip(&weights).map(|(m, w)| w * get(m)).sum::<f64>() / total
        };
        let mut per_model: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for (m, w) in members.iter().zip(&weights) {
            for (k, v) in &m.per_model_overall {
                let e = per_model.entry(k.clone()).or_default();
                e.0 += w * v;
                e.1 += w;
            }
        }
        let fused = Soc6Index {
            soc6: soc6.clone(),
            overall: mean(&|m| m.overall),
            pv_index: mean(&|m| m.pv_index),
            da_index: mean(&|m| m.da_index),
            tk_index: mean(&|m| m.tk_index),
            ag_index: mean(&|m| m.ag_index),
            n_tasks: members.iter().map(|m| m.n_tasks).sum(),
            n_models: members.iter().map(|m| m.n_models).min().unwrap_or(0),
            n_occupations: members.len(),
            per_model_overall: per_model
                .into_iter()
                .filter(|(_, (_, w))| *w > 0.0)
                .map(|(k, (s, w))| (k, s / w))
                .collect(),
        };
        out.insert(soc6, fused);
    }
    Ok(out)
}

const INDEX_COLUMNS: [&str; 9] = [
    "onet_soc",
    "soc6",
    "overall",
    "pv_index",
    "da_index",
    "tk_index",
    "ag_index",
    "n_tasks",
    "n_models",
];

pub fn write_index<W: Write>(out: W, indices: &[OccupationIndex]) -> Result<(), AggregationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(INDEX_COLUMNS)?;
    for i in indices {
        w.write_record([
            i.onet_soc.to_string(),
            i.onet_soc.soc6().to_string(),
            i.overall.to_string(),
            i.pv_index.to_string(),
            i.da_index.to_string(),
            i.tk_index.to_string(),
            i.ag_index.to_string(),
            i.n_tasks.to_string(),
            i.n_models.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct RawIndex {
    onet_soc: String,
    overall: f64,
    pv_index: f64,
    da_index: f64,
    tk_index: f64,
    ag_index: f64,
    n_tasks: usize,
    n_models: usize,
}

pub fn read_index<R: Read>(input: R) -> Result<Vec<OccupationIndex>, AggregationError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let invalid = |reason: String| AggregationError::Invalid { line, reason };
        let raw: RawIndex = rec.deserialize(Some(&headers)).map_err(|e| invalid(e.to_string()))?;
        out.push(OccupationIndex {
            onet_soc: raw.onet_soc.parse().map_err(|e: crate::ingest::CodeError| invalid(e.to_string()))?,
            overall: raw.overall,
            pv_index: raw.pv_index,
            da_index: raw.da_index,
            tk_index: raw.tk_index,
            ag_index: raw.ag_index,
            n_tasks: raw.n_tasks,
            n_models: raw.n_models,
            per_model_overall: BTreeMap::new(),
        });
    }
    Ok(out)
}

pub fn write_per_model<W: Write>(out: W, rows: &[PerModelIndex]) -> Result<(), AggregationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "onet_soc", "model", "overall", "pv_index", "da_index", "tk_index", "ag_index", "n_tasks",
    ])?;
    for r in rows {
        w.write_record([
            r.onet_soc.to_string(),
            r.model.clone(),
            r.overall.to_string(),
            r.pv_index.to_string(),
            r.da_index.to_string(),
            r.tk_index.to_string(),
            r.ag_index.to_string(),
            r.n_tasks.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_per_model<R: Read>(input: R) -> Result<Vec<PerModelIndex>, AggregationError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn write_soc6_index<W: Write>(
    out: W,
    fused: &BTreeMap<Soc6Code, Soc6Index>,
) -> Result<(), AggregationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "soc6",
        "overall",
        "pv_index",
        "da_index",
        "tk_index",
        "ag_index",
        "n_tasks",
        "n_models",
        "n_occupations",
    ])?;
    for f in fused.values() {
        w.write_record([
            f.soc6.to_string(),
            f.overall.to_string(),
            f.pv_index.to_string(),
            f.da_index.to_string(),
            f.tk_index.to_string(),
            f.ag_index.to_string(),
            f.n_tasks.to_string(),
            f.n_models.to_string(),
            f.n_occupations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct RawSoc6 {
    soc6: String,
    overall: f64,
    pv_index: f64,
    da_index: f64,
    tk_index: f64,
    ag_index: f64,
    n_tasks: usize,
    n_models: usize,
    n_occupations: usize,
}

pub fn read_soc6_index<R: Read>(input: R) -> Result<BTreeMap<Soc6Code, Soc6Index>, AggregationError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let invalid = |reason: String| AggregationError::Invalid { line, reason };
        let raw: RawSoc6 = rec.deserialize(Some(&headers)).map_err(|e| invalid(e.to_string()))?;
        let soc6: Soc6Code = raw.soc6.parse().map_err(|e: crate::ingest::CodeError| invalid(e.to_string()))?;
        out.insert(
            soc6.clone(),
            Soc6Index {
                soc6,
                overall: raw.overall,
                pv_index: raw.pv_index,
                da_index: raw.da_index,
                tk_index: raw.tk_index,
                ag_index: raw.ag_index,
                n_tasks: raw.n_tasks,
                n_models: raw.n_models,
                n_occupations: raw.n_occupations,
                per_model_overall: BTreeMap::new(),
            },
        );
    }
    Ok(out)
}

pub fn write_exclusions<W: Write>(out: W, rows: &[Exclusion]) -> Result<(), AggregationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["onet_soc", "n_models", "reason"])?;
    for r in rows {
        w.write_record([r.onet_soc.to_string(), r.n_models.to_string(), r.reason.clone()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_exclusions<R: Read>(input: R) -> Result<Vec<Exclusion>, AggregationError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
