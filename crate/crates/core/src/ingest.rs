//! Readers for the three external datasets: O*NET task statements, OEWS
//! wage/employment tables and the prior exposure indices.
//!
//! Every reader returns a [`ParseOutcome`]: accepted records in input order
//! plus one [`Reject`] per row that failed validation. Missing required
//! columns are fatal; everything else is reported per row.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing required column `{column}`")]
    MissingColumn { column: &'static str },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("`{0}` is not an O*NET-SOC code (expected NN-NNNN.NN)")]
    NotOnet(String),
    #[error("`{0}` is not a SOC-6 code (expected NN-NNNN)")]
    NotSoc6(String),
}

fn digits(s: &[u8]) -> bool {
    s.iter().all(u8::is_ascii_digit)
}

fn matches_soc6(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 7 && digits(&b[..2]) && b[2] == b'-' && digits(&b[3..7])
}

fn matches_onet(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 10 && matches_soc6(&s[..7]) && b[7] == b'.' && digits(&b[8..])
}

/// Detailed O*NET-SOC occupation code, `NN-NNNN.NN`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OnetCode(String);

/// Six-digit SOC code, `NN-NNNN`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Soc6Code(String);

impl OnetCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Drops the `.NN` detail suffix.
    pub fn soc6(&self) -> Soc6Code {
        Soc6Code(self.0[..7].to_string())
    }
}

impl Soc6Code {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Two-digit major group, e.g. `"11"` for management.
    pub fn major_group(&self) -> &str {
        &self.0[..2]
    }
}

impl FromStr for OnetCode {
    type Err = CodeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if matches_onet(s) {
            Ok(Self(s.to_string()))
        } else {
            Err(CodeError::NotOnet(s.to_string()))
        }
    }
}

impl FromStr for Soc6Code {
    type Err = CodeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if matches_soc6(s) {
            Ok(Self(s.to_string()))
        } else {
            Err(CodeError::NotSoc6(s.to_string()))
        }
    }
}

impl TryFrom<String> for OnetCode {
    type Error = CodeError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl TryFrom<String> for Soc6Code {
    type Error = CodeError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<OnetCode> for String {
    fn from(c: OnetCode) -> String {
        c.0
    }
}

impl From<Soc6Code> for String {
    fn from(c: Soc6Code) -> String {
        c.0
    }
}

impl fmt::Display for OnetCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Soc6Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Maps a detailed O*NET-SOC code to its SOC-6 parent.
///
/// Only full O*NET codes are accepted, so an already truncated code is
/// rejected rather than passed through.
pub fn map_to_soc6(onet_soc: &str) -> Result<Soc6Code, CodeError> {
    Ok(onet_soc.parse::<OnetCode>()?.soc6())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskType {
    Core,
    Supplemental,
}

impl FromStr for TaskType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Core" => Ok(TaskType::Core),
            "Supplemental" => Ok(TaskType::Supplemental),
            other => Err(format!("unknown task_type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task_id: String,
    pub onet_soc: OnetCode,
    pub occupation_title: String,
    pub task_text: String,
    pub task_type: TaskType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WageRecord {
    pub soc6: Soc6Code,
    pub year: i32,
    /// `None` when the source cell was suppressed or blank.
    pub mean_annual_wage: Option<f64>,
    pub employment: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorIndexRecord {
    pub soc6: Soc6Code,
    pub webb_software: Option<f64>,
    pub webb_robot: Option<f64>,
    pub webb_ai: Option<f64>,
    pub sml: Option<f64>,
    pub routine_cognitive: Option<f64>,
    pub routine_manual: Option<f64>,
    pub felten_ai: Option<f64>,
    pub frey_osborne: Option<f64>,
    pub eloundou_beta: Option<f64>,
}

/// Named prior-index fields in their canonical column order.
pub const PRIOR_FIELDS: [&str; 9] = [
    "webb_software",
    "webb_robot",
    "webb_ai",
    "sml",
    "routine_cognitive",
    "routine_manual",
    "felten_ai",
    "frey_osborne",
    "eloundou_beta",
];

impl PriorIndexRecord {
    pub fn field(&self, name: &str) -> Option<f64> {
        match name {
            "webb_software" => self.webb_software,
            "webb_robot" => self.webb_robot,
            "webb_ai" => self.webb_ai,
            "sml" => self.sml,
            "routine_cognitive" => self.routine_cognitive,
            "routine_manual" => self.routine_manual,
            "felten_ai" => self.felten_ai,
            "frey_osborne" => self.frey_osborne,
            "eloundou_beta" => self.eloundou_beta,
            _ => None,
        }
    }

    fn values(&self) -> [Option<f64>; 9] {
        [
            self.webb_software,
            self.webb_robot,
            self.webb_ai,
            self.sml,
            self.routine_cognitive,
            self.routine_manual,
            self.felten_ai,
            self.frey_osborne,
            self.eloundou_beta,
        ]
    }
}

/// A row that could not be turned into a record. `line_number` is the
/// 1-based physical line in the source file (the header is line 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line_number: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome<T> {
    pub records: Vec<T>,
    pub rejects: Vec<Reject>,
}

impl<T> ParseOutcome<T> {
    pub fn total_rows(&self) -> usize {
        self.records.len() + self.rejects.len()
    }
}

struct Columns {
    idx: Vec<usize>,
}

impl Columns {
    fn locate(headers: &csv::StringRecord, names: &[&'static str]) -> Result<Self, IngestError> {
        let idx = names
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h.trim().trim_start_matches('\u{feff}') == *name)
                    .ok_or(IngestError::MissingColumn { column: name })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { idx })
    }

    fn get<'r>(&self, row: &'r csv::StringRecord, i: usize) -> &'r str {
        row.get(self.idx[i]).unwrap_or("")
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().flexible(true).from_reader(input)
}

fn open(path: &Path) -> Result<std::fs::File, IngestError> {
    std::fs::File::open(path).map_err(|source| IngestError::Open {
        path: path.display().to_string(),
        source,
    })
}

/// Drives `parse_row` over every data row, turning row-level errors
/// (including malformed CSV records) into rejects.
fn parse_rows<R, T, F>(
    input: R,
    names: &[&'static str],
    mut parse_row: F,
) -> Result<ParseOutcome<T>, IngestError>
where
    R: Read,
    F: FnMut(&Columns, &csv::StringRecord) -> Result<T, String>,
{
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    let cols = Columns::locate(&headers, names)?;
    let mut outcome = ParseOutcome {
        records: Vec::new(),
        rejects: Vec::new(),
    };
    let mut row = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {
                let line_number = row.position().map_or(line, |p| p.line());
                match parse_row(&cols, &row) {
                    Ok(rec) => outcome.records.push(rec),
                    Err(reason) => outcome.rejects.push(Reject {
                        line_number,
                        reason,
                    }),
                }
            }
            Err(e) if matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) => {
                outcome.rejects.push(Reject {
                    line_number: e.position().map_or(line, |p| p.line()),
                    reason: "invalid UTF-8".to_string(),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(outcome)
}

const TASK_COLUMNS: [&str; 5] = [
    "task_id",
    "onet_soc",
    "occupation_title",
    "task_text",
    "task_type",
];

pub fn read_task_statements<R: Read>(input: R) -> Result<ParseOutcome<TaskRecord>, IngestError> {
    let mut seen = HashSet::new();
    parse_rows(input, &TASK_COLUMNS, |c, row| {
        let task_id = c.get(row, 0).trim();
        if task_id.is_empty() {
            return Err("empty task_id".into());
        }
        let onet_soc: OnetCode = c.get(row, 1).trim().parse().map_err(|e: CodeError| e.to_string())?;
        let occupation_title = c.get(row, 2).trim();
        let task_text = c.get(row, 3).trim();
        if task_text.is_empty() {
            return Err("empty task_text".into());
        }
        let task_type: TaskType = c.get(row, 4).trim().parse()?;
        if !seen.insert(task_id.to_string()) {
            return Err(format!("duplicate task_id `{task_id}`"));
        }
        Ok(TaskRecord {
            task_id: task_id.to_string(),
            onet_soc,
            occupation_title: occupation_title.to_string(),
            task_text: task_text.to_string(),
            task_type,
        })
    })
}

pub fn parse_task_statements(path: &Path) -> Result<ParseOutcome<TaskRecord>, IngestError> {
    read_task_statements(open(path)?)
}

/// OEWS suppression markers; these become explicit missing values.
const SUPPRESSED: [&str; 4] = ["*", "**", "#", "~"];

fn is_missing(cell: &str) -> bool {
    let cell = cell.trim();
    cell.is_empty() || SUPPRESSED.contains(&cell)
}

fn parse_number(column: &str, cell: &str) -> Result<Option<f64>, String> {
    if is_missing(cell) {
        return Ok(None);
    }
    let cleaned: String = cell.trim().chars().filter(|c| *c != ',').collect();
    match cleaned.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(format!("{column}: `{}` is not a number", cell.trim())),
    }
}

const OEWS_COLUMNS: [&str; 3] = ["soc6", "mean_annual_wage", "employment"];

pub fn read_oews<R: Read>(input: R, year: i32) -> Result<ParseOutcome<WageRecord>, IngestError> {
    let mut seen = HashSet::new();
    parse_rows(input, &OEWS_COLUMNS, |c, row| {
        let soc6: Soc6Code = c.get(row, 0).trim().parse().map_err(|e: CodeError| e.to_string())?;
        let wage = parse_number("mean_annual_wage", c.get(row, 1))?;
        if let Some(w) = wage {
            if w <= 0.0 {
                return Err(format!("mean_annual_wage must be positive, got {w}"));
            }
        }
        let employment = match parse_number("employment", c.get(row, 2))? {
            None => None,
            Some(e) if e >= 0.0 && e.fract() == 0.0 && e <= u64::MAX as f64 => Some(e as u64),
            Some(e) => return Err(format!("employment must be a non-negative count, got {e}")),
        };
        if !seen.insert(soc6.clone()) {
            return Err(format!("duplicate soc6 `{soc6}` for year {year}"));
        }
        Ok(WageRecord {
            soc6,
            year,
            mean_annual_wage: wage,
            employment,
        })
    })
}

pub fn parse_oews(path: &Path, year: i32) -> Result<ParseOutcome<WageRecord>, IngestError> {
    read_oews(open(path)?, year)
}

const PRIOR_COLUMNS: [&str; 10] = [
    "soc6",
    "webb_software",
    "webb_robot",
    "webb_ai",
    "sml",
    "routine_cognitive",
    "routine_manual",
    "felten_ai",
    "frey_osborne",
    "eloundou_beta",
];

pub fn read_prior_indices<R: Read>(input: R) -> Result<ParseOutcome<PriorIndexRecord>, IngestError> {
    let mut seen = HashSet::new();
    parse_rows(input, &PRIOR_COLUMNS, |c, row| {
        let soc6: Soc6Code = c.get(row, 0).trim().parse().map_err(|e: CodeError| e.to_string())?;
        let mut v = [None; 9];
        for (i, name) in PRIOR_FIELDS.iter().enumerate() {
            v[i] = parse_number(name, c.get(row, i + 1))?;
        }
        for (i, name) in PRIOR_FIELDS[..3].iter().enumerate() {
            if let Some(x) = v[i] {
                if !(0.0..=100.0).contains(&x) {
                    return Err(format!("{name} = {x} outside [0, 100]"));
                }
            }
        }
        if !seen.insert(soc6.clone()) {
            return Err(format!("duplicate soc6 `{soc6}`"));
        }
        Ok(PriorIndexRecord {
            soc6,
            webb_software: v[0],
            webb_robot: v[1],
            webb_ai: v[2],
            sml: v[3],
            routine_cognitive: v[4],
            routine_manual: v[5],
            felten_ai: v[6],
            frey_osborne: v[7],
            eloundou_beta: v[8],
        })
    })
}

pub fn parse_prior_indices(path: &Path) -> Result<ParseOutcome<PriorIndexRecord>, IngestError> {
    read_prior_indices(open(path)?)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_task_statements<W: Write>(out: W, tasks: &[TaskRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TASK_COLUMNS)?;
    for t in tasks {
        let kind = match t.task_type {
            TaskType::Core => "Core",
            TaskType::Supplemental => "Supplemental",
        };
        w.write_record([
            t.task_id.as_str(),
            t.onet_soc.as_str(),
            &t.occupation_title,
            &t.task_text,
            kind,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_oews<W: Write>(out: W, rows: &[WageRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OEWS_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.soc6.to_string(),
            opt_cell(r.mean_annual_wage),
            r.employment.map(|e| e.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_prior_indices<W: Write>(out: W, rows: &[PriorIndexRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PRIOR_COLUMNS)?;
    for r in rows {
        let mut rec = vec![r.soc6.to_string()];
        rec.extend(r.values().into_iter().map(opt_cell));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rejects<W: Write>(out: W, rejects: &[Reject]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["line_number", "reason"])?;
    for r in rejects {
        w.write_record([r.line_number.to_string(), r.reason.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Name of the rejects report for an input file: `<input>.rejects.csv`.
pub fn rejects_file_name(input: &Path) -> String {
    let name = input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".to_string());
    format!("{name}.rejects.csv")
}
