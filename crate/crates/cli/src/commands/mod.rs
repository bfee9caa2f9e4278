pub mod aggregate;
pub mod annotate;
pub mod binscatter;
pub mod disagree;
pub mod report;
pub mod validate;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use exposure_core::aggregation::Soc6Weighting;
use exposure_core::ingest::{parse_oews, parse_task_statements, OnetCode, WageRecord};

use crate::output::{input_error, Stage};
use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct AnnotateArgs {
    /// Task statements CSV.
    #[arg(long)]
    pub tasks: Option<PathBuf>,
    /// Model specs: `stub:N`, `stub:<name>`, `a:<model>`, `b:<model>`,
    /// `c:<model>` or `trio`. Repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Sampling temperature for live models.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Upper bound on concurrent requests.
    #[arg(long)]
    pub max_inflight: Option<usize>,
    /// Retries after the first attempt.
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub backoff_base_ms: Option<u64>,
    /// Minimum gap between requests to one provider.
    #[arg(long)]
    pub min_request_interval_ms: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub tasks: Option<PathBuf>,
    /// `annotations.csv` from `annotate`.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Occupations need at least this many models to get an index.
    #[arg(long)]
    pub min_models: Option<usize>,
    /// How occupations sharing a SOC-6 code are combined.
    #[arg(long, value_parser = parse_weighting)]
    pub soc6_weighting: Option<Soc6Weighting>,
    /// `onet_soc,employment` CSV, required for employment weighting.
    #[arg(long)]
    pub employment: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// `index_soc6.csv` from `aggregate`.
    #[arg(long)]
    pub index_soc6: Option<PathBuf>,
    /// `index_per_model.csv`; adds the cross-model correlation triangle.
    #[arg(long)]
    pub per_model: Option<PathBuf>,
    /// Prior exposure indices by SOC-6 code.
    #[arg(long)]
    pub priors: Option<PathBuf>,
    /// Prior indices used as regressors (default: all nine).
    #[arg(long, value_delimiter = ',')]
    pub regressors: Vec<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum XVariable {
    LogWage,
    Wage,
    LogEmployment,
}

impl XVariable {
    pub fn column(self) -> &'static str {
        match self {
            XVariable::LogWage => "log_wage",
            XVariable::Wage => "mean_annual_wage",
            XVariable::LogEmployment => "log_employment",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            XVariable::LogWage => "log_wage",
            XVariable::Wage => "wage",
            XVariable::LogEmployment => "log_employment",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BinscatterArgs {
    #[arg(long)]
    pub index_soc6: Option<PathBuf>,
    /// OEWS wage file for one year, as `YEAR=PATH`. Repeatable.
    #[arg(long, value_parser = parse_year_path)]
    pub oews: Vec<(i32, PathBuf)>,
    #[arg(long, value_enum, default_value = "log-wage")]
    pub x: XVariable,
    #[arg(long)]
    pub n_bins: Option<usize>,
    /// Also write an SVG chart per year.
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DisagreeArgs {
    /// `index_per_model.csv` from `aggregate`.
    #[arg(long)]
    pub per_model: Option<PathBuf>,
    /// Task statements, for occupation titles.
    #[arg(long)]
    pub tasks: Option<PathBuf>,
    /// `annotations.csv`, for per-factor disagreement.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Number of occupations to list.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// `index.csv` from `aggregate`.
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub index_soc6: Option<PathBuf>,
    /// Task statements, for occupation titles.
    #[arg(long)]
    pub tasks: Option<PathBuf>,
    #[arg(long, value_parser = parse_year_path)]
    pub oews: Vec<(i32, PathBuf)>,
    #[arg(long)]
    pub priors: Option<PathBuf>,
    /// `soc2,category` CSV replacing the built-in job categories.
    #[arg(long)]
    pub categories: Option<PathBuf>,
    /// Occupations listed at each end of the ranking.
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn parse_weighting(s: &str) -> Result<Soc6Weighting, String> {
    s.parse()
}

fn parse_year_path(s: &str) -> Result<(i32, PathBuf), String> {
    let (year, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected YEAR=PATH, got `{s}`"))?;
    let year: i32 = year
        .trim()
        .parse()
        .map_err(|_| format!("`{year}` is not a year"))?;
    if path.is_empty() {
        return Err("empty path".into());
    }
    Ok((year, PathBuf::from(path)))
}

/// Flag values when given, else the config's `[paths.oews]` table.
pub(crate) fn oews_years(flags: &[(i32, PathBuf)], config: &BTreeMap<i32, PathBuf>) -> Result<BTreeMap<i32, PathBuf>, CliError> {
    if flags.is_empty() {
        return Ok(config.clone());
    }
    let mut out = BTreeMap::new();
    for (year, path) in flags {
        if out.insert(*year, path.clone()).is_some() {
            return Err(CliError::Usage(format!("--oews lists {year} twice")));
        }
    }
    Ok(out)
}

pub(crate) fn load_wages(stage: &mut Stage, year: i32, path: &Path) -> Result<Vec<WageRecord>, CliError> {
    stage.input(path)?;
    let parsed = parse_oews(path, year).map_err(input_error(path))?;
    stage.rejects(path, &parsed.rejects)?;
    Ok(parsed.records)
}

/// First title seen for each occupation code.
pub(crate) fn load_titles(stage: &mut Stage, path: &Path) -> Result<BTreeMap<OnetCode, String>, CliError> {
    stage.input(path)?;
    let parsed = parse_task_statements(path).map_err(input_error(path))?;
    let mut titles = BTreeMap::new();
    for t in parsed.records {
        titles.entry(t.onet_soc).or_insert(t.occupation_title);
    }
    Ok(titles)
}
