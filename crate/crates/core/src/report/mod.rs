//! Joins the SOC-6 indices with wage and prior-index data and produces the
//! summary tables (extreme occupations, category means) plus the CSV and
//! text renderings of every analysis.

mod manifest;
mod render;
mod tables;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{OccupationIndex, Soc6Index};
use crate::annotation::Factor;
use crate::ingest::{OnetCode, PriorIndexRecord, Soc6Code, WageRecord, PRIOR_FIELDS};

pub use manifest::{file_digest, sha256_hex, Manifest};
pub use render::{render_binscatter_svg, render_regression_text};
pub use tables::{
    read_binscatter, read_category_means, read_correlation_triangle, read_disagreement,
    read_extremes, read_factor_disagreement, read_joined, read_regression_fit,
    read_regression_table, write_binscatter, write_category_means, write_correlation_triangle,
    write_disagreement, write_extremes, write_factor_disagreement, write_joined,
    write_regression_fit, write_regression_table, CorrelationCell, RegressionFit,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no SOC-6 code is present in every input")]
    EmptyJoin,
    #[error("duplicate {source_name} row for `{key}`")]
    DuplicateKey { source_name: &'static str, key: String },
    #[error("invalid category lookup: {0}")]
    Lookup(String),
    #[error("line {line}: {reason}")]
    Invalid { line: u64, reason: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

const BUILTIN_CATEGORIES: &str = include_str!("../../data/categories.csv");

/// Maps the two-digit SOC major group to a job category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryLookup {
    by_prefix: BTreeMap<String, String>,
}

impl CategoryLookup {
    /// Category for major groups the lookup does not list.
    pub const OTHER: &'static str = "Other";

    /// The lookup shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_reader(BUILTIN_CATEGORIES.as_bytes()).expect("bundled category lookup is valid")
    }

    /// Reads a `soc2,category` CSV.
    pub fn from_reader<R: Read>(input: R) -> Result<Self, ReportError> {
        #[derive(Deserialize)]
        struct Row {
            soc2: String,
            category: String,
        }
        let mut by_prefix = BTreeMap::new();
        for row in csv::Reader::from_reader(input).deserialize() {
            let Row { soc2, category } = row?;
            let soc2 = soc2.trim().to_string();
            if soc2.len() != 2 || !soc2.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ReportError::Lookup(format!("`{soc2}` is not a two-digit major group")));
            }
            if by_prefix.insert(soc2.clone(), category.trim().to_string()).is_some() {
                return Err(ReportError::Lookup(format!("major group {soc2} listed twice")));
            }
        }
        Ok(Self { by_prefix })
    }

    pub fn category(&self, soc6: &Soc6Code) -> &str {
        self.by_prefix
            .get(soc6.major_group())
            .map_or(Self::OTHER, String::as_str)
    }

    pub fn categories(&self) -> BTreeSet<&str> {
        self.by_prefix.values().map(String::as_str).collect()
    }
}

impl Default for CategoryLookup {
    fn default() -> Self {
        Self::builtin()
    }
}

/// One SOC-6 occupation with its indices and whatever wage and prior-index
/// data the join brought in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinedRow {
    pub soc6: Soc6Code,
    pub job_category: String,
    pub overall: f64,
    pub pv_index: f64,
    pub da_index: f64,
    pub tk_index: f64,
    pub ag_index: f64,
    pub mean_annual_wage: Option<f64>,
    pub employment: Option<u64>,
    pub log_wage: Option<f64>,
    pub log_employment: Option<f64>,
    /// In [`PRIOR_FIELDS`] order.
    pub priors: [Option<f64>; 9],
}

impl JoinedRow {
    pub fn prior(&self, name: &str) -> Option<f64> {
        PRIOR_FIELDS
            .iter()
            .position(|f| *f == name)
            .and_then(|i| self.priors[i])
    }

    pub fn factor(&self, f: Factor) -> f64 {
        match f {
            Factor::Pv => self.pv_index,
            Factor::Da => self.da_index,
            Factor::Tk => self.tk_index,
            Factor::Ag => self.ag_index,
        }
    }

    /// Any numeric column by its CSV name.
    pub fn value(&self, column: &str) -> Option<f64> {
        match column {
            "overall" => Some(self.overall),
            "pv_index" => Some(self.pv_index),
            "da_index" => Some(self.da_index),
            "tk_index" => Some(self.tk_index),
            "ag_index" => Some(self.ag_index),
            "mean_annual_wage" => self.mean_annual_wage,
            "employment" => self.employment.map(|e| e as f64),
            "log_wage" => self.log_wage,
            "log_employment" => self.log_employment,
            other => self.prior(other),
        }
    }
}

/// Rows of each source that found no partner. `None` for sources that were
/// not part of the join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct JoinDrops {
    pub indices: usize,
    pub wages: Option<usize>,
    pub priors: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinedTable {
    pub rows: Vec<JoinedRow>,
    pub drops: JoinDrops,
}

fn keyed<'a, T>(
    rows: &'a [T],
    key: impl Fn(&T) -> &Soc6Code,
    source_name: &'static str,
) -> Result<BTreeMap<&'a Soc6Code, &'a T>, ReportError> {
    let mut map = BTreeMap::new();
    for r in rows {
        let k = key(r);
        if map.insert(k, r).is_some() {
            return Err(ReportError::DuplicateKey {
                source_name,
                key: k.to_string(),
            });
        }
    }
    Ok(map)
}

/// Inner join on SOC-6 of the indices with the wage rows of one year and/or
/// the prior indices. Rows come out ordered by code.
pub fn join_analysis_table(
    indices: &BTreeMap<Soc6Code, Soc6Index>,
    wages: Option<&[WageRecord]>,
    priors: Option<&[PriorIndexRecord]>,
    lookup: &CategoryLookup,
) -> Result<JoinedTable, ReportError> {
    let wages = wages.map(|w| keyed(w, |r| &r.soc6, "wage")).transpose()?;
    let priors = priors.map(|p| keyed(p, |r| &r.soc6, "prior index")).transpose()?;

    let mut rows = Vec::new();
    for (soc6, idx) in indices {
        let wage = match &wages {
            Some(w) => match w.get(soc6) {
                Some(r) => Some(*r),
                None => continue,
            },
            None => None,
        };
        let prior = match &priors {
            Some(p) => match p.get(soc6) {
                Some(r) => Some(*r),
                None => continue,
            },
            None => None,
        };
        let mean_annual_wage = wage.and_then(|w| w.mean_annual_wage);
        let employment = wage.and_then(|w| w.employment);
        rows.push(JoinedRow {
            soc6: soc6.clone(),
            job_category: lookup.category(soc6).to_string(),
            overall: idx.overall,
            pv_index: idx.pv_index,
            da_index: idx.da_index,
            tk_index: idx.tk_index,
            ag_index: idx.ag_index,
            mean_annual_wage,
            employment,
            log_wage: mean_annual_wage.filter(|w| *w > 0.0).map(f64::ln),
            log_employment: employment.filter(|e| *e > 0).map(|e| (e as f64).ln()),
            priors: PRIOR_FIELDS.map(|f| prior.and_then(|p| p.field(f))),
        });
    }
    if rows.is_empty() {
        return Err(ReportError::EmptyJoin);
    }
    let drops = JoinDrops {
        indices: indices.len() - rows.len(),
        wages: wages.map(|w| w.len() - rows.len()),
        priors: priors.map(|p| p.len() - rows.len()),
    };
    Ok(JoinedTable { rows, drops })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeRow {
    pub rank: usize,
    pub onet_soc: OnetCode,
    pub occupation_title: String,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Extremes {
    pub top: Vec<ExtremeRow>,
    pub bottom: Vec<ExtremeRow>,
}

/// The `k` highest and `k` lowest occupations by overall index; equal
/// scores are ordered by code in both lists.
pub fn extreme_occupations(
    indices: &[OccupationIndex],
    titles: &BTreeMap<OnetCode, String>,
    k: usize,
) -> Extremes {
    let ranked = |desc: bool| {
        let mut v: Vec<&OccupationIndex> = indices.iter().collect();
        v.sort_by(|a, b| {
            let ord = a.overall.total_cmp(&b.overall);
            let ord = if desc { ord.reverse() } else { ord };
            ord.then_with(|| a.onet_soc.cmp(&b.onet_soc))
        });
        v.into_iter()
            .take(k)
            .enumerate()
            .map(|(i, o)| ExtremeRow {
                rank: i + 1,
                onet_soc: o.onet_soc.clone(),
                occupation_title: titles.get(&o.onet_soc).cloned().unwrap_or_default(),
                overall: o.overall,
            })
            .collect()
    };
    Extremes {
        top: ranked(true),
        bottom: ranked(false),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMean {
    pub category: String,
    pub mean_overall: f64,
    pub n: usize,
}

/// Unweighted mean overall index per job category, highest first (ties by
/// name).
pub fn category_summary(rows: &[JoinedRow]) -> Vec<CategoryMean> {
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.job_category.as_str()).or_default().push(r.overall);
    }
    let mut out: Vec<CategoryMean> = groups
        .into_iter()
        .map(|(c, v)| CategoryMean {
            category: c.to_string(),
            mean_overall: crate::stats::mean(&v),
            n: v.len(),
        })
        .collect();
    out.sort_by(|a, b| {
        b.mean_overall
            .total_cmp(&a.mean_overall)
            .then_with(|| a.category.cmp(&b.category))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soc(s: &str) -> Soc6Code {
        s.parse().unwrap()
    }

    fn fused(code: &str, overall: f64) -> (Soc6Code, Soc6Index) {
        (
            soc(code),
            Soc6Index {
                soc6: soc(code),
                overall,
                pv_index: overall,
                da_index: overall,
                tk_index: overall,
                ag_index: overall,
                n_tasks: 4,
                n_models: 2,
                n_occupations: 1,
                per_model_overall: BTreeMap::new(),
            },
        )
    }

    fn wage(code: &str, w: f64) -> WageRecord {
        WageRecord {
            soc6: soc(code),
            year: 2024,
            mean_annual_wage: Some(w),
            employment: Some(1000),
        }
    }

    #[test]
    fn builtin_lookup() {
        let l = CategoryLookup::builtin();
        assert_eq!(l.category(&soc("11-1011")), "Management");
        assert_eq!(l.category(&soc("15-1252")), "STEM");
        assert_eq!(l.category(&soc("55-1011")), CategoryLookup::OTHER);
        assert_eq!(l.categories().len(), 10);
    }

    #[test]
    fn lookup_rejects_bad_prefix() {
        let err = CategoryLookup::from_reader("soc2,category\n1,X\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ReportError::Lookup(_)));
    }

    #[test]
    fn set_intersection_with_drops() {
        let idx: BTreeMap<_, _> = [fused("11-1011", 1.0), fused("13-1011", 0.5)].into();
        let wages = [wage("13-1011", 54598.0), wage("15-1011", 70000.0)];
        let t = join_analysis_table(&idx, Some(&wages), None, &CategoryLookup::builtin()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].soc6, soc("13-1011"));
        assert_eq!(t.drops, JoinDrops { indices: 1, wages: Some(1), priors: None });
        assert!((t.rows[0].log_wage.unwrap() - 10.9077).abs() < 1e-4);
    }

    #[test]
    fn empty_join() {
        let idx: BTreeMap<_, _> = [fused("11-1011", 1.0)].into();
        let wages = [wage("15-1011", 70000.0)];
        assert!(matches!(
            join_analysis_table(&idx, Some(&wages), None, &CategoryLookup::builtin()),
            Err(ReportError::EmptyJoin)
        ));
    }

    #[test]
    fn duplicate_wage_rows() {
        let idx: BTreeMap<_, _> = [fused("11-1011", 1.0)].into();
        let wages = [wage("11-1011", 1.0), wage("11-1011", 2.0)];
        assert!(matches!(
            join_analysis_table(&idx, Some(&wages), None, &CategoryLookup::builtin()),
            Err(ReportError::DuplicateKey { .. })
        ));
    }

    fn occ(code: &str, overall: f64) -> OccupationIndex {
        let (_, f) = fused(&code[..7], overall);
        OccupationIndex {
            onet_soc: code.parse().unwrap(),
            overall,
            pv_index: f.pv_index,
            da_index: f.da_index,
            tk_index: f.tk_index,
            ag_index: f.ag_index,
            n_tasks: 4,
            n_models: 2,
            per_model_overall: BTreeMap::new(),
        }
    }

    #[test]
    fn extremes_and_clamping() {
        let idx = vec![
            occ("41-9099.01", 1.9),
            occ("47-2221.00", 0.1),
            occ("11-1011.00", 1.0),
            occ("13-1011.00", 1.0),
        ];
        let titles = BTreeMap::from([("41-9099.01".parse().unwrap(), "Online Merchants".to_string())]);
        let e = extreme_occupations(&idx, &titles, 2);
        assert_eq!(e.top[0].occupation_title, "Online Merchants");
        assert_eq!(e.top[1].onet_soc.as_str(), "11-1011.00");
        assert_eq!(e.bottom[0].onet_soc.as_str(), "47-2221.00");
        assert_eq!(e.bottom[1].onet_soc.as_str(), "11-1011.00");
        let all = extreme_occupations(&idx, &titles, 99);
        assert_eq!(all.top.len(), 4);
        assert_eq!(all.bottom.len(), 4);
    }

    #[test]
    fn category_order() {
        let idx: BTreeMap<_, _> =
            [fused("11-1011", 1.8), fused("11-2011", 1.8), fused("49-1011", 0.2)].into();
        let t = join_analysis_table(&idx, None, None, &CategoryLookup::builtin()).unwrap();
        let s = category_summary(&t.rows);
        assert_eq!(s[0].category, "Management");
        assert_eq!(s[0].mean_overall, 1.8);
        assert_eq!(s[0].n, 2);
        assert_eq!(s[1].category, "Maintenance");
    }
}
