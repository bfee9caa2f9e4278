use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CategoryMean, ExtremeRow, Extremes, JoinedRow, ReportError};
use crate::annotation::Factor;
use crate::ingest::PRIOR_FIELDS;
use crate::stats::{BinSummary, Coefficient, CorrelationTriangle, DisagreementRecord, RegressionResult};

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Header-addressed access to the rows of a CSV file.
struct Rows {
    headers: csv::StringRecord,
    rows: Vec<csv::StringRecord>,
}

impl Rows {
    fn read<R: Read>(input: R) -> Result<Self, ReportError> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        let rows = rdr.records().collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    fn iter(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().map(|r| Row {
            headers: &self.headers,
            rec: r,
        })
    }
}

struct Row<'a> {
    headers: &'a csv::StringRecord,
    rec: &'a csv::StringRecord,
}

impl Row<'_> {
    fn line(&self) -> u64 {
        self.rec.position().map_or(0, |p| p.line())
    }

    fn invalid(&self, reason: impl Into<String>) -> ReportError {
        ReportError::Invalid {
            line: self.line(),
            reason: reason.into(),
        }
    }

    fn str(&self, name: &str) -> Result<&str, ReportError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .and_then(|i| self.rec.get(i))
            .ok_or_else(|| self.invalid(format!("missing column `{name}`")))
    }

    fn parse<T: FromStr>(&self, name: &str) -> Result<T, ReportError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.str(name)?;
        raw.parse()
            .map_err(|e| self.invalid(format!("`{name}` value `{raw}`: {e}")))
    }

    fn opt<T: FromStr>(&self, name: &str) -> Result<Option<T>, ReportError>
    where
        T::Err: std::fmt::Display,
    {
        if self.str(name)?.is_empty() {
            Ok(None)
        } else {
            self.parse(name).map(Some)
        }
    }
}

const JOINED_FIXED: [&str; 11] = [
    "soc6",
    "job_category",
    "overall",
    "pv_index",
    "da_index",
    "tk_index",
    "ag_index",
    "mean_annual_wage",
    "employment",
    "log_wage",
    "log_employment",
];

pub fn write_joined<W: Write>(out: W, rows: &[JoinedRow]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(JOINED_FIXED.iter().chain(PRIOR_FIELDS.iter()))?;
    for r in rows {
        let mut rec = vec![
            r.soc6.to_string(),
            r.job_category.clone(),
            r.overall.to_string(),
            r.pv_index.to_string(),
            r.da_index.to_string(),
            r.tk_index.to_string(),
            r.ag_index.to_string(),
            opt(r.mean_annual_wage),
            opt(r.employment),
            opt(r.log_wage),
            opt(r.log_employment),
        ];
        rec.extend(r.priors.iter().map(|p| opt(*p)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_joined<R: Read>(input: R) -> Result<Vec<JoinedRow>, ReportError> {
    let rows = Rows::read(input)?;
    rows.iter()
        .map(|row| {
            let mut priors = [None; 9];
            for (slot, name) in priors.iter_mut().zip(PRIOR_FIELDS) {
                *slot = row.opt(name)?;
            }
            Ok(JoinedRow {
                soc6: row.parse("soc6")?,
                job_category: row.str("job_category")?.to_string(),
                overall: row.parse("overall")?,
                pv_index: row.parse("pv_index")?,
                da_index: row.parse("da_index")?,
                tk_index: row.parse("tk_index")?,
                ag_index: row.parse("ag_index")?,
                mean_annual_wage: row.opt("mean_annual_wage")?,
                employment: row.opt("employment")?,
                log_wage: row.opt("log_wage")?,
                log_employment: row.opt("log_employment")?,
                priors,
            })
        })
        .collect()
}

pub fn write_extremes<W: Write>(out: W, extremes: &Extremes) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["list", "rank", "onet_soc", "occupation_title", "overall"])?;
    for (list, rows) in [("top", &extremes.top), ("bottom", &extremes.bottom)] {
        for r in rows {
            w.write_record([
                list.to_string(),
                r.rank.to_string(),
                r.onet_soc.to_string(),
                r.occupation_title.clone(),
                r.overall.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_extremes<R: Read>(input: R) -> Result<Extremes, ReportError> {
    let mut out = Extremes::default();
    for row in Rows::read(input)?.iter() {
        let rec = ExtremeRow {
            rank: row.parse("rank")?,
            onet_soc: row.parse("onet_soc")?,
            occupation_title: row.str("occupation_title")?.to_string(),
            overall: row.parse("overall")?,
        };
        match row.str("list")? {
            "top" => out.top.push(rec),
            "bottom" => out.bottom.push(rec),
            other => return Err(row.invalid(format!("unknown list `{other}`"))),
        }
    }
    Ok(out)
}

pub fn write_category_means<W: Write>(out: W, rows: &[CategoryMean]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["category", "mean_overall", "n"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_category_means<R: Read>(input: R) -> Result<Vec<CategoryMean>, ReportError> {
    let mut rdr = csv::Reader::from_reader(input);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_regression_table<W: Write>(
    out: W,
    results: &[(String, RegressionResult)],
) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dependent", "term", "estimate", "std_error", "t_stat", "p_value", "stars"])?;
    for (dep, r) in results {
        for c in &r.coefficients {
            w.write_record([
                dep.clone(),
                c.name.clone(),
                c.estimate.to_string(),
                c.std_error.to_string(),
                c.t_stat.to_string(),
                c.p_value.to_string(),
                c.stars.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Coefficient rows grouped by dependent variable, in file order.
pub fn read_regression_table<R: Read>(input: R) -> Result<Vec<(String, Vec<Coefficient>)>, ReportError> {
    let mut out: Vec<(String, Vec<Coefficient>)> = Vec::new();
    for row in Rows::read(input)?.iter() {
        let dep = row.str("dependent")?;
        let c = Coefficient {
            name: row.str("term")?.to_string(),
            estimate: row.parse("estimate")?,
            std_error: row.parse("std_error")?,
            t_stat: row.parse("t_stat")?,
            p_value: row.parse("p_value")?,
            stars: row.str("stars")?.to_string(),
        };
        match out.last_mut() {
            Some((d, v)) if d == dep => v.push(c),
            _ => out.push((dep.to_string(), vec![c])),
        }
    }
    Ok(out)
}

/// Model-level statistics of one regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub dependent: String,
    pub n_obs: usize,
    pub r2: f64,
    pub adj_r2: f64,
    pub resid_std_error: f64,
    pub f_stat: f64,
    pub f_p_value: f64,
    pub df_model: usize,
    pub df_resid: usize,
}

impl RegressionFit {
    pub fn of(dependent: &str, r: &RegressionResult) -> Self {
        Self {
            dependent: dependent.to_string(),
            n_obs: r.n_obs,
            r2: r.r2,
            adj_r2: r.adj_r2,
            resid_std_error: r.resid_std_error,
            f_stat: r.f_stat,
            f_p_value: r.f_p_value,
            df_model: r.df_model,
            df_resid: r.df_resid,
        }
    }
}

pub fn write_regression_fit<W: Write>(
    out: W,
    results: &[(String, RegressionResult)],
) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for (dep, r) in results {
        w.serialize(RegressionFit::of(dep, r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_regression_fit<R: Read>(input: R) -> Result<Vec<RegressionFit>, ReportError> {
    let mut rdr = csv::Reader::from_reader(input);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCell {
    pub row: String,
    pub column: String,
    pub r: Option<f64>,
}

pub fn write_correlation_triangle<W: Write>(out: W, t: &CorrelationTriangle) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "column", "r"])?;
    for (row, col, r) in t.cells() {
        w.write_record([row.to_string(), col.to_string(), opt(r)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_correlation_triangle<R: Read>(input: R) -> Result<Vec<CorrelationCell>, ReportError> {
    Rows::read(input)?
        .iter()
        .map(|row| {
            Ok(CorrelationCell {
                row: row.str("row")?.to_string(),
                column: row.str("column")?.to_string(),
                r: row.opt("r")?,
            })
        })
        .collect()
}

pub fn write_binscatter<W: Write>(out: W, bins: &[BinSummary]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for b in bins {
        w.serialize(b)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binscatter<R: Read>(input: R) -> Result<Vec<BinSummary>, ReportError> {
    let mut rdr = csv::Reader::from_reader(input);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

fn encode_models(m: &BTreeMap<String, f64>) -> String {
    m.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn decode_models(s: &str) -> Result<BTreeMap<String, f64>, String> {
    if s.is_empty() {
        return Ok(BTreeMap::new());
    }
    s.split(';')
        .map(|pair| {
            let (k, v) = pair
                .rsplit_once('=')
                .ok_or_else(|| format!("`{pair}` is not model=value"))?;
            let v = v.parse::<f64>().map_err(|e| format!("`{pair}`: {e}"))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

pub fn write_disagreement<W: Write>(out: W, rows: &[DisagreementRecord]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "rank",
        "onet_soc",
        "occupation_title",
        "spread",
        "std_across_models",
        "per_model_overall",
    ])?;
    for (i, r) in rows.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            r.onet_soc.to_string(),
            r.occupation_title.clone(),
            r.spread.to_string(),
            r.std_across_models.to_string(),
            encode_models(&r.per_model_overall),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_disagreement<R: Read>(input: R) -> Result<Vec<DisagreementRecord>, ReportError> {
    Rows::read(input)?
        .iter()
        .map(|row| {
            Ok(DisagreementRecord {
                onet_soc: row.parse("onet_soc")?,
                occupation_title: row.str("occupation_title")?.to_string(),
                per_model_overall: decode_models(row.str("per_model_overall")?)
                    .map_err(|e| row.invalid(e))?,
                spread: row.parse("spread")?,
                std_across_models: row.parse("std_across_models")?,
            })
        })
        .collect()
}

pub fn write_factor_disagreement<W: Write>(out: W, by_factor: &BTreeMap<Factor, f64>) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["factor", "mean_abs_difference"])?;
    for (f, v) in by_factor {
        w.write_record([f.key().to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_factor_disagreement<R: Read>(input: R) -> Result<BTreeMap<Factor, f64>, ReportError> {
    Rows::read(input)?
        .iter()
        .map(|row| {
            let key = row.str("factor")?;
            let f = Factor::ALL
                .into_iter()
                .find(|f| f.key() == key)
                .ok_or_else(|| row.invalid(format!("unknown factor `{key}`")))?;
            Ok((f, row.parse("mean_abs_difference")?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ols, Regressor};

    #[test]
    fn model_map_encoding() {
        let m = BTreeMap::from([("a:x".to_string(), 0.25), ("stub:stub-1".to_string(), 1.5)]);
        assert_eq!(decode_models(&encode_models(&m)).unwrap(), m);
        assert_eq!(decode_models("").unwrap(), BTreeMap::new());
        assert!(decode_models("nope").is_err());
    }

    #[test]
    fn regression_round_trip() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![1.1, 1.9, 3.2, 3.9, 5.3];
        let r = ols(&y, &[Regressor::new("x", x)]).unwrap();
        let results = vec![("overall".to_string(), r.clone())];

        let mut buf = Vec::new();
        write_regression_table(&mut buf, &results).unwrap();
        let back = read_regression_table(buf.as_slice()).unwrap();
        assert_eq!(back, vec![("overall".to_string(), r.coefficients.clone())]);

        let mut buf = Vec::new();
        write_regression_fit(&mut buf, &results).unwrap();
        assert_eq!(read_regression_fit(buf.as_slice()).unwrap(), vec![RegressionFit::of("overall", &r)]);
    }

    #[test]
    fn factor_round_trip() {
        let m: BTreeMap<Factor, f64> = Factor::ALL.iter().zip([0.1, 0.2, 0.3, 0.4]).map(|(f, v)| (*f, v)).collect();
        let mut buf = Vec::new();
        write_factor_disagreement(&mut buf, &m).unwrap();
        assert_eq!(read_factor_disagreement(buf.as_slice()).unwrap(), m);
    }
}
