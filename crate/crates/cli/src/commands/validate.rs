use std::collections::{BTreeMap, BTreeSet};

use exposure_core::aggregation::{read_per_model, read_soc6_index};
use exposure_core::ingest::{parse_prior_indices, Soc6Code, PRIOR_FIELDS};
use exposure_core::report::{
    join_analysis_table, render_regression_text, write_correlation_triangle,
    write_regression_fit, write_regression_table, CategoryLookup, JoinedRow,
};
use exposure_core::stats::{correlation_triangle, ols, standardize, Regressor, RegressionResult};

use super::ValidateArgs;
use crate::output::{input_error, open, out_dir, required, Stage};
use crate::{CliError, Context};

/// Dependent variables, in table order.
pub const DEPENDENTS: [&str; 5] = ["overall", "pv_index", "da_index", "tk_index", "ag_index"];

/// Regressors put on a unit scale before fitting.
pub const STANDARDIZED: [&str; 2] = ["routine_cognitive", "routine_manual"];

pub fn run(ctx: Context, args: ValidateArgs) -> Result<(), CliError> {
    let settings = ctx.settings;
    settings.check()?;
    let regressors = pick_regressors(&args.regressors)?;
    let index_path = required(args.index_soc6, &None, "index-soc6")?;
    let priors_path = required(args.priors, &ctx.paths.priors, "priors")?;

    let mut stage = Stage::new("validate", out_dir(args.out_dir, &ctx.paths.out_dir), &settings)?;
    stage.input(&index_path)?;
    let fused = read_soc6_index(open(&index_path)?).map_err(input_error(&index_path))?;
    stage.input(&priors_path)?;
    let priors = parse_prior_indices(&priors_path).map_err(input_error(&priors_path))?;
    stage.rejects(&priors_path, &priors.rejects)?;

    let joined = join_analysis_table(&fused, None, Some(&priors.records), &CategoryLookup::builtin())
        .map_err(|e| CliError::Runtime(format!("joining indices with priors: {e}")))?;
    stage.note("joined_rows", joined.rows.len());
    stage.note("dropped_indices", joined.drops.indices);
    stage.note("dropped_priors", joined.drops.priors.unwrap_or(0));

    let results = regressions(&joined.rows, &regressors)?;
    stage.note("regression_n_obs", results[0].1.n_obs);
    stage.write("regression_table.csv", |w| write_regression_table(w, &results))?;
    stage.write("regression_fit.csv", |w| write_regression_fit(w, &results))?;
    let text = render_regression_text(&results);
    stage.write("regression_table.txt", |w| {
        w.extend_from_slice(text.as_bytes());
        Ok::<_, CliError>(())
    })?;

    let mut columns = vec![("overall".to_string(), joined.rows.iter().map(|r| Some(r.overall)).collect())];
    for f in PRIOR_FIELDS {
        columns.push((f.to_string(), joined.rows.iter().map(|r| r.prior(f)).collect()));
    }
    let tri = correlation_triangle(&columns).map_err(|e| CliError::Runtime(format!("correlations: {e}")))?;
    stage.write("correlation_triangle.csv", |w| write_correlation_triangle(w, &tri))?;

    if let Some(path) = args.per_model {
        stage.input(&path)?;
        let rows = read_per_model(open(&path)?).map_err(input_error(&path))?;
        let sample: BTreeSet<&Soc6Code> = joined.rows.iter().map(|r| &r.soc6).collect();
        // model -> soc6 -> (sum, count) over the occupations in the code
        let mut acc: BTreeMap<String, BTreeMap<Soc6Code, (f64, usize)>> = BTreeMap::new();
        for r in &rows {
            let soc6 = r.onet_soc.soc6();
            if sample.contains(&soc6) {
                let e = acc.entry(r.model.clone()).or_default().entry(soc6).or_default();
                e.0 += r.overall;
                e.1 += 1;
            }
        }
        let columns: Vec<(String, Vec<Option<f64>>)> = acc
            .into_iter()
            .map(|(model, by_code)| {
                let values = sample
                    .iter()
                    .map(|c| by_code.get(*c).map(|(s, n)| s / *n as f64))
                    .collect();
                (model, values)
            })
            .collect();
        let tri = correlation_triangle(&columns)
            .map_err(|e| CliError::Runtime(format!("model correlations: {e}")))?;
        stage.write("model_correlation_triangle.csv", |w| write_correlation_triangle(w, &tri))?;
    }
    stage.finish()
}

fn pick_regressors(names: &[String]) -> Result<Vec<&'static str>, CliError> {
    if names.is_empty() {
        return Ok(PRIOR_FIELDS.to_vec());
    }
    let mut out = Vec::new();
    for name in names {
        let field = PRIOR_FIELDS
            .iter()
            .find(|f| **f == name.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown regressor `{name}` (choose from {})", PRIOR_FIELDS.join(", "))))?;
        if out.contains(field) {
            return Err(CliError::Usage(format!("regressor `{name}` listed twice")));
        }
        out.push(*field);
    }
    Ok(out)
}

/// Fits every dependent on the rows where all regressors are present.
pub fn regressions(rows: &[JoinedRow], regressors: &[&str]) -> Result<Vec<(String, RegressionResult)>, CliError> {
    let sample: Vec<&JoinedRow> = rows
        .iter()
        .filter(|r| regressors.iter().all(|f| r.prior(f).is_some_and(f64::is_finite)))
        .collect();
    let design = regressors
        .iter()
        .map(|f| {
            let values: Vec<f64> = sample.iter().map(|r| r.prior(f).unwrap_or(f64::NAN)).collect();
            if STANDARDIZED.contains(f) && values.len() > 1 {
                let z = standardize(&values)
                    .map_err(|e| CliError::Runtime(format!("cannot standardize `{f}`: {e}")))?;
                Ok(Regressor::new(*f, z))
            } else {
                Ok(Regressor::new(*f, values))
            }
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    DEPENDENTS
        .iter()
        .map(|dep| {
            let y: Vec<f64> = sample.iter().map(|r| r.value(dep).unwrap_or(f64::NAN)).collect();
            ols(&y, &design)
                .map(|res| (dep.to_string(), res))
                .map_err(|e| CliError::Runtime(format!("regression of {dep}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regressor_selection() {
        assert_eq!(pick_regressors(&[]).unwrap().len(), 9);
        assert_eq!(pick_regressors(&["sml".into(), "webb_ai".into()]).unwrap(), ["sml", "webb_ai"]);
        assert!(matches!(pick_regressors(&["nope".into()]), Err(CliError::Usage(_))));
        assert!(matches!(pick_regressors(&["sml".into(), "sml".into()]), Err(CliError::Usage(_))));
    }
}
