use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::linalg::least_squares_qr;
use super::{mean, StatsError};

/// Name given to the intercept term.
pub const INTERCEPT: &str = "Constant";

#[derive(Debug, Clone, PartialEq)]
pub struct Regressor {
    pub name: String,
    pub values: Vec<f64>,
}

impl Regressor {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    /// Intercept first, then regressors in input order.
    pub coefficients: Vec<Coefficient>,
    pub r2: f64,
    pub adj_r2: f64,
    pub resid_std_error: f64,
    pub f_stat: f64,
    pub f_p_value: f64,
    pub n_obs: usize,
    pub df_model: usize,
    pub df_resid: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Overall F statistic implied by R² and the degrees of freedom.
pub fn f_stat_from_r2(r2: f64, df_model: usize, df_resid: usize) -> f64 {
    (r2 / df_model as f64) / ((1.0 - r2) / df_resid as f64)
}

pub fn adj_r2_from_r2(r2: f64, n_obs: usize, df_resid: usize) -> f64 {
    1.0 - (1.0 - r2) * (n_obs as f64 - 1.0) / df_resid as f64
}

/// `***` below 0.001, `**` below 0.01, `*` below 0.05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Ordinary least squares of `y` on an intercept plus `regressors`, solved
/// by Householder QR, with homoskedastic standard errors and two-sided
/// t-test p-values on `n - k - 1` degrees of freedom.
pub fn ols(y: &[f64], regressors: &[Regressor]) -> Result<RegressionResult, StatsError> {
    let n = y.len();
    let k = regressors.len();
    if n <= k + 1 {
        return Err(StatsError::InsufficientObservations {
            n_obs: n,
            n_params: k + 1,
        });
    }
    if y.iter().chain(regressors.iter().flat_map(|r| &r.values)).any(|v| !v.is_finite()) {
        return Err(StatsError::DegenerateInput("non-finite value in regression data".into()));
    }
    let mut names = vec![INTERCEPT.to_string()];
    let mut columns = vec![vec![1.0; n]];
    for r in regressors {
        names.push(r.name.clone());
        columns.push(r.values.clone());
    }
    let ls = least_squares_qr(&columns, &names, y)?;

    let ybar = mean(y);
    let sst: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    if sst == 0.0 {
        return Err(StatsError::DegenerateInput("response has zero variance".into()));
    }
    let ssr: f64 = (0..n)
        .map(|i| {
            let fitted: f64 = columns.iter().zip(&ls.beta).map(|(c, b)| c[i] * b).sum();
            (y[i] - fitted).powi(2)
        })
        .sum();
    let df_resid = n - k - 1;
    let sigma2 = ssr / df_resid as f64;
    let r2 = 1.0 - ssr / sst;

    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64).expect("df_resid >= 1");
    let coefficients = names
        .into_iter()
        .zip(&ls.beta)
        .enumerate()
        .map(|(j, (name, &estimate))| {
            let var: f64 = ls.r_inv[j].iter().map(|v| v * v).sum::<f64>() * sigma2;
            let std_error = var.sqrt();
            let t_stat = estimate / std_error;
            let p_value = if t_stat.is_nan() {
                f64::NAN
            } else {
                (2.0 * t_dist.sf(t_stat.abs())).min(1.0)
            };
            Coefficient {
                name,
                estimate,
                std_error,
                t_stat,
                p_value,
                stars: significance_stars(p_value).to_string(),
            }
        })
        .collect();

    let f_stat = if k > 0 { f_stat_from_r2(r2, k, df_resid) } else { 0.0 };
    let f_p_value = if k > 0 && f_stat.is_finite() {
        FisherSnedecor::new(k as f64, df_resid as f64)
            .expect("positive degrees of freedom")
            .sf(f_stat)
    } else if f_stat.is_infinite() {
        0.0
    } else {
        1.0
    };
    Ok(RegressionResult {
        coefficients,
        r2,
        adj_r2: adj_r2_from_r2(r2, n, df_resid),
        resid_std_error: sigma2.sqrt(),
        f_stat,
        f_p_value,
        n_obs: n,
        df_model: k,
        df_resid,
    })
}
