//! Validation statistics: correlations, OLS with classical inference,
//! binscatter summaries and cross-model disagreement.

mod binscatter;
mod correlation;
mod disagreement;
mod linalg;
mod ols;

use thiserror::Error;

pub use binscatter::{binscatter, binscatter_pairwise, BinSummary, CI_MULTIPLIER, DEFAULT_BINS};
pub use correlation::{
    correlation_triangle, pearson, pearson_pairwise, standardize, CorrelationTriangle,
};
pub use disagreement::{disagreement_ranking, factor_disagreement, DisagreementRecord};
pub use linalg::{least_squares_qr, LeastSquares};
pub use ols::{
    adj_r2_from_r2, f_stat_from_r2, ols, significance_stars, Coefficient, Regressor,
    RegressionResult, INTERCEPT,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{n_obs} observations are not enough for {n_params} parameters")]
    InsufficientObservations { n_obs: usize, n_params: usize },
    #[error("design matrix is rank deficient at column `{0}`")]
    RankDeficient(String),
    #[error("{n} observations cannot fill {n_bins} bins")]
    TooFewObservations { n: usize, n_bins: usize },
    #[error("no task is annotated by two or more models")]
    NoSharedTasks,
}

/// Mean taken relative to the first element; exact for constant input.
pub(crate) fn mean(x: &[f64]) -> f64 {
    let first = x[0];
    first + x.iter().map(|v| v - first).sum::<f64>() / x.len() as f64
}

/// Keeps positions where both sides are present and finite.
pub(crate) fn listwise(x: &[Option<f64>], y: &[Option<f64>]) -> Result<(Vec<f64>, Vec<f64>), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.iter()
        .zip(y)
        .filter_map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => Some((*a, *b)),
            _ => None,
        })
        .unzip())
}
