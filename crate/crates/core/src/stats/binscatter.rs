use serde::{Deserialize, Serialize};

use super::{listwise, mean, StatsError};

pub const DEFAULT_BINS: usize = 20;
/// Normal-approximation multiplier for the 95% interval of a bin mean.
pub const CI_MULTIPLIER: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub bin_index: usize,
    pub x_low: f64,
    pub x_high: f64,
    pub mean_y: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

/// Equal-count quantile bins on `x` with the mean of `y` per bin.
///
/// Points are ordered by `x` (ties keep input order) and cut into `n_bins`
/// consecutive groups whose sizes differ by at most one; the first
/// `len % n_bins` bins get the extra point.
pub fn binscatter(x: &[f64], y: &[f64], n_bins: usize) -> Result<Vec<BinSummary>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::DegenerateInput("non-finite value in binscatter input".into()));
    }
    let n = x.len();
    if n_bins == 0 || n < n_bins {
        return Err(StatsError::TooFewObservations { n, n_bins });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));

    let base = n / n_bins;
    let extra = n % n_bins;
    let mut bins = Vec::with_capacity(n_bins);
    let mut start = 0;
    for bin_index in 0..n_bins {
        let size = base + usize::from(bin_index < extra);
        let members = &order[start..start + size];
        start += size;
        let ys: Vec<f64> = members.iter().map(|&i| y[i]).collect();
        let mean_y = mean(&ys);
        let sd = if size > 1 {
            (ys.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>() / (size - 1) as f64).sqrt()
        } else {
            0.0
        };
        let half = CI_MULTIPLIER * sd / (size as f64).sqrt();
        bins.push(BinSummary {
            bin_index,
            x_low: x[members[0]],
            x_high: x[members[size - 1]],
            mean_y,
            ci_low: mean_y - half,
            ci_high: mean_y + half,
            n: size,
        });
    }
    Ok(bins)
}

pub fn binscatter_pairwise(
    x: &[Option<f64>],
    y: &[Option<f64>],
    n_bins: usize,
) -> Result<Vec<BinSummary>, StatsError> {
    let (x, y) = listwise(x, y)?;
    binscatter(&x, &y, n_bins)
}
