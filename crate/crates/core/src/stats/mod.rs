//! Rank statistics and collinearity diagnostics.
//!
//! Missing values in column data are represented as `NaN`.

mod descriptive;
mod kendall;
mod kruskal;
mod rank;
mod vif;

pub use descriptive::{descriptive, summarize, Descriptive, Summary};
pub use kendall::{kendall_tau, CorrelationResult};
pub use kruskal::{kruskal_wallis, KruskalResult};
pub use rank::{average_ranks, pearson, spearman, spearman_matrix};
pub use vif::{vif, vif_all, VifResult, VIF_CAP};

/// Two-sided p-value of a standard normal statistic.
pub(crate) fn normal_two_sided(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Pairs where both values are present.
pub(crate) fn paired(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    x.iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .unzip()
}
