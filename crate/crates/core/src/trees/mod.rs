//! Boosted trees with missing-value routing, extremely randomized trees and
//! a kNN baseline.

mod forest;
mod gbdt;
mod importance;
mod knn;
mod matrix;

pub use forest::{ExtraTrees, ForestParams};
pub use gbdt::{fit_tree, split_gain, DefaultDirection, Gbdt, GbdtParams, Node, SplitCandidate, Tree};
pub use importance::permutation_importance;
pub use knn::{knn_predict, Knn, Metric, Weighting};
pub use matrix::DataMatrix;

use crate::error::Result;

/// A fitted model that assigns class labels to table rows.
pub trait Classifier {
    fn predict_labels(&self, x: &DataMatrix) -> Result<Vec<usize>>;
}

/// Fraction of matching labels (0 for empty input).
pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}
