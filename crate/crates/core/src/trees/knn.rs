use serde::{Deserialize, Serialize};

use super::gbdt::argmax;
use super::{Classifier, DataMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Uniform,
    Distance,
}

fn distance(a: &[f64], b: &[f64], m: Metric) -> f64 {
    match m {
        Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
        Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
    }
}

/// k-nearest-neighbour classifier over complete data.
#[derive(Debug, Clone)]
pub struct Knn {
    x: DataMatrix,
    y: Vec<usize>,
    n_classes: usize,
    pub k: usize,
    pub metric: Metric,
    pub weighting: Weighting,
}

impl Knn {
    pub fn fit(x: &DataMatrix, y: &[usize], k: usize, metric: Metric, weighting: Weighting) -> Result<Self> {
        if x.has_missing() {
            return Err(Error::Schema("kNN requires complete data".into()));
        }
        if y.len() != x.n_rows() || y.is_empty() {
            return Err(Error::Schema("kNN needs one label per training row".into()));
        }
        if k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        Ok(Self {
            x: x.clone(),
            y: y.to_vec(),
            n_classes: y.iter().max().unwrap() + 1,
            k,
            metric,
            weighting,
        })
    }

    pub fn predict(&self, query: &[f64]) -> Result<usize> {
        if query.iter().any(|v| v.is_nan()) {
            return Err(Error::Schema("kNN query has missing values".into()));
        }
        if query.len() != self.x.n_cols() {
            return Err(Error::Schema("kNN query width differs from training data".into()));
        }
        let mut d: Vec<(f64, usize)> = (0..self.x.n_rows())
            .map(|i| (distance(&self.x.row(i), query, self.metric), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let near = &d[..self.k.min(d.len())];
        let mut votes = vec![0.0; self.n_classes];
        match self.weighting {
            Weighting::Uniform => near.iter().for_each(|&(_, i)| votes[self.y[i]] += 1.0),
            Weighting::Distance => {
                if near.iter().any(|p| p.0 == 0.0) {
                    near.iter()
                        .filter(|p| p.0 == 0.0)
                        .for_each(|&(_, i)| votes[self.y[i]] += 1.0);
                } else {
                    near.iter().for_each(|&(dist, i)| votes[self.y[i]] += 1.0 / dist);
                }
            }
        }
        Ok(argmax(&votes))
    }
}

impl Classifier for Knn {
    fn predict_labels(&self, x: &DataMatrix) -> Result<Vec<usize>> {
        let x = x.select_named(self.x.names())?;
        (0..x.n_rows()).map(|i| self.predict(&x.row(i))).collect()
    }
}

/// One-shot kNN prediction for a single query row.
pub fn knn_predict(
    train: &DataMatrix,
    labels: &[usize],
    query: &[f64],
    k: usize,
    metric: Metric,
    weighting: Weighting,
) -> Result<usize> {
    Knn::fit(train, labels, k, metric, weighting)?.predict(query)
}
