use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gbdt::argmax;
use super::{Classifier, DataMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features tried per split; `None` means √p.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum FNode {
    Split {
        feature: usize,
        threshold: f64,
        missing_left: bool,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct FTree {
    nodes: Vec<FNode>,
}

impl FTree {
    fn predict(&self, row: &[f64]) -> usize {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                FNode::Leaf { class } => return *class,
                FNode::Split {
                    feature,
                    threshold,
                    missing_left,
                    left,
                    right,
                } => {
                    let v = row[*feature];
                    let go_left = if v.is_nan() { *missing_left } else { v < *threshold };
                    k = if go_left { *left } else { *right };
                }
            }
        }
    }
}

/// Extremely randomized trees with Gini impurity. Missing values follow the
/// side that received more present rows at training time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtraTrees {
    pub feature_names: Vec<String>,
    pub n_classes: usize,
    trees: Vec<FTree>,
    importances: Vec<f64>,
}

fn gini(counts: &[f64]) -> f64 {
    let n: f64 = counts.iter().sum();
    if n == 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / n).powi(2)).sum::<f64>()
}

struct Grower<'a> {
    x: &'a DataMatrix,
    y: &'a [usize],
    n_classes: usize,
    params: &'a ForestParams,
    max_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<FNode>,
    importance: Vec<f64>,
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.n_classes];
        for &i in rows {
            c[self.y[i]] += 1.0;
        }
        c
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let impurity = gini(&counts);
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if impurity == 0.0 || rows.len() < self.params.min_samples_split || !depth_ok {
            self.nodes.push(FNode::Leaf { class: argmax(&counts) });
            return self.nodes.len() - 1;
        }
        let mut order: Vec<usize> = (0..self.x.n_cols()).collect();
        order.shuffle(&mut self.rng);
        let mut tried = 0;
        let mut best: Option<(f64, usize, f64, bool)> = None;
        for j in order {
            if tried == self.max_features {
                break;
            }
            let col = self.x.column(j);
            let (lo, hi) = rows
                .iter()
                .map(|&i| col[i])
                .filter(|v| !v.is_nan())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !(lo < hi) {
                continue;
            }
            tried += 1;
            let t = self.rng.gen_range(lo..hi);
            let t = if t > lo { t } else { hi };
            let mut l = vec![0.0; self.n_classes];
            let mut r = vec![0.0; self.n_classes];
            let mut m = vec![0.0; self.n_classes];
            for &i in &rows {
                let v = col[i];
                let side = if v.is_nan() {
                    &mut m
                } else if v < t {
                    &mut l
                } else {
                    &mut r
                };
                side[self.y[i]] += 1.0;
            }
            let missing_left = l.iter().sum::<f64>() >= r.iter().sum::<f64>();
            let target = if missing_left { &mut l } else { &mut r };
            for (a, b) in target.iter_mut().zip(&m) {
                *a += b;
            }
            let (nl, nr) = (l.iter().sum::<f64>(), r.iter().sum::<f64>());
            let n = nl + nr;
            let decrease = impurity - (nl / n) * gini(&l) - (nr / n) * gini(&r);
            if best.is_none_or(|b| decrease > b.0) {
                best = Some((decrease, j, t, missing_left));
            }
        }
        let Some((decrease, feature, threshold, missing_left)) = best else {
            self.nodes.push(FNode::Leaf { class: argmax(&counts) });
            return self.nodes.len() - 1;
        };
        self.importance[feature] += decrease * rows.len() as f64;
        let col = self.x.column(feature);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| {
            let v = col[i];
            if v.is_nan() {
                missing_left
            } else {
                v < threshold
            }
        });
        let id = self.nodes.len();
        self.nodes.push(FNode::Leaf { class: 0 });
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = FNode::Split {
            feature,
            threshold,
            missing_left,
            left,
            right,
        };
        id
    }
}

impl ExtraTrees {
    pub fn train(x: &DataMatrix, y: &[usize], n_classes: usize, params: &ForestParams) -> Result<Self> {
        if y.len() != x.n_rows() {
            return Err(Error::Schema(format!("{} labels for {} rows", y.len(), x.n_rows())));
        }
        if n_classes == 0 || y.iter().any(|&c| c >= n_classes) {
            return Err(Error::InvalidData("label outside 0..n_classes".into()));
        }
        let p = x.n_cols();
        let max_features = params
            .max_features
            .unwrap_or_else(|| (p as f64).sqrt().round() as usize)
            .clamp(1, p.max(1));
        let mut g = Grower {
            x,
            y,
            n_classes,
            params,
            max_features,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            nodes: Vec::new(),
            importance: vec![0.0; p],
        };
        let mut trees = Vec::with_capacity(params.n_trees);
        for _ in 0..params.n_trees {
            g.nodes.clear();
            g.grow((0..x.n_rows()).collect(), 0);
            trees.push(FTree {
                nodes: std::mem::take(&mut g.nodes),
            });
        }
        let total: f64 = g.importance.iter().sum();
        let importances = if total > 0.0 {
            g.importance.iter().map(|v| v / total).collect()
        } else {
            g.importance
        };
        Ok(Self {
            feature_names: x.names().to_vec(),
            n_classes,
            trees,
            importances,
        })
    }

    /// Normalized mean impurity decrease per feature (sums to 1 unless no
    /// split was made).
    pub fn feature_importance(&self) -> &[f64] {
        &self.importances
    }

    /// Majority vote of the trees; ties go to the lowest class.
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.predict(row)] += 1.0;
        }
        argmax(&votes)
    }
}

impl Classifier for ExtraTrees {
    fn predict_labels(&self, x: &DataMatrix) -> Result<Vec<usize>> {
        let x = if x.names() == self.feature_names.as_slice() {
            x.clone()
        } else {
            x.select_named(&self.feature_names)?
        };
        Ok((0..x.n_rows()).map(|i| self.predict(&x.row(i))).collect())
    }
}
