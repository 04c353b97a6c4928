use serde::{Deserialize, Serialize};

use super::{check_shape, group_folds, group_kfold, FeatureDiagnostic, SelectionResult};
use crate::error::{Error, Result};
use crate::stats::kendall_tau;
use crate::trees::{Classifier, DataMatrix, ExtraTrees, ForestParams, Gbdt, GbdtParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WrapperConfig {
    pub gbdt: GbdtParams,
    /// Speaker-grouped folds for RFE; `None` = leave one speaker out.
    pub cv_folds: Option<usize>,
    pub forest: ForestParams,
    /// Significance level for the filter selector.
    pub alpha: f64,
}

impl Default for WrapperConfig {
    fn default() -> Self {
        Self {
            gbdt: GbdtParams {
                rounds: 30,
                max_depth: 3,
                ..Default::default()
            },
            cv_folds: None,
            forest: ForestParams::default(),
            alpha: 0.05,
        }
    }
}

/// Keeps features whose Kendall tau with the labels has p below `alpha`.
/// Rows missing the feature are skipped for that feature.
pub fn filter_select(x: &DataMatrix, y: &[f64], alpha: f64) -> Result<SelectionResult> {
    check_shape(x.n_rows(), y.len(), None)?;
    let mut selected = Vec::new();
    let mut diagnostics = Vec::new();
    for (j, name) in x.names().iter().enumerate() {
        let (a, b): (Vec<f64>, Vec<f64>) = x
            .column(j)
            .iter()
            .zip(y)
            .filter(|(v, _)| !v.is_nan())
            .map(|(v, l)| (*v, *l))
            .unzip();
        let mut d = FeatureDiagnostic::named(name);
        match kendall_tau(&a, &b) {
            Ok(r) => {
                d.coefficient = Some(r.coefficient);
                d.p_value = Some(r.p_value);
                if r.p_value < alpha {
                    selected.push(name.clone());
                }
            }
            Err(Error::Undefined(_)) => d.note = Some("constant; excluded".into()),
            Err(Error::Precondition(_)) => d.note = Some("fewer than 2 values; excluded".into()),
            Err(e) => return Err(e),
        }
        diagnostics.push(d);
    }
    Ok(SelectionResult {
        method: "filter".into(),
        selected,
        diagnostics,
        curve: Vec::new(),
        chosen: vec![("alpha".into(), alpha)],
    })
}

fn n_classes(y: &[usize]) -> usize {
    y.iter().max().map_or(1, |m| m + 1)
}

struct FoldEval {
    accuracy: f64,
    /// Gain importance averaged over folds.
    gain: Vec<f64>,
}

fn evaluate(
    x: &DataMatrix,
    y: &[usize],
    folds: &[(Vec<usize>, Vec<usize>)],
    params: &GbdtParams,
) -> Result<FoldEval> {
    let k = n_classes(y);
    let mut correct = 0usize;
    let mut total = 0usize;
    let mut gain = vec![0.0; x.n_cols()];
    for (train, test) in folds {
        let ytr: Vec<usize> = train.iter().map(|&i| y[i]).collect();
        let m = Gbdt::train(&x.select_rows(train), &ytr, k, params)?;
        let pred = m.predict_labels(&x.select_rows(test))?;
        correct += test.iter().zip(&pred).filter(|(&i, &p)| y[i] == p).count();
        total += test.len();
        for (g, v) in gain.iter_mut().zip(m.gain_importance()) {
            *g += v / folds.len() as f64;
        }
    }
    Ok(FoldEval {
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        gain,
    })
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = k;
        }
    }
    best
}

/// Backward elimination: repeatedly drop the least important feature while
/// recording CV accuracy, then return the best subset (ties → fewer features).
fn eliminate(
    method: &str,
    x: &DataMatrix,
    y: &[usize],
    folds: &[(Vec<usize>, Vec<usize>)],
    params: &GbdtParams,
    importance_from_folds: bool,
) -> Result<SelectionResult> {
    if x.n_cols() == 0 {
        return Err(Error::Precondition(format!("{method}: no features")));
    }
    let mut current: Vec<usize> = (0..x.n_cols()).collect();
    let mut history: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut last_importance = vec![None; x.n_cols()];
    loop {
        let sub = x.select_columns(&current);
        let eval = evaluate(&sub, y, folds, params)?;
        let importance = if importance_from_folds {
            eval.gain.clone()
        } else {
            let all_rows: Vec<usize> = (0..x.n_rows()).collect();
            let m = Gbdt::train(&sub.select_rows(&all_rows), y, n_classes(y), params)?;
            m.gain_importance()
        };
        for (k, &j) in current.iter().enumerate() {
            last_importance[j] = Some(importance[k]);
        }
        history.push((current.clone(), eval.accuracy));
        if current.len() == 1 {
            break;
        }
        current.remove(argmin(&importance));
    }
    let best = history
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.1.total_cmp(&b.1)
                .then(b.0.len().cmp(&a.0.len()))
                .then(ib.cmp(ia))
        })
        .map(|(k, _)| k)
        .unwrap();
    let mut chosen = history[best].0.clone();
    chosen.sort_unstable();
    Ok(SelectionResult {
        method: method.to_string(),
        selected: chosen.iter().map(|&j| x.names()[j].clone()).collect(),
        diagnostics: x
            .names()
            .iter()
            .enumerate()
            .map(|(j, n)| FeatureDiagnostic {
                importance: last_importance[j],
                ..FeatureDiagnostic::named(n)
            })
            .collect(),
        curve: history.iter().map(|(f, a)| (f.len(), *a)).collect(),
        chosen: vec![("accuracy".into(), history[best].1)],
    })
}

/// Recursive feature elimination ranked by boosted-tree gain on the full
/// data, scored by speaker-grouped CV accuracy.
pub fn rfe_select(x: &DataMatrix, y: &[usize], groups: &[String], cfg: &WrapperConfig) -> Result<SelectionResult> {
    check_shape(x.n_rows(), y.len(), Some(groups.len()))?;
    let folds = match cfg.cv_folds {
        Some(k) => group_kfold(groups, k),
        None => group_folds(groups),
    };
    eliminate("rfe", x, y, &folds, &cfg.gbdt, false)
}

/// Iterative elimination by fold-averaged gain under leave-one-speaker-out
/// CV; returns the subset at the accuracy maximum with the accuracy curve.
pub fn iterative_gain_select(
    x: &DataMatrix,
    y: &[usize],
    groups: &[String],
    params: &GbdtParams,
) -> Result<SelectionResult> {
    check_shape(x.n_rows(), y.len(), Some(groups.len()))?;
    eliminate("iterative_gain", x, y, &group_folds(groups), params, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddedRule {
    AboveMean,
    TopK(usize),
}

/// Forest impurity importance; keeps features above the mean importance or
/// the `k` most important.
pub fn embedded_select(
    x: &DataMatrix,
    y: &[usize],
    rule: EmbeddedRule,
    forest: &ForestParams,
) -> Result<SelectionResult> {
    check_shape(x.n_rows(), y.len(), None)?;
    let f = ExtraTrees::train(x, y, n_classes(y), forest)?;
    let imp = f.feature_importance();
    let keep: Vec<bool> = match rule {
        EmbeddedRule::AboveMean => {
            let mean = imp.iter().sum::<f64>() / imp.len().max(1) as f64;
            imp.iter().map(|&v| v > mean).collect()
        }
        EmbeddedRule::TopK(k) => {
            let mut order: Vec<usize> = (0..imp.len()).collect();
            order.sort_by(|&a, &b| imp[b].total_cmp(&imp[a]).then(a.cmp(&b)));
            let mut m = vec![false; imp.len()];
            for &j in order.iter().take(k) {
                m[j] = true;
            }
            m
        }
    };
    Ok(SelectionResult {
        method: "embedded".into(),
        selected: x
            .names()
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(n, _)| n.clone())
            .collect(),
        diagnostics: x
            .names()
            .iter()
            .zip(imp)
            .map(|(n, v)| FeatureDiagnostic {
                importance: Some(*v),
                ..FeatureDiagnostic::named(n)
            })
            .collect(),
        curve: Vec::new(),
        chosen: Vec::new(),
    })
}
