use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{distance_transform, FeatureTable, HealthyStats, N_SEVERITIES};
use crate::error::{Error, Result};
use crate::selection::{group_folds, group_kfold};
use crate::trees::{Classifier, Gbdt, GbdtParams};

/// Support-weighted F1 in [0, 1]: per-class F1 weighted by the class's count
/// in `truth`.
pub fn weighted_f1(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let classes: BTreeSet<usize> = truth.iter().chain(pred).copied().collect();
    let mut total = 0.0;
    for c in classes {
        let support = truth.iter().filter(|&&t| t == c).count();
        if support == 0 {
            continue;
        }
        let tp = pred.iter().zip(truth).filter(|(&p, &t)| p == c && t == c).count() as f64;
        let fp = pred.iter().zip(truth).filter(|(&p, &t)| p == c && t != c).count() as f64;
        let fn_ = support as f64 - tp;
        let denom = 2.0 * tp + fp + fn_;
        let f1 = if denom == 0.0 { 0.0 } else { 2.0 * tp / denom };
        total += f1 * support as f64;
    }
    total / truth.len() as f64
}

/// Held-out predictions for one speaker.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeakerResult {
    pub speaker: String,
    pub language: String,
    pub utt_ids: Vec<String>,
    pub truth: Vec<usize>,
    pub pred: Vec<usize>,
    /// Weighted F1 in percent.
    pub weighted_f1: f64,
    /// Index into the grid of the parameters used for this fold.
    pub grid_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// Unweighted mean over speakers of per-speaker weighted F1 (percent).
    pub mean_weighted_f1: f64,
    /// The same mean restricted to each language's speakers.
    pub per_language_f1: BTreeMap<String, f64>,
    /// Utterance-level accuracy (percent).
    pub accuracy: f64,
}

pub fn metrics(speakers: &[SpeakerResult]) -> Metrics {
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let f1: Vec<f64> = speakers.iter().map(|s| s.weighted_f1).collect();
    let mut by_lang: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for s in speakers {
        by_lang.entry(s.language.clone()).or_default().push(s.weighted_f1);
    }
    let (hit, n) = speakers.iter().fold((0usize, 0usize), |(h, n), s| {
        (h + s.pred.iter().zip(&s.truth).filter(|(p, t)| p == t).count(), n + s.truth.len())
    });
    Metrics {
        mean_weighted_f1: mean(&f1),
        per_language_f1: by_lang.into_iter().map(|(l, v)| (l, mean(&v))).collect(),
        accuracy: if n == 0 { 0.0 } else { 100.0 * hit as f64 / n as f64 },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    /// Candidate boosting parameters; more than one triggers nested CV.
    pub grid: Vec<GbdtParams>,
    /// Speaker-grouped folds for the inner grid search.
    pub inner_folds: usize,
    /// Replace values by their inverse distance from the healthy mean, with
    /// healthy statistics fitted on each training split.
    pub healthy_transform: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        let p = |eta| GbdtParams {
            rounds: 300,
            eta,
            ..Default::default()
        };
        Self {
            grid: vec![p(0.3), p(0.5)],
            inner_folds: 3,
            healthy_transform: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub speakers: Vec<SpeakerResult>,
    pub metrics: Metrics,
}

fn prepare(train: &FeatureTable, test: &FeatureTable, transform: bool) -> Result<(FeatureTable, FeatureTable)> {
    if !transform {
        return Ok((train.clone(), test.clone()));
    }
    let stats = HealthyStats::fit_with_fallback(train, &test.languages);
    Ok((distance_transform(train, &stats)?, distance_transform(test, &stats)?))
}

fn fit_predict(train: &FeatureTable, test: &FeatureTable, params: &GbdtParams, transform: bool) -> Result<Vec<usize>> {
    let (tr, te) = prepare(train, test, transform)?;
    let model = Gbdt::train(&tr.features, &tr.labels(), N_SEVERITIES, params)?;
    model.predict_labels(&te.features)
}

/// Grid index with the best mean per-speaker weighted F1 under grouped
/// k-fold CV; ties go to the earlier grid entry.
fn inner_select(table: &FeatureTable, cfg: &CvConfig) -> Result<usize> {
    if cfg.grid.len() == 1 {
        return Ok(0);
    }
    let folds = group_kfold(&table.speakers, cfg.inner_folds.max(2));
    let mut best = (f64::NEG_INFINITY, 0);
    for (g, params) in cfg.grid.iter().enumerate() {
        let mut per_speaker: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for (train, test) in &folds {
            if train.is_empty() || test.is_empty() {
                continue;
            }
            let pred = fit_predict(&table.select_rows(train), &table.select_rows(test), params, cfg.healthy_transform)?;
            for (&i, p) in test.iter().zip(pred) {
                let e = per_speaker.entry(&table.speakers[i]).or_default();
                e.0.push(p);
                e.1.push(usize::from(table.severities[i]));
            }
        }
        let score = per_speaker.values().map(|(p, t)| weighted_f1(p, t)).sum::<f64>()
            / per_speaker.len().max(1) as f64;
        if score > best.0 {
            best = (score, g);
        }
    }
    Ok(best.1)
}

/// Leave-one-speaker-out evaluation with nested grid selection.
pub fn loso_cv(table: &FeatureTable, cfg: &CvConfig) -> Result<CvReport> {
    if cfg.grid.is_empty() {
        return Err(Error::Config("empty parameter grid".into()));
    }
    let folds = group_folds(&table.speakers);
    if folds.len() < 2 {
        return Err(Error::Precondition("cross-validation needs at least 2 speakers".into()));
    }
    let mut speakers = Vec::with_capacity(folds.len());
    for (train, test) in &folds {
        let held: BTreeSet<&str> = test.iter().map(|&i| table.speakers[i].as_str()).collect();
        assert!(
            held.len() == 1 && train.iter().all(|&i| !held.contains(table.speakers[i].as_str())),
            "speaker present on both sides of a fold"
        );
        let tr = table.select_rows(train);
        let te = table.select_rows(test);
        let g = inner_select(&tr, cfg)?;
        let pred = fit_predict(&tr, &te, &cfg.grid[g], cfg.healthy_transform)?;
        let truth = te.labels();
        speakers.push(SpeakerResult {
            speaker: te.speakers[0].clone(),
            language: te.languages[0].clone(),
            utt_ids: te.utt_ids.clone(),
            weighted_f1: 100.0 * weighted_f1(&pred, &truth),
            truth,
            pred,
            grid_index: g,
        });
    }
    let metrics = metrics(&speakers);
    Ok(CvReport { speakers, metrics })
}

/// Trains on every row with grid-selected parameters. Returns the model and
/// the grid index. The healthy transform, when enabled, is fitted on the
/// whole table (with the fallback used inside cross-validation) and returned so it can be applied at prediction time.
pub fn fit_final(table: &FeatureTable, cfg: &CvConfig) -> Result<(Gbdt, usize, Option<HealthyStats>)> {
    if cfg.grid.is_empty() {
        return Err(Error::Config("empty parameter grid".into()));
    }
    let g = inner_select(table, cfg)?;
    let (t, stats) = if cfg.healthy_transform {
        let st = HealthyStats::fit_with_fallback(table, &[]);
        (distance_transform(table, &st)?, Some(st))
    } else {
        (table.clone(), None)
    };
    Ok((Gbdt::train(&t.features, &t.labels(), N_SEVERITIES, &cfg.grid[g])?, g, stats))
}
