use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{csv_text, fmt_opt, write_atomic, write_report, Outcome, RunConfig, SelectMethod};
use crate::biomarkers::{self, Direction};
use crate::error::{Error, Result};
use crate::pipeline::{
    assemble, fit_final, loso_cv, validate_features, AssemblyMode, DatasetManifest, FeatureSets,
    FeatureTable, Metrics, SpeakerResult, ValidationRow,
};
use crate::selection::{
    cluster_select, elastic_net_select, embedded_select, filter_select, iterative_gain_select,
    lasso_select, parse_feature_set, rfe_select, FeatureDiagnostic, SelectionResult,
};

/// Checks table keys against a manifest: every row must name a manifest
/// utterance with the same speaker, language and severity.
fn check_against_manifest(table: &FeatureTable, manifest: &Path) -> Result<()> {
    let m = DatasetManifest::read(manifest)?;
    let by_id: BTreeMap<&str, _> = m.utterances.iter().map(|u| (u.utt_id.as_str(), u)).collect();
    for i in 0..table.n_rows() {
        let id = &table.utt_ids[i];
        let u = by_id
            .get(id.as_str())
            .ok_or_else(|| Error::InvalidData(format!("utterance {id:?} is not in the manifest")))?;
        if u.speaker != table.speakers[i] || u.language != table.languages[i] || u.severity != table.severities[i] {
            return Err(Error::InvalidData(format!(
                "utterance {id:?}: keys disagree with the manifest"
            )));
        }
    }
    Ok(())
}

fn languages_of(table: &FeatureTable) -> Vec<String> {
    let mut l = table.languages.clone();
    l.sort();
    l.dedup();
    l
}

fn rows_of_language(table: &FeatureTable, language: &str) -> Result<FeatureTable> {
    let rows: Vec<usize> = (0..table.n_rows()).filter(|&i| table.languages[i] == language).collect();
    if rows.is_empty() {
        return Err(Error::InvalidData(format!("no rows for language {language:?}")));
    }
    Ok(table.select_rows(&rows))
}

#[derive(Debug, Clone)]
pub struct ValidateArgs {
    pub features: PathBuf,
    pub manifest: Option<PathBuf>,
    pub language: Option<String>,
}

#[derive(Serialize)]
struct ValidationSummary {
    languages: BTreeMap<String, Vec<ValidationRow>>,
}

/// Kruskal-Wallis, Kendall tau and the expected-direction check for every
/// feature, per language (`validation.csv`). Directions come from the
/// feature registry, overridden by `[validate.directions]`; a feature with
/// no direction is a configuration error.
pub fn cmd_validate(args: &ValidateArgs, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let table = FeatureTable::read(&args.features)?;
    if let Some(m) = &args.manifest {
        check_against_manifest(&table, m)?;
    }
    let mut directions = BTreeMap::new();
    for name in table.features.names() {
        let d = cfg
            .validate
            .directions
            .get(name)
            .copied()
            .or_else(|| biomarkers::direction(name))
            .ok_or_else(|| Error::Config(format!("no expected direction for feature {name:?}")))?;
        directions.insert(name.clone(), d);
    }
    let languages = match &args.language {
        Some(l) => vec![l.clone()],
        None => languages_of(&table),
    };
    let mut results = BTreeMap::new();
    let mut rows = Vec::new();
    for lang in languages {
        let t = rows_of_language(&table, &lang)?;
        let labels = t.labels();
        let v = validate_features(&t.features, &labels, &directions)?;
        for r in &v {
            rows.push(vec![
                lang.clone(),
                r.feature.clone(),
                r.n.to_string(),
                fmt_opt(r.h),
                fmt_opt(r.h_p),
                fmt_opt(r.tau),
                fmt_opt(r.tau_p),
                direction_name(r.direction).into(),
                r.status.to_string(),
                r.note.clone().unwrap_or_default(),
            ]);
        }
        results.insert(lang, v);
    }
    let csv_path = out.join("validation.csv");
    let report_path = out.join("validate_report.json");
    let header = ["language", "feature", "n", "h", "h_p", "tau", "tau_p", "direction", "status", "note"];
    write_atomic(&csv_path, csv_text(&header, rows)?.as_bytes())?;
    write_report(&report_path, "validate", cfg, &ValidationSummary { languages: results })?;
    Ok(Outcome {
        outputs: vec![csv_path, report_path],
        failures: 0,
    })
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Up => "UP",
        Direction::Down => "DOWN",
        Direction::Either => "EITHER",
    }
}

#[derive(Debug, Clone)]
pub struct SelectArgs {
    pub features: PathBuf,
}

/// Ranking key of a selected feature: model importance when the selector
/// reports one, else significance, else coefficient magnitude.
fn importance_key(d: &FeatureDiagnostic) -> f64 {
    if let Some(v) = d.importance {
        v
    } else if let Some(p) = d.p_value {
        -p
    } else {
        d.coefficient.map_or(0.0, f64::abs)
    }
}

/// Selected names ordered by decreasing importance; ties keep column order.
pub fn ranked_selection(r: &SelectionResult) -> Vec<String> {
    let mut sel: Vec<(&String, f64)> = r
        .selected
        .iter()
        .map(|n| {
            let d = r.diagnostics.iter().find(|d| &d.name == n);
            (n, d.map_or(0.0, importance_key))
        })
        .collect();
    sel.sort_by(|a, b| b.1.total_cmp(&a.1));
    sel.into_iter().map(|(n, _)| n.clone()).collect()
}

/// Runs one selector on the (optionally language-restricted) table and
/// writes the selected features, one per line by decreasing importance,
/// plus a JSON report with per-feature diagnostics.
pub fn cmd_select(args: &SelectArgs, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let method = cfg
        .select
        .method
        .ok_or_else(|| Error::Config("no selection method given".into()))?;
    let mut table = FeatureTable::read(&args.features)?;
    if let Some(l) = &cfg.select.language {
        table = rows_of_language(&table, l)?;
    }
    let x = &table.features;
    let y = table.labels();
    let yf = table.labels_f64();
    let g = &table.speakers;
    let s = &cfg.select;
    let result = match method {
        SelectMethod::Lasso => lasso_select(x, &yf, g, &s.penalized)?,
        SelectMethod::ElasticNet => elastic_net_select(x, &yf, g, &s.penalized)?,
        SelectMethod::Cluster => cluster_select(x, &y, &s.cluster)?,
        SelectMethod::Filter => filter_select(x, &yf, s.wrapper.alpha)?,
        SelectMethod::Rfe => rfe_select(x, &y, g, &s.wrapper)?,
        SelectMethod::Embedded => embedded_select(x, &y, s.embedded_rule, &s.wrapper.forest)?,
        SelectMethod::Iterative => iterative_gain_select(x, &y, g, &s.wrapper.gbdt)?,
    };
    let stem = match &s.language {
        Some(l) => format!("{}_{l}", method.name()),
        None => method.name().to_string(),
    };
    let ranked = ranked_selection(&result);
    let set_path = out.join(format!("featureset_{stem}.txt"));
    let report_path = out.join(format!("select_{stem}.json"));
    let text: String = ranked.iter().map(|n| format!("{n}\n")).collect();
    write_atomic(&set_path, text.as_bytes())?;
    write_report(&report_path, "select", cfg, &result)?;
    Ok(Outcome {
        outputs: vec![set_path, report_path],
        failures: 0,
    })
}

#[derive(Debug, Clone)]
pub struct TrainEvalArgs {
    pub features: PathBuf,
    pub manifest: Option<PathBuf>,
}

#[derive(Serialize)]
struct TrainEvalSummary<'a> {
    mode: AssemblyMode,
    language: Option<&'a str>,
    features: &'a [String],
    metrics: &'a Metrics,
    final_grid_index: usize,
    speakers: &'a [SpeakerResult],
}

fn load_sets(cfg: &RunConfig) -> Result<FeatureSets> {
    if cfg.train_eval.feature_sets.is_empty() {
        return Err(Error::Config(
            "no feature sets: give --feature-sets DIR or [train_eval.feature_sets]".into(),
        ));
    }
    cfg.train_eval
        .feature_sets
        .iter()
        .map(|(l, p)| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok((l.clone(), parse_feature_set(&text)))
        })
        .collect()
}

/// Assembles the table for the configured mode, runs leave-one-speaker-out
/// evaluation (`cv_report.json`, `cv_predictions.csv`) and fits the final
/// model on all rows (`model_<mode>.gbdt`, plus `healthy_stats.csv` when
/// the healthy-distance transform is on).
pub fn cmd_train_eval(args: &TrainEvalArgs, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let table = FeatureTable::read(&args.features)?;
    if let Some(m) = &args.manifest {
        check_against_manifest(&table, m)?;
    }
    let te = &cfg.train_eval;
    let sets = load_sets(cfg)?;
    let assembled = assemble(&sets, &table, te.mode, te.language.as_deref())?;
    let t = &assembled.table;
    log::info!("{}: {} rows x {} features", te.mode, t.n_rows(), t.features.n_cols());
    let report = loso_cv(t, &te.cv)?;
    let (model, grid_index, healthy) = fit_final(t, &te.cv)?;

    let tag = te.mode.name().to_lowercase();
    let report_path = out.join("cv_report.json");
    let pred_path = out.join("cv_predictions.csv");
    let model_path = out.join(format!("model_{tag}.gbdt"));
    let pred_rows = report.speakers.iter().flat_map(|s| {
        (0..s.utt_ids.len()).map(move |k| {
            vec![
                s.utt_ids[k].clone(),
                s.speaker.clone(),
                s.language.clone(),
                s.truth[k].to_string(),
                s.pred[k].to_string(),
            ]
        })
    });
    write_atomic(
        &pred_path,
        csv_text(&["utt_id", "speaker", "language", "truth", "pred"], pred_rows)?.as_bytes(),
    )?;
    write_atomic(&model_path, model.to_text().as_bytes())?;
    write_report(&report_path, "train-eval", cfg, &TrainEvalSummary {
        mode: te.mode,
        language: te.language.as_deref(),
        features: t.features.names(),
        metrics: &report.metrics,
        final_grid_index: grid_index,
        speakers: &report.speakers,
    })?;
    let mut outputs = vec![report_path, pred_path, model_path];
    if let Some(h) = healthy {
        let path = out.join("healthy_stats.csv");
        let rows = h
            .stats
            .iter()
            .map(|((l, f), (m, s))| vec![l.clone(), f.clone(), m.to_string(), s.to_string()]);
        write_atomic(&path, csv_text(&["language", "feature", "mean", "std"], rows)?.as_bytes())?;
        outputs.push(path);
    }
    let m = &report.metrics;
    println!("{} mean weighted F1 {:.2}%", te.mode, m.mean_weighted_f1);
    for (l, f) in &m.per_language_f1 {
        println!("  {l}: {f:.2}%");
    }
    Ok(Outcome { outputs, failures: 0 })
}
