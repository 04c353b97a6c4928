use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{csv_text, fmt_opt, pool, write_atomic, write_report, Outcome, RunConfig};
use crate::error::{Error, Result};
use crate::gop::{
    phoneme_ranking, read_logits, read_segments, score_utterance, severity_correlation, GopConfig,
    GopMethod, LogitMatrix, Normalization, PhoneSegment,
};
use crate::pipeline::{DatasetManifest, Utterance};

/// Column name of one method/normalization cell.
fn column(m: GopMethod, n: Normalization) -> String {
    format!("{}_{}", m.name(), n.name())
}

fn combos() -> impl Iterator<Item = (GopMethod, Normalization)> {
    GopMethod::ALL
        .into_iter()
        .flat_map(|m| Normalization::ALL.into_iter().map(move |n| (m, n)))
}

fn load(u: &Utterance) -> Result<(LogitMatrix, Vec<PhoneSegment>)> {
    let l = u
        .logits
        .as_ref()
        .ok_or_else(|| Error::InvalidData("manifest has no logits path".into()))?;
    let s = u
        .segments
        .as_ref()
        .ok_or_else(|| Error::InvalidData("manifest has no segments path".into()))?;
    Ok((read_logits(l)?, read_segments(s)?))
}

/// Smoothed frame frequencies of segment labels, in `labels` order.
fn estimate_priors(labels: &[String], data: &[&(LogitMatrix, Vec<PhoneSegment>)], smoothing: f64) -> Vec<f64> {
    let mut counts = vec![smoothing.max(1e-9); labels.len()];
    for (l, segs) in data {
        for s in segs {
            if let Some(k) = labels.iter().position(|x| *x == s.label) {
                counts[k] += s.end.min(l.frames()).saturating_sub(s.start) as f64;
            }
        }
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

struct Scored {
    /// Utterance score per (method, normalization), in `combos()` order.
    cells: Vec<f64>,
    /// Per-phoneme scores under the ranking configuration.
    phonemes: Vec<(String, f64)>,
}

fn score(l: &LogitMatrix, segs: &[PhoneSegment], priors: &[f64], cfg: &RunConfig) -> Result<Scored> {
    let make = |m, n| {
        GopConfig::new(m, n)
            .with_priors(priors.to_vec())
            .with_temperature(cfg.gop.temperature)
    };
    let cells = combos()
        .map(|(m, n)| Ok(score_utterance(l, segs, &make(m, n))?.utterance))
        .collect::<Result<Vec<_>>>()?;
    let phonemes = score_utterance(l, segs, &make(cfg.gop.ranking_method, cfg.gop.ranking_normalization))?.phonemes;
    Ok(Scored { cells, phonemes })
}

#[derive(Serialize)]
struct TauCell {
    method: GopMethod,
    normalization: Normalization,
    per_language: BTreeMap<String, Option<f64>>,
    average: Option<f64>,
}

#[derive(Serialize)]
struct GopSummary {
    utterances: usize,
    scored: usize,
    failed: usize,
    priors: BTreeMap<String, Vec<f64>>,
    tau: Vec<TauCell>,
}

/// Scores every manifest utterance with all GoP methods under all three
/// normalizations (`gop_scores.csv`), correlates each cell with severity per
/// language (`gop_tau.csv`) and ranks phonemes by their severity correlation
/// (`gop_phonemes.csv`). Unreadable or malformed utterances are listed in
/// `gop_errors.csv`.
pub fn cmd_gop(manifest_path: &Path, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let mut utts: Vec<&Utterance> = manifest.utterances.iter().collect();
    utts.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    let workers = pool(cfg.jobs)?;
    let loaded: Vec<Result<(LogitMatrix, Vec<PhoneSegment>)>> =
        workers.install(|| utts.par_iter().map(|u| load(u)).collect());

    // priors per language: configured, else estimated from that language's segments
    let mut priors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for lang in manifest.languages() {
        let data: Vec<&(LogitMatrix, Vec<PhoneSegment>)> = utts
            .iter()
            .zip(&loaded)
            .filter(|(u, _)| u.language == lang)
            .filter_map(|(_, l)| l.as_ref().ok())
            .collect();
        let Some(first) = data.first() else { continue };
        let p = match cfg.gop.priors.get(lang) {
            Some(p) => {
                GopConfig::new(GopMethod::Dnn, Normalization::Prior)
                    .with_priors(p.clone())
                    .validate(first.0.classes())
                    .map_err(|e| Error::Config(format!("gop priors for {lang:?}: {e}")))?;
                p.clone()
            }
            None => estimate_priors(first.0.labels(), &data, cfg.gop.prior_smoothing),
        };
        priors.insert(lang.to_string(), p);
    }

    let scored: Vec<Result<Scored>> = workers.install(|| {
        utts.par_iter()
            .zip(&loaded)
            .map(|(u, l)| {
                let (l, segs) = l.as_ref().map_err(|e| Error::InvalidData(e.to_string()))?;
                let p = &priors[&u.language];
                if p.len() != l.classes() {
                    return Err(Error::InvalidData(format!(
                        "{} logit classes but {} priors for language {:?}",
                        l.classes(),
                        p.len(),
                        u.language
                    )));
                }
                score(l, segs, p, cfg)
            })
            .collect()
    });

    let mut header = vec!["utt_id".to_string(), "speaker".into(), "language".into(), "severity".into()];
    header.extend(combos().map(|(m, n)| column(m, n)));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut ok: Vec<(&Utterance, &Scored)> = Vec::new();
    for (u, s) in utts.iter().zip(&scored) {
        match s {
            Ok(s) => {
                let mut r = vec![u.utt_id.clone(), u.speaker.clone(), u.language.clone(), u.severity.to_string()];
                r.extend(s.cells.iter().map(|v| fmt_opt(Some(*v))));
                rows.push(r);
                ok.push((u, s));
            }
            Err(e) => {
                log::warn!("{}: {e}", u.utt_id);
                errors.push(vec![u.utt_id.clone(), e.to_string()]);
            }
        }
    }

    let languages: Vec<String> = manifest.languages().into_iter().map(str::to_string).collect();
    let mut tau = Vec::new();
    for (k, (m, n)) in combos().enumerate() {
        let mut per_language = BTreeMap::new();
        for lang in &languages {
            let (s, sev): (Vec<f64>, Vec<f64>) = ok
                .iter()
                .filter(|(u, _)| &u.language == lang)
                .map(|(u, s)| (s.cells[k], f64::from(u.severity)))
                .unzip();
            let t = if s.len() >= 2 {
                severity_correlation(&s, &sev)?.map(|r| r.coefficient)
            } else {
                None
            };
            per_language.insert(lang.clone(), t);
        }
        let defined: Vec<f64> = per_language.values().flatten().copied().collect();
        let average = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
        tau.push(TauCell {
            method: m,
            normalization: n,
            per_language,
            average,
        });
    }
    let mut tau_header = vec!["method", "normalization"];
    tau_header.extend(languages.iter().map(String::as_str));
    tau_header.push("average");
    let tau_rows = tau.iter().map(|c| {
        let mut r = vec![c.method.name().to_string(), c.normalization.name().to_string()];
        r.extend(c.per_language.values().map(|v| fmt_opt(*v)));
        r.push(fmt_opt(c.average));
        r
    });
    let tau_csv = csv_text(&tau_header, tau_rows)?;

    let mut rank_rows = Vec::new();
    for lang in &languages {
        let input: Vec<(Vec<(String, f64)>, f64)> = ok
            .iter()
            .filter(|(u, _)| &u.language == lang)
            .map(|(u, s)| (s.phonemes.clone(), f64::from(u.severity)))
            .collect();
        for r in phoneme_ranking(&input, cfg.gop.min_support) {
            rank_rows.push(vec![
                lang.clone(),
                r.label,
                r.tau.to_string(),
                r.p_value.to_string(),
                r.utterances.to_string(),
            ]);
        }
    }

    let paths = [
        out.join("gop_scores.csv"),
        out.join("gop_tau.csv"),
        out.join("gop_phonemes.csv"),
        out.join("gop_errors.csv"),
        out.join("gop_report.json"),
    ];
    write_atomic(&paths[0], csv_text(&header_refs, rows)?.as_bytes())?;
    write_atomic(&paths[1], tau_csv.as_bytes())?;
    write_atomic(
        &paths[2],
        csv_text(&["language", "label", "tau", "p_value", "utterances"], rank_rows)?.as_bytes(),
    )?;
    write_atomic(&paths[3], csv_text(&["utt_id", "error"], errors.clone())?.as_bytes())?;
    write_report(&paths[4], "gop", cfg, &GopSummary {
        utterances: utts.len(),
        scored: ok.len(),
        failed: errors.len(),
        priors,
        tau,
    })?;
    Ok(Outcome {
        outputs: paths.to_vec(),
        failures: errors.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_one_columns() {
        assert_eq!(combos().count(), 21);
        assert_eq!(column(GopMethod::MaxLogit, Normalization::Prior), "MAXLOGIT_PRIOR");
    }

    #[test]
    fn priors_follow_frame_counts() {
        let l = LogitMatrix::new(vec![vec![0.0, 0.0]; 4], vec!["a".into(), "b".into()], 0.02).unwrap();
        let segs = vec![
            PhoneSegment { label: "a".into(), start: 0, end: 3 },
            PhoneSegment { label: "b".into(), start: 3, end: 4 },
        ];
        let d = (l, segs);
        let p = estimate_priors(d.0.labels(), &[&d], 1.0);
        assert!((p[0] - 4.0 / 6.0).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
