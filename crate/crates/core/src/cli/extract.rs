use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{csv_text, pool, write_atomic, write_report, Outcome, RunConfig};
use crate::alignment::{parse_textgrid, Alignment, LanguageInventory, PhoneSequence};
use crate::biomarkers::{
    corner_formants, extract_all, feature_names, CornerFormants, FeatureVector, UtteranceInputs,
};
use crate::error::{Error, Result};
use crate::pipeline::{DatasetManifest, FeatureTable, Sex, Utterance};
use crate::signal::{read_wav, AudioBuffer};
use crate::trees::DataMatrix;

struct Loaded {
    audio: AudioBuffer,
    alignment: Alignment,
    decoded: Option<PhoneSequence>,
    corners: CornerFormants,
}

fn inventories(manifest: &DatasetManifest, cfg: &RunConfig) -> Result<BTreeMap<String, LanguageInventory>> {
    let mut out = BTreeMap::new();
    for lang in manifest.languages() {
        let inv = match cfg.extract.inventories.get(lang) {
            Some(p) => LanguageInventory::load(p)?,
            None => LanguageInventory::builtin(&lang).ok_or_else(|| {
                Error::Config(format!("no inventory configured for language {lang:?}"))
            })?,
        };
        out.insert(lang.to_string(), inv);
    }
    Ok(out)
}

fn load(u: &Utterance, inv: &LanguageInventory, cfg: &RunConfig) -> Result<Loaded> {
    let wav = u
        .wav
        .as_ref()
        .ok_or_else(|| Error::InvalidData("manifest has no wav path".into()))?;
    let tg = u
        .textgrid
        .as_ref()
        .ok_or_else(|| Error::InvalidData("manifest has no textgrid path".into()))?;
    let audio = read_wav(wav)?.buffer;
    let text = std::fs::read_to_string(tg).map_err(|e| Error::io(tg, e))?;
    let alignment = parse_textgrid(&text)?;
    let decoded = match &u.phones {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Some(PhoneSequence::parse(&text, inv))
        }
        None => None,
    };
    let fs = cfg.extract.settings.formant_settings(u.sex == Sex::F);
    let corners = corner_formants(&audio, &alignment, inv, &fs);
    Ok(Loaded {
        audio,
        alignment,
        decoded,
        corners,
    })
}

#[derive(Serialize)]
struct ExtractSummary {
    utterances: usize,
    extracted: usize,
    failed: usize,
    present_per_feature: BTreeMap<&'static str, usize>,
}

/// Extracts the feature registry for every manifest utterance into
/// `features.csv` (rows sorted by utterance id, "NA" for missing values).
/// Utterances whose inputs cannot be read are listed in `extract_errors.csv`
/// and counted as failures. Corner vowels an utterance lacks are imputed
/// from the speaker's other utterances.
pub fn cmd_extract(manifest_path: &Path, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let invs = inventories(&manifest, cfg)?;
    let mut utts: Vec<&Utterance> = manifest.utterances.iter().collect();
    utts.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));

    let workers = pool(cfg.jobs)?;
    let loaded: Vec<Result<Loaded>> = workers.install(|| {
        utts.par_iter()
            .map(|u| load(u, &invs[&u.language], cfg))
            .collect()
    });

    let mut by_speaker: BTreeMap<&str, Vec<&CornerFormants>> = BTreeMap::new();
    for (u, l) in utts.iter().zip(&loaded) {
        if let Ok(l) = l {
            by_speaker.entry(&u.speaker).or_default().push(&l.corners);
        }
    }
    let speaker_corners: BTreeMap<&str, CornerFormants> = by_speaker
        .into_iter()
        .map(|(s, c)| (s, CornerFormants::mean_of(c)))
        .collect();

    let vectors: Vec<Option<FeatureVector>> = workers.install(|| {
        utts.par_iter()
            .zip(&loaded)
            .map(|(u, l)| {
                let l = l.as_ref().ok()?;
                let inputs = UtteranceInputs {
                    decoded: l.decoded.as_ref(),
                    female: u.sex == Sex::F,
                    corners: Some(&l.corners),
                    speaker_corners: speaker_corners.get(u.speaker.as_str()),
                    ..UtteranceInputs::new(&l.audio, &l.alignment, &invs[&u.language])
                };
                Some(extract_all(&inputs, &cfg.extract.settings))
            })
            .collect()
    });

    let mut errors = Vec::new();
    let mut rows = Vec::new();
    let mut keys: (Vec<String>, Vec<String>, Vec<String>, Vec<u8>) = Default::default();
    for ((u, l), v) in utts.iter().zip(&loaded).zip(vectors) {
        match (l, v) {
            (Ok(_), Some(v)) => {
                keys.0.push(u.utt_id.clone());
                keys.1.push(u.speaker.clone());
                keys.2.push(u.language.clone());
                keys.3.push(u.severity);
                rows.push(v.values().iter().map(|x| x.unwrap_or(f64::NAN)).collect::<Vec<_>>());
            }
            (Err(e), _) => {
                log::warn!("{}: {e}", u.utt_id);
                errors.push(vec![u.utt_id.clone(), e.to_string()]);
            }
            (Ok(_), None) => unreachable!("loaded utterances are extracted"),
        }
    }
    let names: Vec<String> = feature_names().map(str::to_string).collect();
    let table = FeatureTable::new(keys.0, keys.1, keys.2, keys.3, DataMatrix::from_rows(names, &rows)?)?;

    let present_per_feature = feature_names()
        .enumerate()
        .map(|(j, n)| (n, rows.iter().filter(|r| !r[j].is_nan()).count()))
        .collect();
    let features_path = out.join("features.csv");
    let errors_path = out.join("extract_errors.csv");
    let report_path = out.join("extract_report.json");
    write_atomic(&features_path, table.to_csv()?.as_bytes())?;
    write_atomic(&errors_path, csv_text(&["utt_id", "error"], errors.clone())?.as_bytes())?;
    write_report(&report_path, "extract", cfg, &ExtractSummary {
        utterances: utts.len(),
        extracted: rows.len(),
        failed: errors.len(),
        present_per_feature,
    })?;
    Ok(Outcome {
        outputs: vec![features_path, errors_path, report_path],
        failures: errors.len(),
    })
}
