//! Generate a small synthetic speech corpus and extract the feature registry
//! for each utterance.
//!
//!     cargo run --release --example corpus_features [OUT_DIR]

use std::path::PathBuf;

use dyskit::alignment::{parse_textgrid, LanguageInventory, PhoneSequence};
use dyskit::biomarkers::{extract_all, ExtractionSettings, UtteranceInputs};
use dyskit::pipeline::{synth_corpus, SynthSpec};
use dyskit::signal::read_wav;

fn main() -> dyskit::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("dyskit-corpus-{}", std::process::id())));
    let spec = SynthSpec {
        languages: vec!["en".into()],
        speakers_per_severity: 1,
        utterances_per_speaker: 1,
        ..Default::default()
    };
    let manifest = synth_corpus(&spec, &out)?;
    println!("corpus in {}", out.display());

    let inv = LanguageInventory::english();
    let settings = ExtractionSettings::default();
    let shown = ["jitter", "hnr", "vrr", "speaking_rate", "pause_count", "f0_std", "vsa_tri"];
    println!("{:<14}{}", "utterance", shown.map(|s| format!("{s:>14}")).concat());
    for u in &manifest.utterances {
        let audio = read_wav(u.wav.as_ref().expect("synthetic rows have audio"))?.buffer;
        let tg_path = u.textgrid.as_ref().expect("synthetic rows have alignments");
        let tg = std::fs::read_to_string(tg_path)
            .map_err(|e| dyskit::Error::Io { path: tg_path.clone(), source: e })?;
        let alignment = parse_textgrid(&tg)?;
        let decoded = match &u.phones {
            Some(p) => Some(PhoneSequence::parse(
                &std::fs::read_to_string(p).map_err(|e| dyskit::Error::Io { path: p.clone(), source: e })?,
                &inv,
            )),
            None => None,
        };
        let inputs = UtteranceInputs { decoded: decoded.as_ref(), ..UtteranceInputs::new(&audio, &alignment, &inv) };
        let fv = extract_all(&inputs, &settings);
        let cells: String = shown
            .iter()
            .map(|n| fv.get(n).map_or(format!("{:>14}", "NA"), |v| format!("{v:>14.3}")))
            .collect();
        println!("{:<14}{cells}  ({} of 35 present)", u.utt_id, fv.present_count());
    }
    Ok(())
}
