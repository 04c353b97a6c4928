//! The 35 clinical speech features and their expected change with severity.

mod accuracy;
mod prosody;
mod voice;
mod vowel;

pub use accuracy::{phoneme_accuracy, PhonemeAccuracy};
pub use prosody::{
    energy_stats, fluency, interval_durations, npvi, pitch_stats, rhythm, rpvi, varco, Fluency, Rhythm,
    DEFAULT_PAUSE_THRESHOLD_S,
};
pub use voice::{
    apq5, five_point_quotient, jitter, local_perturbation, ppq5, shimmer, voice_break_threshold,
    voice_breaks, voice_quality, voice_quality_from, Perturbation, VoiceBreaks, VoiceQuality,
};
pub use vowel::{
    corner_formants, vowel_space, vsa_quadrilateral, vsa_triangle, CornerFormants, VowelSpace,
};

use serde::{Deserialize, Serialize};

use crate::alignment::{align_sequences, Alignment, LanguageInventory, PhoneSequence};
use crate::error::{Error, Result};
use crate::signal::{
    energy_contour, pitch_contour, pulse_train, AnalysisWindow, AudioBuffer, FormantSettings,
    PitchSettings,
};

/// Expected change of a feature as severity increases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    Up,
    Down,
    Either,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureGroup {
    VoiceQuality,
    PhonemeAccuracy,
    VowelSpace,
    Fluency,
    Pitch,
    Energy,
    Rhythm,
}

#[derive(Debug, Clone, Copy)]
pub struct FeatureSpec {
    pub name: &'static str,
    pub group: FeatureGroup,
    pub direction: Direction,
    pub description: &'static str,
}

macro_rules! registry {
    ($( $name:literal, $group:ident, $dir:ident, $desc:literal; )*) => {
        pub const REGISTRY: &[FeatureSpec] = &[
            $( FeatureSpec {
                name: $name,
                group: FeatureGroup::$group,
                direction: Direction::$dir,
                description: $desc,
            }, )*
        ];
    };
}

registry! {
    "jitter", VoiceQuality, Up, "local period perturbation (%)";
    "ppq", VoiceQuality, Up, "five-point period perturbation quotient (%)";
    "shimmer", VoiceQuality, Up, "local amplitude perturbation (%)";
    "apq", VoiceQuality, Up, "five-point amplitude perturbation quotient (%)";
    "hnr", VoiceQuality, Down, "harmonics-to-noise ratio (dB)";
    "cpp", VoiceQuality, Down, "cepstral peak prominence (dB)";
    "vb_count", VoiceQuality, Up, "number of voice breaks";
    "vb_percent", VoiceQuality, Up, "voice-break time as % of duration";
    "crr", PhonemeAccuracy, Down, "consonant recognition rate (%)";
    "vrr", PhonemeAccuracy, Down, "vowel recognition rate (%)";
    "prr", PhonemeAccuracy, Down, "phoneme recognition rate (%)";
    "vsa_tri", VowelSpace, Down, "triangular vowel space area (Hz^2)";
    "vsa_quad", VowelSpace, Down, "quadrilateral vowel space area (Hz^2)";
    "fcr", VowelSpace, Up, "formant centralization ratio";
    "vai", VowelSpace, Down, "vowel articulation index";
    "f2_ratio", VowelSpace, Down, "F2 of /i/ over F2 of /u/";
    "speaking_rate", Fluency, Down, "syllables per second including pauses";
    "articulation_rate", Fluency, Down, "syllables per second excluding pauses";
    "pause_count", Fluency, Up, "number of pauses";
    "pause_mean_dur", Fluency, Up, "mean pause duration (s)";
    "f0_mean", Pitch, Either, "mean F0 (Hz)";
    "f0_median", Pitch, Either, "median F0 (Hz)";
    "f0_std", Pitch, Down, "F0 standard deviation (Hz)";
    "f0_min", Pitch, Either, "minimum F0 (Hz)";
    "f0_max", Pitch, Either, "maximum F0 (Hz)";
    "energy_mean", Energy, Down, "mean frame energy";
    "energy_median", Energy, Down, "median frame energy";
    "energy_std", Energy, Down, "frame energy standard deviation";
    "energy_min", Energy, Either, "minimum frame energy";
    "energy_max", Energy, Either, "maximum frame energy";
    "percent_v", Rhythm, Up, "vocalic fraction of speech time";
    "varco_v", Rhythm, Either, "normalized std of vocalic intervals";
    "varco_c", Rhythm, Either, "normalized std of consonantal intervals";
    "npvi_v", Rhythm, Either, "normalized PVI of vocalic intervals";
    "npvi_c", Rhythm, Either, "normalized PVI of consonantal intervals";
}

pub const N_FEATURES: usize = 35;

pub fn feature_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|s| s.name)
}

pub fn feature_index(name: &str) -> Option<usize> {
    REGISTRY.iter().position(|s| s.name == name)
}

pub fn feature_spec(name: &str) -> Option<&'static FeatureSpec> {
    REGISTRY.iter().find(|s| s.name == name)
}

pub fn direction(name: &str) -> Option<Direction> {
    feature_spec(name).map(|s| s.direction)
}

/// Registry-ordered feature values; `None` is a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: [Option<f64>; N_FEATURES],
}

impl Default for FeatureVector {
    fn default() -> Self {
        Self {
            values: [None; N_FEATURES],
        }
    }
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).and_then(|k| self.values[k])
    }

    /// Sets a value; non-finite values are stored as missing.
    pub fn set(&mut self, name: &str, value: Option<f64>) -> Result<()> {
        let k = feature_index(name)
            .ok_or_else(|| Error::Schema(format!("unknown feature {name:?}")))?;
        self.values[k] = value.filter(|v| v.is_finite());
        Ok(())
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, Option<f64>)> + '_ {
        REGISTRY.iter().zip(self.values).map(|(s, v)| (s.name, v))
    }

    pub fn present_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    fn put(&mut self, name: &str, value: Option<f64>) {
        self.set(name, value).expect("registry name");
    }
}

/// Analysis settings for feature extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionSettings {
    pub pitch: PitchSettings,
    pub energy_frame_s: f64,
    pub energy_shift_s: f64,
    /// Minimum internal silence (s) counted as a pause.
    pub pause_threshold_s: f64,
    pub max_formant_male_hz: f64,
    pub max_formant_female_hz: f64,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        Self {
            pitch: PitchSettings::default(),
            energy_frame_s: AnalysisWindow::DEFAULT.frame_s,
            energy_shift_s: AnalysisWindow::DEFAULT.shift_s,
            pause_threshold_s: DEFAULT_PAUSE_THRESHOLD_S,
            max_formant_male_hz: 5000.0,
            max_formant_female_hz: 5500.0,
        }
    }
}

impl ExtractionSettings {
    pub fn formant_settings(&self, female: bool) -> FormantSettings {
        FormantSettings {
            max_formant_hz: if female {
                self.max_formant_female_hz
            } else {
                self.max_formant_male_hz
            },
            ..FormantSettings::default()
        }
    }
}

/// Everything known about one utterance.
#[derive(Debug, Clone, Copy)]
pub struct UtteranceInputs<'a> {
    pub audio: &'a AudioBuffer,
    pub alignment: &'a Alignment,
    pub inventory: &'a LanguageInventory,
    pub decoded: Option<&'a PhoneSequence>,
    pub female: bool,
    /// Corner formants measured on this utterance, if already computed.
    pub corners: Option<&'a CornerFormants>,
    /// Speaker-level corner means used for corners this utterance lacks.
    pub speaker_corners: Option<&'a CornerFormants>,
}

impl<'a> UtteranceInputs<'a> {
    pub fn new(audio: &'a AudioBuffer, alignment: &'a Alignment, inventory: &'a LanguageInventory) -> Self {
        Self {
            audio,
            alignment,
            inventory,
            decoded: None,
            female: false,
            corners: None,
            speaker_corners: None,
        }
    }
}

/// Computes every feature it can; anything uncomputable is left missing.
pub fn extract_all(u: &UtteranceInputs, s: &ExtractionSettings) -> FeatureVector {
    let mut fv = FeatureVector::default();
    let buf = u.audio;
    let contour = pitch_contour(buf, &s.pitch).ok();

    if let Some(c) = &contour {
        if let Ok(p) = pulse_train(buf, c) {
            let vq = voice_quality_from(buf, c, &p, &s.pitch);
            fv.put("jitter", vq.jitter);
            fv.put("ppq", vq.ppq);
            fv.put("shimmer", vq.shimmer);
            fv.put("apq", vq.apq);
            fv.put("hnr", vq.hnr);
            fv.put("cpp", vq.cpp);
            fv.put("vb_count", vq.vb_count);
            fv.put("vb_percent", vq.vb_percent);
        }
        if let Some(st) = pitch_stats(c) {
            fv.put("f0_mean", Some(st.mean));
            fv.put("f0_median", Some(st.median));
            fv.put("f0_std", Some(st.std));
            fv.put("f0_min", Some(st.min));
            fv.put("f0_max", Some(st.max));
        }
    }

    if let Some(decoded) = u.decoded {
        if let Ok(tier) = u.alignment.phone_tier(u.inventory) {
            let canonical = PhoneSequence::from_tier(tier, u.inventory);
            let acc = phoneme_accuracy(&align_sequences(&canonical, decoded));
            fv.put("crr", acc.crr);
            fv.put("vrr", acc.vrr);
            fv.put("prr", acc.prr);
        }
    }

    let own = match u.corners {
        Some(c) => *c,
        None => corner_formants(buf, u.alignment, u.inventory, &s.formant_settings(u.female)),
    };
    let corners = match u.speaker_corners {
        Some(spk) => own.impute(spk),
        None => own,
    };
    let vs = vowel_space(&corners);
    fv.put("vsa_tri", vs.vsa_triangle);
    fv.put("vsa_quad", vs.vsa_quadrilateral);
    fv.put("fcr", vs.fcr);
    fv.put("vai", vs.vai);
    fv.put("f2_ratio", vs.f2_ratio);

    let fl = fluency(u.alignment, u.inventory, s.pause_threshold_s);
    fv.put("speaking_rate", fl.speaking_rate);
    fv.put("articulation_rate", fl.articulation_rate);
    fv.put("pause_count", fl.pause_count);
    fv.put("pause_mean_dur", fl.pause_mean_dur);

    if let Some(st) = energy_contour(buf, s.energy_frame_s, s.energy_shift_s)
        .ok()
        .as_ref()
        .and_then(energy_stats)
    {
        fv.put("energy_mean", Some(st.mean));
        fv.put("energy_median", Some(st.median));
        fv.put("energy_std", Some(st.std));
        fv.put("energy_min", Some(st.min));
        fv.put("energy_max", Some(st.max));
    }

    let r = rhythm(u.alignment, u.inventory);
    fv.put("percent_v", r.percent_v);
    fv.put("varco_v", r.varco_v);
    fv.put("varco_c", r.varco_c);
    fv.put("npvi_v", r.npvi_v);
    fv.put("npvi_c", r.npvi_c);
    fv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_shape() {
        assert_eq!(REGISTRY.len(), N_FEATURES);
        let mut names: Vec<_> = feature_names().collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), N_FEATURES);
        let count = |g| REGISTRY.iter().filter(|s| s.group == g).count();
        assert_eq!(count(FeatureGroup::VoiceQuality), 8);
        assert_eq!(count(FeatureGroup::PhonemeAccuracy), 3);
        assert_eq!(count(FeatureGroup::VowelSpace), 5);
        assert_eq!(count(FeatureGroup::Fluency), 4);
        assert_eq!(count(FeatureGroup::Pitch), 5);
        assert_eq!(count(FeatureGroup::Energy), 5);
        assert_eq!(count(FeatureGroup::Rhythm), 5);
        assert_eq!(direction("fcr"), Some(Direction::Up));
        assert_eq!(direction("vai"), Some(Direction::Down));
    }

    #[test]
    fn unknown_name_rejected() {
        let mut fv = FeatureVector::default();
        assert!(matches!(fv.set("mfcc1", Some(1.0)), Err(Error::Schema(_))));
        fv.set("hnr", Some(f64::NAN)).unwrap();
        assert_eq!(fv.get("hnr"), None);
    }

    #[test]
    fn silent_audio_keeps_alignment_features() {
        let inv = LanguageInventory::english();
        let a = Alignment::from_intervals(
            "phones",
            &[
                (0.0, 0.2, "B".into()),
                (0.2, 0.5, "AA".into()),
                (0.5, 0.6, "D".into()),
                (0.6, 1.0, "IY".into()),
            ],
        )
        .unwrap();
        let buf = AudioBuffer::new(vec![0.0; 16000], 16000).unwrap();
        let fv = extract_all(&UtteranceInputs::new(&buf, &a, &inv), &ExtractionSettings::default());
        assert_eq!(fv.get("jitter"), None);
        assert_eq!(fv.get("f0_mean"), None);
        assert_eq!(fv.get("energy_mean"), None);
        assert_eq!(fv.get("crr"), None);
        assert!((fv.get("speaking_rate").unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(fv.get("percent_v"), Some(0.7));
    }
}
