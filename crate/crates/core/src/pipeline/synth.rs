use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DatasetManifest, FeatureSets, FeatureTable, Sex, Utterance, N_SEVERITIES};
use crate::alignment::{serialize_textgrid, Alignment, CornerVowel, LanguageInventory, PhoneClass};
use crate::error::{Error, Result};
use crate::gop::{write_logits_csv, write_segments, LogitMatrix, PhoneSegment};
use crate::signal::{write_wav_16bit, AudioBuffer};
use crate::trees::DataMatrix;

/// Per-severity generator settings, indexed by severity 0..=3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeverityEffects {
    /// Target local jitter (fraction of the mean period).
    pub jitter: [f64; 4],
    /// Target local shimmer (fraction of the mean amplitude) of the source.
    pub shimmer: [f64; 4],
    /// Multiplier on phone durations.
    pub slowdown: [f64; 4],
    pub pause_count: [usize; 4],
    pub pause_s: [f64; 4],
    /// Fraction of canonical phones substituted in the decoded sequence.
    pub substitution: [f64; 4],
    /// Logit advantage of the spoken phone over the other classes.
    pub margin: [f64; 4],
    /// Pull of vowel formants toward the vowel-space centroid.
    pub centralization: [f64; 4],
}

impl Default for SeverityEffects {
    fn default() -> Self {
        Self {
            jitter: [0.0, 0.01, 0.02, 0.035],
            shimmer: [0.0, 0.04, 0.08, 0.14],
            slowdown: [1.0, 1.2, 1.45, 1.8],
            pause_count: [0, 1, 2, 3],
            pause_s: [0.0, 0.3, 0.45, 0.6],
            substitution: [0.0, 0.1, 0.25, 0.4],
            margin: [6.0, 4.0, 2.5, 1.0],
            centralization: [0.0, 0.12, 0.25, 0.4],
        }
    }
}

/// Audio-level synthetic corpus description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub languages: Vec<String>,
    pub speakers_per_severity: usize,
    pub utterances_per_speaker: usize,
    /// Consonant-vowel syllables per utterance.
    pub syllables: usize,
    pub sample_rate: u32,
    pub seed: u64,
    pub max_duration_s: f64,
    pub frame_shift_s: f64,
    pub effects: SeverityEffects,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            languages: vec!["en".into(), "ko".into(), "ta".into()],
            speakers_per_severity: 2,
            utterances_per_speaker: 2,
            syllables: 8,
            sample_rate: 16000,
            seed: 0,
            max_duration_s: 10.0,
            frame_shift_s: 0.02,
            effects: SeverityEffects::default(),
        }
    }
}

const SILENCE_EDGE_S: f64 = 0.2;
const CONSONANT_S: f64 = 0.07;
const VOWEL_S: f64 = 0.16;

impl SynthSpec {
    /// Longest utterance the spec can produce, in seconds.
    pub fn max_utterance_s(&self) -> f64 {
        (0..N_SEVERITIES)
            .map(|s| {
                let e = &self.effects;
                2.0 * SILENCE_EDGE_S
                    + self.syllables as f64 * (CONSONANT_S + VOWEL_S) * e.slowdown[s]
                    + e.pause_count[s] as f64 * e.pause_s[s]
            })
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.languages.is_empty() || self.speakers_per_severity == 0 || self.utterances_per_speaker == 0 {
            return bad("need at least one language, speaker and utterance".into());
        }
        if let Some(l) = self.languages.iter().find(|l| LanguageInventory::builtin(l).is_none()) {
            return bad(format!("no built-in inventory for language {l:?}"));
        }
        if self.syllables < 4 {
            return bad("need at least 4 syllables per utterance".into());
        }
        if self.sample_rate < 8000 {
            return bad("sample rate below 8 kHz".into());
        }
        if !(self.frame_shift_s > 0.0) {
            return bad("frame shift must be positive".into());
        }
        let e = &self.effects;
        for s in 0..N_SEVERITIES {
            if !(0.0..=0.2).contains(&e.jitter[s]) || !(0.0..=0.5).contains(&e.shimmer[s]) {
                return bad(format!("severity {s}: jitter or shimmer out of range"));
            }
            if !(0.0..=1.0).contains(&e.substitution[s]) || !(0.0..=1.0).contains(&e.centralization[s]) {
                return bad(format!("severity {s}: substitution or centralization outside [0, 1]"));
            }
            if !(e.slowdown[s] > 0.0) || e.pause_s[s] < 0.0 || !e.margin[s].is_finite() {
                return bad(format!("severity {s}: invalid slowdown, pause or margin"));
            }
            if e.pause_count[s] >= self.syllables {
                return bad(format!("severity {s}: more pauses than syllable gaps"));
            }
            if e.pause_count[s] > 0 && e.pause_s[s] == 0.0 {
                return bad(format!("severity {s}: pauses of zero length"));
            }
        }
        let longest = self.max_utterance_s();
        if longest > self.max_duration_s {
            return bad(format!(
                "utterances would last up to {longest:.2} s, longer than max_duration_s = {}",
                self.max_duration_s
            ));
        }
        Ok(())
    }
}

/// Corner-vowel formants (F1, F2) of a male voice.
fn corner_formants(c: CornerVowel) -> (f64, f64) {
    match c {
        CornerVowel::I => (280.0, 2250.0),
        CornerVowel::U => (310.0, 870.0),
        CornerVowel::A => (710.0, 1100.0),
        CornerVowel::Ae => (660.0, 1720.0),
    }
}

fn vowel_formants(inv: &LanguageInventory, label: &str, female: bool, centralization: f64) -> (f64, f64) {
    let (f1, f2) = match inv.corner_of(label) {
        Some(c) => corner_formants(c),
        None => {
            // non-corner vowels spread around the centre of the space
            let k = inv.vowels().iter().position(|v| v == label).unwrap_or(0) as f64;
            (450.0 + 60.0 * (k % 3.0), 1300.0 + 150.0 * (k % 5.0))
        }
    };
    let (c1, c2) = CornerVowel::ALL
        .iter()
        .map(|&c| corner_formants(c))
        .fold((0.0, 0.0), |a, b| (a.0 + b.0 / 4.0, a.1 + b.1 / 4.0));
    let scale = if female { 1.15 } else { 1.0 };
    (
        scale * (f1 + centralization * (c1 - f1)),
        scale * (f2 + centralization * (c2 - f2)),
    )
}

/// Two-pole resonator with unit gain at DC.
fn resonate(x: &mut [f64], freq: f64, bandwidth: f64, sr: f64) {
    let r = (-PI * bandwidth / sr).exp();
    let a1 = 2.0 * r * (2.0 * PI * freq / sr).cos();
    let a2 = -r * r;
    let b0 = 1.0 - a1 - a2;
    let (mut y1, mut y2) = (0.0, 0.0);
    for v in x.iter_mut() {
        let y = b0 * *v + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        *v = y;
    }
}

const GLOTTAL_POLE: f64 = 0.95;

/// Voiced segment: a perturbed, low-passed impulse train through three formant
/// resonators. Impulses at fractional positions are split linearly between
/// neighbouring samples.
#[allow(clippy::too_many_arguments)]
fn voiced(
    rng: &mut ChaCha8Rng,
    n: usize,
    sr: f64,
    f0: f64,
    jitter: f64,
    shimmer: f64,
    formants: (f64, f64),
    female: bool,
) -> Vec<f64> {
    let mut x = vec![0.0; n];
    // E|u1 - u2| = 2a/3 for u ~ U(-a, a)
    let (ja, sa) = (1.5 * jitter, 1.5 * shimmer);
    let period = sr / f0;
    let mut t = 0.25 * period;
    while t < n as f64 - 1.0 {
        let amp = 1.0 + if sa > 0.0 { rng.gen_range(-sa..sa) } else { 0.0 };
        let k = t.floor() as usize;
        let frac = t - k as f64;
        x[k] += amp * (1.0 - frac);
        x[k + 1] += amp * frac;
        let dt = 1.0 + if ja > 0.0 { rng.gen_range(-ja..ja) } else { 0.0 };
        t += period * dt;
    }
    // glottal spectral tilt: two one-pole low-passes
    for _ in 0..2 {
        let mut y = 0.0;
        for v in x.iter_mut() {
            y = *v + GLOTTAL_POLE * y;
            *v = y;
        }
    }
    let f3 = if female { 2900.0 } else { 2500.0 };
    resonate(&mut x, formants.0, 130.0, sr);
    resonate(&mut x, formants.1, 150.0, sr);
    resonate(&mut x, f3, 200.0, sr);
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    x
}

struct Plan {
    intervals: Vec<(f64, f64, String)>,
    canonical: Vec<String>,
}

fn plan_utterance(rng: &mut ChaCha8Rng, spec: &SynthSpec, inv: &LanguageInventory, severity: usize) -> Plan {
    let e = &spec.effects;
    let corners: Vec<&String> = CornerVowel::ALL.iter().map(|&c| &inv.corner_labels(c)[0]).collect();
    let vowels: Vec<&String> = inv.vowels().iter().filter(|v| v.len() <= 2 && !["W", "Y"].contains(&v.as_str())).collect();
    let consonants = inv.consonants();
    let mut gaps: Vec<usize> = (1..spec.syllables).collect();
    gaps.shuffle(rng);
    let pauses: Vec<usize> = gaps[..e.pause_count[severity]].to_vec();
    let mut intervals = Vec::new();
    let mut canonical = Vec::new();
    let mut t = SILENCE_EDGE_S;
    intervals.push((0.0, t, String::new()));
    for s in 0..spec.syllables {
        if pauses.contains(&s) {
            let end = t + e.pause_s[severity];
            intervals.push((t, end, String::new()));
            t = end;
        }
        let c = consonants.choose(rng).expect("consonants").clone();
        // every corner vowel appears in each utterance
        let v = if s < 4 { corners[s].clone() } else { (*vowels.choose(rng).expect("vowels")).clone() };
        let jitter_dur = |rng: &mut ChaCha8Rng, base: f64| base * e.slowdown[severity] * rng.gen_range(0.85..1.15);
        let cd = jitter_dur(rng, CONSONANT_S);
        let vd = jitter_dur(rng, VOWEL_S);
        intervals.push((t, t + cd, c.clone()));
        intervals.push((t + cd, t + cd + vd, v.clone()));
        canonical.push(c);
        canonical.push(v);
        t += cd + vd;
    }
    // round boundaries to whole milliseconds so the TextGrid is compact
    let r = |x: f64| (x * 1000.0).round() / 1000.0;
    let mut out: Vec<(f64, f64, String)> = intervals.into_iter().map(|(a, b, l)| (r(a), r(b), l)).collect();
    let end = out.last().map(|x| x.1).unwrap_or(0.0);
    out.push((end, r(end + SILENCE_EDGE_S), String::new()));
    Plan {
        intervals: out,
        canonical,
    }
}

fn render(rng: &mut ChaCha8Rng, plan: &Plan, spec: &SynthSpec, inv: &LanguageInventory, severity: usize, female: bool, f0: f64) -> Result<AudioBuffer> {
    let sr = f64::from(spec.sample_rate);
    let e = &spec.effects;
    let total = plan.intervals.last().map(|x| x.1).unwrap_or(0.0);
    let mut x = vec![0.0; (total * sr).round() as usize];
    for (t0, t1, label) in &plan.intervals {
        let a = (t0 * sr).round() as usize;
        let b = ((t1 * sr).round() as usize).min(x.len());
        let seg = &mut x[a..b];
        match inv.classify(label) {
            PhoneClass::Vowel => {
                let fm = vowel_formants(inv, label, female, e.centralization[severity]);
                let v = voiced(rng, seg.len(), sr, f0, e.jitter[severity], e.shimmer[severity], fm, female);
                seg.copy_from_slice(&v);
            }
            PhoneClass::Consonant => seg.iter_mut().for_each(|s| *s = 0.05 * rng.gen_range(-1.0..1.0)),
            _ => seg.iter_mut().for_each(|s| *s = 1e-4 * rng.gen_range(-1.0..1.0)),
        }
    }
    AudioBuffer::new(x, spec.sample_rate)
}

/// Substitutes exactly `round(rate · n)` phones, each by a different phone
/// of the same class.
fn decode(rng: &mut ChaCha8Rng, canonical: &[String], inv: &LanguageInventory, rate: f64) -> Vec<String> {
    let mut out = canonical.to_vec();
    let k = (rate * canonical.len() as f64).round() as usize;
    let mut idx: Vec<usize> = (0..canonical.len()).collect();
    idx.shuffle(rng);
    for &i in &idx[..k] {
        let pool = match inv.classify(&canonical[i]) {
            PhoneClass::Vowel => inv.vowels(),
            _ => inv.consonants(),
        };
        let choices: Vec<&String> = pool
            .iter()
            .filter(|p| **p != canonical[i] && Some(*p) != canonical.get(i + 1) && (i == 0 || **p != canonical[i - 1]))
            .collect();
        out[i] = (*choices.choose(rng).expect("inventory has alternatives")).clone();
    }
    out
}

fn logits(rng: &mut ChaCha8Rng, plan: &Plan, inv: &LanguageInventory, margin: f64, shift: f64) -> Result<(LogitMatrix, Vec<PhoneSegment>)> {
    let mut labels: Vec<String> = inv.vowels().iter().chain(inv.consonants()).cloned().collect();
    labels.push("sil".into());
    let total = plan.intervals.last().map(|x| x.1).unwrap_or(0.0);
    let frames = (total / shift).floor() as usize;
    let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(k, l)| (l.as_str(), k)).collect();
    let sil = labels.len() - 1;
    let mut rows = Vec::with_capacity(frames);
    for f in 0..frames {
        let t = (f as f64 + 0.5) * shift;
        let label = plan
            .intervals
            .iter()
            .find(|(a, b, _)| t >= *a && t < *b)
            .map(|x| x.2.as_str())
            .unwrap_or("");
        let target = index.get(label).copied().unwrap_or(sil);
        let mut row: Vec<f64> = (0..labels.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        row[target] += margin;
        rows.push(row);
    }
    let segments = plan
        .intervals
        .iter()
        .filter(|(_, _, l)| !l.is_empty())
        .map(|(a, b, l)| {
            let start = (a / shift).round() as usize;
            let end = ((b / shift).round() as usize).max(start + 1).min(frames);
            PhoneSegment {
                label: l.clone(),
                start,
                end,
            }
        })
        .filter(|s| s.start < s.end)
        .collect();
    Ok((LogitMatrix::new(rows, labels, shift)?, segments))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes a complete synthetic corpus (audio, TextGrids, decoded phones,
/// logits, segments, `manifest.csv`) under `out`. Output bytes depend only on
/// the spec.
pub fn synth_corpus(spec: &SynthSpec, out: &Path) -> Result<DatasetManifest> {
    spec.validate()?;
    for d in ["wav", "textgrid", "phones", "logits", "segments"] {
        let p = out.join(d);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let mut utterances = Vec::new();
    let mut counter = 0u64;
    for lang in &spec.languages {
        let inv = LanguageInventory::builtin(lang).expect("validated");
        for severity in 0..N_SEVERITIES {
            for k in 0..spec.speakers_per_severity {
                let speaker = format!("{lang}_s{severity}{k:02}");
                let female = k % 2 == 1;
                let mut spk_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_0000 ^ (counter << 20));
                let base = if female { 210.0 } else { 120.0 };
                let f0 = base * spk_rng.gen_range(0.9..1.1);
                for u in 0..spec.utterances_per_speaker {
                    counter += 1;
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(1_000_003).wrapping_add(counter));
                    let id = format!("{speaker}_u{u:02}");
                    let plan = plan_utterance(&mut rng, spec, &inv, severity);
                    let audio = render(&mut rng, &plan, spec, &inv, severity, female, f0)?;
                    let decoded = decode(&mut rng, &plan.canonical, &inv, spec.effects.substitution[severity]);
                    let (lm, segs) = logits(&mut rng, &plan, &inv, spec.effects.margin[severity], spec.frame_shift_s)?;

                    let wav = out.join("wav").join(format!("{id}.wav"));
                    write_wav_16bit(&wav, &audio)?;
                    let tg = out.join("textgrid").join(format!("{id}.TextGrid"));
                    write(&tg, serialize_textgrid(&Alignment::from_intervals("phones", &plan.intervals)?))?;
                    let ph = out.join("phones").join(format!("{id}.txt"));
                    write(&ph, format!("{}\n", decoded.join(" ")))?;
                    let lg = out.join("logits").join(format!("{id}.csv"));
                    write_logits_csv(&lg, &lm)?;
                    let sg = out.join("segments").join(format!("{id}.csv"));
                    write_segments(&sg, &segs)?;
                    utterances.push(Utterance {
                        utt_id: id,
                        speaker: speaker.clone(),
                        language: lang.clone(),
                        severity: severity as u8,
                        sex: if female { Sex::F } else { Sex::M },
                        wav: Some(wav),
                        textgrid: Some(tg),
                        phones: Some(ph),
                        logits: Some(lg),
                        segments: Some(sg),
                    });
                }
            }
        }
    }
    let manifest = DatasetManifest::new(utterances)?;
    write(&out.join("manifest.csv"), manifest.to_csv(Some(out))?)?;
    Ok(manifest)
}

/// A feature whose value rises by `effect` noise standard deviations per
/// severity step in `languages` (all languages when empty). Elsewhere it is
/// noise with roughly the same marginal spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedFeature {
    pub name: String,
    pub effect: f64,
    #[serde(default)]
    pub languages: Vec<String>,
}

impl PlantedFeature {
    pub fn new(name: &str, effect: f64, languages: &[&str]) -> Self {
        Self {
            name: name.into(),
            effect,
            languages: languages.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn active(&self, lang: &str) -> bool {
        self.languages.is_empty() || self.languages.iter().any(|l| l == lang)
    }
}

/// Feature-table synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub languages: Vec<String>,
    pub speakers_per_severity: usize,
    pub utterances_per_speaker: usize,
    pub features: Vec<PlantedFeature>,
    /// Standard deviation of a per-speaker offset added to every feature.
    pub speaker_sd: f64,
    pub seed: u64,
}

/// Draws a feature table. Severity is balanced within each language.
pub fn synth_table(spec: &TableSpec) -> Result<FeatureTable> {
    if spec.languages.is_empty() || spec.speakers_per_severity == 0 || spec.utterances_per_speaker == 0 {
        return Err(Error::Config("table spec needs languages, speakers and utterances".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut ids, mut spk, mut langs, mut sev) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); spec.features.len()];
    let sev_mean = (N_SEVERITIES - 1) as f64 / 2.0;
    let sev_var = ((N_SEVERITIES * N_SEVERITIES) as f64 - 1.0) / 12.0;
    for lang in &spec.languages {
        for s in 0..N_SEVERITIES {
            for k in 0..spec.speakers_per_severity {
                let speaker = format!("{lang}_s{s}{k:02}");
                let offsets: Vec<f64> = spec
                    .features
                    .iter()
                    .map(|_| spec.speaker_sd * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                for u in 0..spec.utterances_per_speaker {
                    ids.push(format!("{speaker}_u{u:02}"));
                    spk.push(speaker.clone());
                    langs.push(lang.clone());
                    sev.push(s as u8);
                    for (j, f) in spec.features.iter().enumerate() {
                        let z: f64 = rng.sample(StandardNormal);
                        let v = if f.active(lang) {
                            f.effect * s as f64 + z
                        } else {
                            f.effect * sev_mean + z * (1.0 + f.effect * f.effect * sev_var).sqrt()
                        };
                        cols[j].push(v + offsets[j]);
                    }
                }
            }
        }
    }
    let names = spec.features.iter().map(|f| f.name.clone()).collect();
    FeatureTable::new(ids, spk, langs, sev, DataMatrix::from_columns(names, cols)?)
}

/// Per-language sets: universal features plus those planted for the language.
pub fn planted_sets(spec: &TableSpec) -> FeatureSets {
    spec.languages
        .iter()
        .map(|l| {
            let f = spec
                .features
                .iter()
                .filter(|f| f.effect != 0.0 && f.active(l))
                .map(|f| f.name.clone())
                .collect();
            (l.clone(), f)
        })
        .collect()
}
