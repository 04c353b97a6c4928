use crate::alignment::{syllable_count, Alignment, LanguageInventory, PhoneClass};
use crate::signal::{EnergyContour, PitchContour};
use crate::stats::{summarize, Summary};

/// Default minimum silence duration (s) counted as a pause.
pub const DEFAULT_PAUSE_THRESHOLD_S: f64 = 0.2;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Fluency {
    pub speaking_rate: Option<f64>,
    pub articulation_rate: Option<f64>,
    pub pause_count: Option<f64>,
    pub pause_mean_dur: Option<f64>,
}

/// Pauses are merged silence stretches of at least `pause_threshold_s` lying
/// between the first and last non-silence phone. Leading and trailing silence
/// is not part of the speech span.
pub fn fluency(a: &Alignment, inv: &LanguageInventory, pause_threshold_s: f64) -> Fluency {
    let Ok(tier) = a.phone_tier(inv) else {
        return Fluency::default();
    };
    let Ok(syllables) = syllable_count(a, inv) else {
        return Fluency::default();
    };
    let ivs = &tier.intervals;
    let speech: Vec<usize> = (0..ivs.len()).filter(|&k| !inv.is_silence(&ivs[k].label)).collect();
    let (Some(&first), Some(&last)) = (speech.first(), speech.last()) else {
        return Fluency {
            pause_count: Some(0.0),
            ..Default::default()
        };
    };
    let span = ivs[last].t1 - ivs[first].t0;
    let mut pauses = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for iv in &ivs[first..=last] {
        if inv.is_silence(&iv.label) {
            run = Some(match run {
                Some((s, _)) => (s, iv.t1),
                None => (iv.t0, iv.t1),
            });
        } else if let Some((s, e)) = run.take() {
            if e - s >= pause_threshold_s {
                pauses.push(e - s);
            }
        }
    }
    let pause_time: f64 = pauses.iter().sum();
    let rate = |d: f64| (d > 0.0).then(|| syllables as f64 / d);
    Fluency {
        speaking_rate: rate(span),
        articulation_rate: rate(span - pause_time),
        pause_count: Some(pauses.len() as f64),
        pause_mean_dur: (!pauses.is_empty()).then(|| pause_time / pauses.len() as f64),
    }
}

/// Statistics over voiced (nonzero) frames.
pub fn pitch_stats(c: &PitchContour) -> Option<Summary> {
    summarize(&c.voiced_f0().collect::<Vec<_>>())
}

/// Statistics over frames with nonzero energy.
pub fn energy_stats(e: &EnergyContour) -> Option<Summary> {
    let v: Vec<f64> = e.energy.iter().copied().filter(|&x| x > 0.0).collect();
    summarize(&v)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Rhythm {
    pub percent_v: Option<f64>,
    pub varco_v: Option<f64>,
    pub varco_c: Option<f64>,
    pub npvi_v: Option<f64>,
    pub npvi_c: Option<f64>,
}

/// Durations of merged vocalic and consonantal runs. Silence and unknown
/// phones end a run.
pub fn interval_durations(a: &Alignment, inv: &LanguageInventory) -> Option<(Vec<f64>, Vec<f64>)> {
    let tier = a.phone_tier(inv).ok()?;
    let (mut v, mut c) = (Vec::new(), Vec::new());
    let mut cur: Option<(PhoneClass, f64)> = None;
    let flush = |cur: &mut Option<(PhoneClass, f64)>, v: &mut Vec<f64>, c: &mut Vec<f64>| {
        match cur.take() {
            Some((PhoneClass::Vowel, d)) => v.push(d),
            Some((PhoneClass::Consonant, d)) => c.push(d),
            _ => {}
        }
    };
    for iv in &tier.intervals {
        let class = inv.classify(&iv.label);
        match (class, &mut cur) {
            (PhoneClass::Vowel | PhoneClass::Consonant, Some((k, d))) if *k == class => {
                *d += iv.duration()
            }
            (PhoneClass::Vowel | PhoneClass::Consonant, _) => {
                flush(&mut cur, &mut v, &mut c);
                cur = Some((class, iv.duration()));
            }
            _ => flush(&mut cur, &mut v, &mut c),
        }
    }
    flush(&mut cur, &mut v, &mut c);
    Some((v, c))
}

/// Population std over mean, times 100. Needs at least two intervals.
pub fn varco(d: &[f64]) -> Option<f64> {
    let s = summarize(d).filter(|_| d.len() >= 2)?;
    (s.mean > 0.0).then(|| s.std / s.mean * 100.0)
}

/// Normalized pairwise variability index.
pub fn npvi(d: &[f64]) -> Option<f64> {
    if d.len() < 2 {
        return None;
    }
    let sum: f64 = d
        .windows(2)
        .map(|w| {
            let m = 0.5 * (w[0] + w[1]);
            if m > 0.0 {
                (w[0] - w[1]).abs() / m
            } else {
                0.0
            }
        })
        .sum();
    Some(100.0 * sum / (d.len() - 1) as f64)
}

/// Raw pairwise variability index (mean absolute successive difference).
pub fn rpvi(d: &[f64]) -> Option<f64> {
    (d.len() >= 2).then(|| d.windows(2).map(|w| (w[0] - w[1]).abs()).sum::<f64>() / (d.len() - 1) as f64)
}

pub fn rhythm(a: &Alignment, inv: &LanguageInventory) -> Rhythm {
    let Some((v, c)) = interval_durations(a, inv) else {
        return Rhythm::default();
    };
    let tv: f64 = v.iter().sum();
    let tc: f64 = c.iter().sum();
    Rhythm {
        percent_v: (tv + tc > 0.0).then(|| tv / (tv + tc)),
        varco_v: varco(&v),
        varco_c: varco(&c),
        npvi_v: npvi(&v),
        npvi_c: npvi(&c),
    }
}
