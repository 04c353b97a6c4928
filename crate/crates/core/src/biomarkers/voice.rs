use crate::signal::{
    cpp, hnr_frames, pitch_contour, pulse_train, voiced_segments, AudioBuffer, PitchContour,
    PitchSettings, PulseTrain,
};

/// Absolute value (input units) and relative value (% of the mean).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub absolute: f64,
    pub relative: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Mean absolute difference of consecutive values, pooled over runs with at
/// least two values. Used for both jitter (periods) and shimmer (amplitudes).
pub fn local_perturbation(runs: &[Vec<f64>]) -> Option<Perturbation> {
    let mut diffs = Vec::new();
    let mut all = Vec::new();
    for r in runs.iter().filter(|r| r.len() >= 2) {
        diffs.extend(r.windows(2).map(|w| (w[1] - w[0]).abs()));
        all.extend_from_slice(r);
    }
    if diffs.is_empty() {
        return None;
    }
    let absolute = mean(&diffs);
    let m = mean(&all);
    (m > 0.0).then(|| Perturbation {
        absolute,
        relative: absolute / m * 100.0,
    })
}

/// Five-point perturbation quotient: mean |x_i − mean(x_{i−2..=i+2})| over
/// interior points of runs with at least five values.
pub fn five_point_quotient(runs: &[Vec<f64>]) -> Option<Perturbation> {
    let mut devs = Vec::new();
    let mut all = Vec::new();
    for r in runs.iter().filter(|r| r.len() >= 5) {
        devs.extend(r.windows(5).map(|w| (w[2] - mean(w)).abs()));
        all.extend_from_slice(r);
    }
    if devs.is_empty() {
        return None;
    }
    let absolute = mean(&devs);
    let m = mean(&all);
    (m > 0.0).then(|| Perturbation {
        absolute,
        relative: absolute / m * 100.0,
    })
}

pub fn jitter(p: &PulseTrain) -> Option<Perturbation> {
    local_perturbation(&p.period_runs())
}

pub fn ppq5(p: &PulseTrain) -> Option<Perturbation> {
    five_point_quotient(&p.period_runs())
}

pub fn shimmer(p: &PulseTrain) -> Option<Perturbation> {
    local_perturbation(&p.amplitude_runs())
}

pub fn apq5(p: &PulseTrain) -> Option<Perturbation> {
    five_point_quotient(&p.amplitude_runs())
}

/// Longest inter-pulse interval that still counts as continuous voicing.
pub fn voice_break_threshold(floor_hz: f64) -> f64 {
    1.25 / floor_hz
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiceBreaks {
    pub count: usize,
    /// Summed break duration as a percentage of `total_duration`.
    pub percent: f64,
}

/// Gaps between consecutive pulses longer than `threshold_s`, between the
/// first and last pulse of the utterance.
pub fn voice_breaks(p: &PulseTrain, threshold_s: f64, total_duration: f64) -> Option<VoiceBreaks> {
    if p.len() < 2 || !(total_duration > 0.0) {
        return None;
    }
    let gaps: Vec<f64> = p
        .times
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > threshold_s)
        .collect();
    Some(VoiceBreaks {
        count: gaps.len(),
        percent: gaps.iter().sum::<f64>() / total_duration * 100.0,
    })
}

/// The eight voice-quality features. Perturbation values are relative (%).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VoiceQuality {
    pub jitter: Option<f64>,
    pub ppq: Option<f64>,
    pub shimmer: Option<f64>,
    pub apq: Option<f64>,
    pub hnr: Option<f64>,
    pub cpp: Option<f64>,
    pub vb_count: Option<f64>,
    pub vb_percent: Option<f64>,
}

/// Voice-quality features from an already computed contour and pulse train.
pub fn voice_quality_from(
    buf: &AudioBuffer,
    contour: &PitchContour,
    pulses: &PulseTrain,
    settings: &PitchSettings,
) -> VoiceQuality {
    let segments = voiced_segments(contour, buf.duration());
    let hnr_values: Vec<f64> = segments
        .iter()
        .filter_map(|&(t0, t1)| hnr_frames(buf, t0, t1, settings).ok())
        .flatten()
        .collect();
    let breaks = voice_breaks(pulses, voice_break_threshold(settings.floor_hz), buf.duration());
    VoiceQuality {
        jitter: jitter(pulses).map(|p| p.relative),
        ppq: ppq5(pulses).map(|p| p.relative),
        shimmer: shimmer(pulses).map(|p| p.relative),
        apq: apq5(pulses).map(|p| p.relative),
        hnr: (!hnr_values.is_empty()).then(|| mean(&hnr_values)),
        cpp: cpp(buf, &segments).ok(),
        vb_count: breaks.map(|b| b.count as f64),
        vb_percent: breaks.map(|b| b.percent),
    }
}

/// Runs pitch and pulse analysis, then computes the voice-quality features.
/// Fully unvoiced audio yields all features missing.
pub fn voice_quality(buf: &AudioBuffer, settings: &PitchSettings) -> VoiceQuality {
    let Ok(contour) = pitch_contour(buf, settings) else {
        return VoiceQuality::default();
    };
    let Ok(pulses) = pulse_train(buf, &contour) else {
        return VoiceQuality::default();
    };
    voice_quality_from(buf, &contour, &pulses, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn train(periods_ms: &[f64]) -> PulseTrain {
        let p: Vec<f64> = periods_ms.iter().map(|x| x / 1000.0).collect();
        PulseTrain::from_periods(&p, &vec![1.0; p.len() + 1]).unwrap()
    }

    #[test]
    fn constant_periods_zero_jitter() {
        assert!(jitter(&train(&[10.0, 10.0, 10.0])).unwrap().relative < 1e-9);
    }

    #[test]
    fn jitter_hand_value() {
        let j = jitter(&train(&[10.0, 11.0, 10.0])).unwrap();
        assert!((j.absolute - 0.001).abs() < 1e-12);
        assert!((j.relative - 100.0 / (31.0 / 3.0)).abs() < 1e-9);
        assert!((j.relative - 9.68).abs() < 0.005);
    }

    #[test]
    fn unit_amplitudes_zero_shimmer() {
        assert_eq!(shimmer(&train(&[10.0, 11.0, 9.0])).unwrap().relative, 0.0);
    }

    #[test]
    fn five_equal_periods_zero_ppq() {
        assert!(ppq5(&train(&[8.0; 5])).unwrap().absolute < 1e-12);
    }

    #[test]
    fn too_few_values_missing() {
        assert!(jitter(&train(&[10.0])).is_none());
        assert!(ppq5(&train(&[10.0; 4])).is_none());
    }

    #[test]
    fn ppq_direct_loop() {
        let t: [f64; 7] = [10.0, 12.0, 9.0, 11.0, 10.0, 13.0, 10.0];
        let mut acc = 0.0;
        for i in 2..t.len() - 2 {
            let m = (t[i - 2] + t[i - 1] + t[i] + t[i + 1] + t[i + 2]) / 5.0;
            acc += (t[i] - m).abs();
        }
        let expected = acc / 3.0;
        let got = five_point_quotient(&[t.to_vec()]).unwrap();
        assert!((got.absolute - expected).abs() < 1e-12);
    }

    #[test]
    fn breaks_counted() {
        let p = train(&[10.0, 10.0, 30.0, 10.0, 25.0]);
        let b = voice_breaks(&p, voice_break_threshold(70.0), 0.1).unwrap();
        assert_eq!(b.count, 2);
        assert!((b.percent - 55.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn period_scaling(periods in prop::collection::vec(2.0f64..20.0, 3..30), k in 0.1f64..10.0) {
            let a = jitter(&train(&periods)).unwrap();
            let scaled: Vec<f64> = periods.iter().map(|p| p * k).collect();
            let b = jitter(&train(&scaled)).unwrap();
            prop_assert!((b.absolute - k * a.absolute).abs() <= 1e-9 * (1.0 + b.absolute));
            prop_assert!((b.relative - a.relative).abs() <= 1e-9);
        }

        #[test]
        fn amplitude_scaling(amps in prop::collection::vec(0.05f64..1.0, 3..30), k in 0.1f64..1.0) {
            let a = local_perturbation(&[amps.clone()]).unwrap();
            let s: Vec<f64> = amps.iter().map(|x| x * k).collect();
            let b = local_perturbation(&[s]).unwrap();
            prop_assert!((b.relative - a.relative).abs() <= 1e-9);
        }
    }

    fn perturbed_tone(level: f64, seed: u64) -> AudioBuffer {
        let sr = 16000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        while x.len() < sr as usize {
            let period = 0.008 * (1.0 + level * rng.gen_range(-1.0..1.0));
            let n = (period * sr as f64).round() as usize;
            for k in 0..n {
                let ph = k as f64 / n as f64;
                x.push(0.6 * (2.0 * std::f64::consts::PI * ph).cos());
            }
        }
        AudioBuffer::new(x, sr).unwrap()
    }

    #[test]
    fn jitter_monotone_in_injected_perturbation() {
        let s = PitchSettings::default();
        let levels = [0.0, 0.02, 0.04, 0.08, 0.12];
        let measured: Vec<f64> = levels
            .iter()
            .map(|&l| voice_quality(&perturbed_tone(l, 7), &s).jitter.unwrap())
            .collect();
        for w in measured.windows(2) {
            assert!(w[1] > w[0], "{measured:?}");
        }
    }

    #[test]
    fn unvoiced_all_missing() {
        let buf = AudioBuffer::new(vec![0.0; 16000], 16000).unwrap();
        assert_eq!(voice_quality(&buf, &PitchSettings::default()), VoiceQuality::default());
    }
}
