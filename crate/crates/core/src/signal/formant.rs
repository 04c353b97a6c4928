use serde::{Deserialize, Serialize};

use super::{burg, lpc_roots_to_resonances, resample, AudioBuffer, Resonance};
use crate::error::{Error, Result};

/// LPC formant analysis settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormantSettings {
    /// Analysis ceiling; the segment is resampled to twice this rate.
    pub max_formant_hz: f64,
    pub n_formants: usize,
    pub window_s: f64,
    /// Step between the analysis windows placed around the segment centre.
    pub step_s: f64,
    pub max_bandwidth_hz: f64,
    /// Maximum (max - min) / median spread of F1 and F2 across windows
    /// before the estimate is flagged as unstable.
    pub max_relative_spread: f64,
}

impl Default for FormantSettings {
    fn default() -> Self {
        Self {
            max_formant_hz: 5000.0,
            n_formants: 5,
            window_s: 0.05,
            step_s: 0.005,
            max_bandwidth_hz: 400.0,
            max_relative_spread: 0.15,
        }
    }
}

impl FormantSettings {
    /// 5000 Hz ceiling for male voices, 5500 Hz for female voices.
    pub fn for_sex(female: bool) -> Self {
        Self {
            max_formant_hz: if female { 5500.0 } else { 5000.0 },
            ..Self::default()
        }
    }

    pub fn lpc_order(&self) -> usize {
        2 * self.n_formants + 2
    }
}

/// First two formants of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormantEstimate {
    pub f1: f64,
    pub f2: f64,
    pub b1: f64,
    pub b2: f64,
    /// False when fewer than two narrow-band roots were found in some window
    /// or the estimates disagree across windows.
    pub confident: bool,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / median(v.to_vec())
}

/// Estimates F1/F2 around the centre of `[t0, t1]`.
pub fn formants(buf: &AudioBuffer, t0: f64, t1: f64, s: &FormantSettings) -> Result<FormantEstimate> {
    buf.segment_range(t0, t1)?;
    let sr = buf.sample_rate() as f64;
    let target = 2.0 * s.max_formant_hz;
    // resample the segment with a little context for the filter tails
    let margin = 0.005;
    let ctx = buf.segment_range((t0 - margin).max(0.0), (t1 + margin).min(buf.duration()))?;
    let ctx_t0 = ctx.start as f64 / sr;
    let y = resample(&buf.samples()[ctx], sr, target);
    let alpha = (-2.0 * std::f64::consts::PI * 50.0 / target).exp();
    let y: Vec<f64> = (0..y.len())
        .map(|n| if n == 0 { y[0] } else { y[n] - alpha * y[n - 1] })
        .collect();

    let seg_len = t1 - t0;
    let win = s.window_s.min(seg_len);
    let centre = 0.5 * (t0 + t1);
    let mut offsets = vec![0.0];
    for k in 1..=2 {
        let d = k as f64 * s.step_s;
        if centre - d - win / 2.0 >= t0 - 1e-9 && centre + d + win / 2.0 <= t1 + 1e-9 {
            offsets.push(-d);
            offsets.push(d);
        }
    }
    let order = s.lpc_order();
    let win_n = (win * target).round() as usize;
    let hamming: Vec<f64> = (0..win_n)
        .map(|i| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (win_n.max(2) - 1) as f64).cos())
        .collect();

    let mut picks: Vec<(Resonance, Resonance)> = Vec::new();
    let mut fallback: Option<Vec<Resonance>> = None;
    let mut all_qualified = true;
    for off in offsets {
        let start_t = centre + off - win / 2.0 - ctx_t0;
        let start = (start_t * target).round().max(0.0) as usize;
        if start + win_n > y.len() || win_n <= order + 1 {
            all_qualified = false;
            continue;
        }
        let frame: Vec<f64> = y[start..start + win_n]
            .iter()
            .zip(&hamming)
            .map(|(v, w)| v * w)
            .collect();
        let Some(a) = burg(&frame, order) else {
            all_qualified = false;
            continue;
        };
        let res = lpc_roots_to_resonances(&a, target);
        let usable: Vec<Resonance> = res
            .iter()
            .copied()
            .filter(|r| r.frequency > 50.0 && r.frequency < s.max_formant_hz - 50.0)
            .collect();
        let narrow: Vec<Resonance> = usable
            .iter()
            .copied()
            .filter(|r| r.bandwidth < s.max_bandwidth_hz)
            .collect();
        if narrow.len() >= 2 {
            picks.push((narrow[0], narrow[1]));
        } else {
            all_qualified = false;
            if off == 0.0 || fallback.is_none() {
                fallback = Some(usable);
            }
        }
    }

    if picks.is_empty() {
        let usable = fallback.unwrap_or_default();
        if usable.len() < 2 {
            return Err(Error::Undefined(
                "fewer than two resonances in the LPC model".into(),
            ));
        }
        return Ok(FormantEstimate {
            f1: usable[0].frequency,
            f2: usable[1].frequency,
            b1: usable[0].bandwidth,
            b2: usable[1].bandwidth,
            confident: false,
        });
    }
    let f1s: Vec<f64> = picks.iter().map(|p| p.0.frequency).collect();
    let f2s: Vec<f64> = picks.iter().map(|p| p.1.frequency).collect();
    let stable = spread(&f1s) <= s.max_relative_spread && spread(&f2s) <= s.max_relative_spread;
    Ok(FormantEstimate {
        f1: median(f1s),
        f2: median(f2s),
        b1: median(picks.iter().map(|p| p.0.bandwidth).collect()),
        b2: median(picks.iter().map(|p| p.1.bandwidth).collect()),
        confident: all_qualified && stable,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::signal::testsig::noise;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Impulse train through a cascade of two second-order resonators.
    pub fn two_formant_vowel(f1: f64, f2: f64, f0: f64, dur: f64, sr: u32) -> Vec<f64> {
        let fs = sr as f64;
        let n = (dur * fs) as usize;
        let period = fs / f0;
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let k = (i as f64 / period).floor();
                if (i as f64 - k * period) < 1.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        for (f, bw) in [(f1, 80.0), (f2, 100.0)] {
            let r = (-PI * bw / fs).exp();
            let c1 = 2.0 * r * (2.0 * PI * f / fs).cos();
            let c2 = -r * r;
            let gain = 1.0 - c1 - c2;
            let mut y = vec![0.0; n];
            for i in 0..n {
                let y1 = if i >= 1 { y[i - 1] } else { 0.0 };
                let y2 = if i >= 2 { y[i - 2] } else { 0.0 };
                y[i] = gain * x[i] + c1 * y1 + c2 * y2;
            }
            x = y;
        }
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x.iter().map(|v| 0.8 * v / peak).collect()
    }

    #[test]
    fn two_resonance_vowel() {
        let buf = AudioBuffer::new(two_formant_vowel(500.0, 1500.0, 100.0, 0.3, 16000), 16000).unwrap();
        let e = formants(&buf, 0.1, 0.2, &FormantSettings::default()).unwrap();
        assert!((e.f1 - 500.0).abs() <= 50.0, "{e:?}");
        assert!((e.f2 - 1500.0).abs() <= 75.0, "{e:?}");
        assert!(e.confident);
        assert!(0.0 < e.f1 && e.f1 < e.f2);
    }

    #[test]
    fn random_vowels_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 20 {
            let f1 = rng.gen_range(300.0..900.0);
            let f2 = rng.gen_range(900.0..2500.0);
            if f2 - f1 < 200.0 {
                continue;
            }
            let f0 = 100.0;
            let buf = AudioBuffer::new(two_formant_vowel(f1, f2, f0, 0.3, 16000), 16000).unwrap();
            let e = formants(&buf, 0.1, 0.2, &FormantSettings::default()).unwrap();
            assert!((e.f1 - f1).abs() <= 50.0, "f1={f1} f2={f2} f0={f0} {e:?}");
            assert!((e.f2 - f2).abs() <= 75.0, "f1={f1} f2={f2} f0={f0} {e:?}");
            done += 1;
        }
    }

    #[test]
    fn white_noise_low_confidence() {
        for seed in 0..5 {
            let buf = AudioBuffer::new(noise(0.5, 0.3, 16000, seed), 16000).unwrap();
            let e = formants(&buf, 0.1, 0.2, &FormantSettings::default()).unwrap();
            assert!(!e.confident, "seed {seed}: {e:?}");
        }
    }

    #[test]
    fn segment_outside_buffer() {
        let buf = AudioBuffer::new(vec![0.1; 1600], 16000).unwrap();
        assert!(matches!(
            formants(&buf, 0.05, 0.2, &FormantSettings::default()),
            Err(Error::Precondition(_))
        ));
    }
}
