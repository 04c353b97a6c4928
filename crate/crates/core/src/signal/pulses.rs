use std::ops::Range;

use super::{parabolic_peak, AudioBuffer, PitchContour};
use crate::error::{Error, Result};

/// Glottal pulse instants and per-period peak amplitudes.
///
/// Pulses are grouped into runs (one per voiced stretch of the contour);
/// periods are only formed between pulses of the same run.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pub times: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub runs: Vec<Range<usize>>,
}

impl PulseTrain {
    /// Builds a single-run train from explicit periods (seconds) and amplitudes.
    ///
    /// `amplitudes` must have one entry per pulse, i.e. `periods.len() + 1`.
    pub fn from_periods(periods: &[f64], amplitudes: &[f64]) -> Result<Self> {
        if amplitudes.len() != periods.len() + 1 {
            return Err(Error::Precondition(
                "need one amplitude per pulse (periods + 1)".into(),
            ));
        }
        if periods.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Precondition("periods must be positive".into()));
        }
        let mut times = vec![0.0];
        for p in periods {
            times.push(times.last().unwrap() + p);
        }
        let n = times.len();
        Ok(Self {
            times,
            amplitudes: amplitudes.to_vec(),
            runs: vec![0..n],
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Periods T_i per run.
    pub fn period_runs(&self) -> Vec<Vec<f64>> {
        self.runs
            .iter()
            .map(|r| self.times[r.clone()].windows(2).map(|w| w[1] - w[0]).collect())
            .collect()
    }

    /// Amplitudes A_i per run.
    pub fn amplitude_runs(&self) -> Vec<Vec<f64>> {
        self.runs
            .iter()
            .map(|r| self.amplitudes[r.clone()].to_vec())
            .collect()
    }

    /// All periods concatenated.
    pub fn periods(&self) -> Vec<f64> {
        self.period_runs().concat()
    }
}

/// Minimum normalized correlation between neighbouring cycles for a pulse
/// to extend the current run.
const MIN_CYCLE_CORRELATION: f64 = 0.5;

/// Places one pulse per glottal cycle within each voiced run of `contour`.
/// A run starts at its largest absolute sample at least half a period
/// inside the run; successive pulses are found
/// by matching the previous cycle's waveform over lags of 0.8 to 1.2 local
/// periods, in both directions, until the match correlation drops. The
/// amplitude of a pulse is the peak absolute sample of its cycle.
pub fn pulse_train(buf: &AudioBuffer, contour: &PitchContour) -> Result<PulseTrain> {
    if contour.voiced_count() == 0 {
        return Err(Error::Unvoiced("no voiced frames to place pulses in".into()));
    }
    let x = buf.samples();
    let sr = buf.sample_rate() as f64;
    let half = contour.frame_s / 2.0;
    let mut train = PulseTrain {
        times: Vec::new(),
        amplitudes: Vec::new(),
        runs: Vec::new(),
    };

    for run in contour.voiced_runs() {
        let t_start = (contour.frame_times[run.start] - half).max(0.0);
        let t_end = (contour.frame_times[run.end - 1] + half).min(buf.duration());
        let lo = (t_start * sr).floor() as usize;
        let hi = ((t_end * sr).ceil() as usize).min(x.len());
        if hi <= lo + 2 {
            continue;
        }
        // local period in samples at sample index `pos`
        let period_at = |pos: f64| -> f64 {
            let t = pos / sr;
            let k = run
                .clone()
                .min_by(|&a, &b| {
                    (contour.frame_times[a] - t)
                        .abs()
                        .total_cmp(&(contour.frame_times[b] - t).abs())
                })
                .unwrap();
            sr / contour.f0[k]
        };

        let margin = (period_at((lo + hi) as f64 / 2.0) / 2.0).ceil() as usize;
        let (a, b) = if hi > lo + 2 * margin + 1 { (lo + margin, hi - margin) } else { (lo, hi) };
        let i0 = (a..b)
            .max_by(|&p, &q| x[p].abs().total_cmp(&x[q].abs()).then(q.cmp(&p)))
            .unwrap();
        let mut found = vec![(i0 as f64, cycle_peak(x, i0, period_at(i0 as f64)))];
        for dir in [1isize, -1] {
            let mut pos = i0 as f64;
            loop {
                let anchor = pos.round() as usize;
                let period = period_at(pos);
                let Some((lag, r)) = best_lag(x, anchor, period, dir, lo, hi) else {
                    break;
                };
                if r < MIN_CYCLE_CORRELATION {
                    break;
                }
                pos = anchor as f64 + lag;
                let at = pos.round() as usize;
                found.push((pos, cycle_peak(x, at, period)));
            }
        }
        found.sort_by(|p, q| p.0.total_cmp(&q.0));
        let run_start = train.times.len();
        for (pos, amp) in found {
            train.times.push(pos / sr);
            train.amplitudes.push(amp);
        }
        train.runs.push(run_start..train.times.len());
    }

    if train.times.is_empty() {
        return Err(Error::Unvoiced("no pulses found in voiced runs".into()));
    }
    Ok(train)
}

/// Signed lag in `[0.8, 1.2]` periods (direction `dir`) whose one-period
/// window best matches the window at `anchor`, refined to sub-sample
/// precision, with the correlation reached.
fn best_lag(x: &[f64], anchor: usize, period: f64, dir: isize, lo: usize, hi: usize) -> Option<(f64, f64)> {
    let h = (period / 2.0).round() as usize;
    let a = (0.8 * period).ceil() as isize;
    let b = (1.2 * period).floor() as isize;
    let lags: Vec<isize> = (a - 1..=b + 1).map(|l| l * dir).collect();
    let mut corr = Vec::with_capacity(lags.len());
    for &l in &lags {
        let c = anchor as isize + l;
        if c < lo as isize || c as usize >= hi {
            corr.push(f64::NEG_INFINITY);
            continue;
        }
        let c = c as usize;
        // windows shrink near the signal edges, down to half a period
        let he = h.min(anchor).min(x.len() - anchor).min(c).min(x.len() - c);
        corr.push(if 2 * he < h {
            f64::NEG_INFINITY
        } else {
            window_correlation(x, anchor, c, he)
        });
    }
    let k = (1..corr.len() - 1)
        .filter(|&k| corr[k].is_finite())
        .max_by(|&p, &q| corr[p].total_cmp(&corr[q]).then(q.cmp(&p)))?;
    let (d, r) = if corr[k - 1].is_finite() && corr[k + 1].is_finite() {
        parabolic_peak(corr[k - 1], corr[k], corr[k + 1])
    } else {
        (0.0, corr[k])
    };
    Some((lags[k] as f64 + d * dir as f64, r.min(1.0)))
}

fn window_correlation(x: &[f64], p: usize, q: usize, h: usize) -> f64 {
    let (u, v) = (&x[p - h..p + h], &x[q - h..q + h]);
    let (mut uv, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (s, t) in u.iter().zip(v) {
        uv += s * t;
        uu += s * s;
        vv += t * t;
    }
    let d = (uu * vv).sqrt();
    if d > 0.0 {
        uv / d
    } else {
        0.0
    }
}

/// Largest absolute sample within half a period of `at`, parabola-refined.
fn cycle_peak(x: &[f64], at: usize, period: f64) -> f64 {
    let h = (period / 2.0).floor() as usize;
    let a = at.saturating_sub(h);
    let b = (at + h).min(x.len() - 1);
    let i = (a..=b)
        .max_by(|&p, &q| x[p].abs().total_cmp(&x[q].abs()).then(q.cmp(&p)))
        .unwrap();
    if i == 0 || i + 1 >= x.len() {
        return x[i].abs();
    }
    let s = if x[i] < 0.0 { -1.0 } else { 1.0 };
    parabolic_peak(s * x[i - 1], s * x[i], s * x[i + 1]).1.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::testsig::sine;
    use crate::signal::{pitch_contour, PitchSettings};

    fn analyse(sig: Vec<f64>) -> PulseTrain {
        let buf = AudioBuffer::new(sig, 16000).unwrap();
        let c = pitch_contour(&buf, &PitchSettings::default()).unwrap();
        pulse_train(&buf, &c).unwrap()
    }

    #[test]
    fn hundred_hz_sine() {
        let p = analyse(sine(100.0, 0.5, 1.0, 16000));
        assert!((95..=101).contains(&p.len()), "{}", p.len());
        for t in p.periods() {
            assert!((t - 0.010).abs() <= 0.0002, "{t}");
        }
        for a in &p.amplitudes {
            assert!((a - 0.5).abs() < 0.005, "{a}");
        }
    }

    #[test]
    fn pure_tone_period_cv_below_one_percent() {
        for f in [90.0, 150.0, 233.0, 310.0] {
            let p = analyse(sine(f, 0.4, 0.6, 16000));
            let t = p.periods();
            let m = t.iter().sum::<f64>() / t.len() as f64;
            let sd = (t.iter().map(|v| (v - m).powi(2)).sum::<f64>() / t.len() as f64).sqrt();
            assert!(sd / m < 0.01, "f={f} cv={}", sd / m);
        }
    }

    #[test]
    fn unvoiced_input_errors() {
        let buf = AudioBuffer::new(vec![0.0; 16000], 16000).unwrap();
        let c = pitch_contour(&buf, &PitchSettings::default()).unwrap();
        assert!(matches!(pulse_train(&buf, &c), Err(Error::Unvoiced(_))));
    }

    #[test]
    fn from_periods_layout() {
        let p = PulseTrain::from_periods(&[0.01, 0.011], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.period_runs().len(), 1);
        assert!(PulseTrain::from_periods(&[0.01], &[1.0]).is_err());
        assert!(PulseTrain::from_periods(&[-0.01], &[1.0, 1.0]).is_err());
    }
}
