use serde::{Deserialize, Serialize};

use super::{normalized_autocorrelation, parabolic_peak, AudioBuffer, Frames};
use crate::error::{Error, Result};

/// Autocorrelation pitch tracker settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PitchSettings {
    pub floor_hz: f64,
    pub ceiling_hz: f64,
    pub frame_s: f64,
    pub shift_s: f64,
    /// Minimum normalised autocorrelation peak for a frame to count as voiced.
    pub voicing_threshold: f64,
    /// Frames whose peak amplitude is below this fraction of the global peak are unvoiced.
    pub silence_threshold: f64,
}

impl Default for PitchSettings {
    fn default() -> Self {
        Self {
            floor_hz: 70.0,
            ceiling_hz: 500.0,
            frame_s: 0.04,
            shift_s: 0.01,
            voicing_threshold: 0.45,
            silence_threshold: 0.03,
        }
    }
}

/// Per-frame F0 in Hz; 0 marks an unvoiced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchContour {
    pub frame_times: Vec<f64>,
    pub f0: Vec<f64>,
    pub floor_hz: f64,
    pub ceiling_hz: f64,
    pub frame_s: f64,
    pub shift_s: f64,
}

impl PitchContour {
    pub fn voiced_count(&self) -> usize {
        self.f0.iter().filter(|&&f| f > 0.0).count()
    }

    pub fn voiced_f0(&self) -> impl Iterator<Item = f64> + '_ {
        self.f0.iter().copied().filter(|&f| f > 0.0)
    }

    /// Runs of consecutive voiced frames as index ranges.
    pub fn voiced_runs(&self) -> Vec<std::ops::Range<usize>> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, &f) in self.f0.iter().enumerate() {
            match (f > 0.0, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(s..self.f0.len());
        }
        runs
    }
}

/// Time spans `[t0, t1]` covered by voiced runs, frame edges included.
pub fn voiced_segments(contour: &PitchContour, duration: f64) -> Vec<(f64, f64)> {
    let half = contour.frame_s / 2.0;
    contour
        .voiced_runs()
        .into_iter()
        .map(|r| {
            let t0 = (contour.frame_times[r.start] - half).max(0.0);
            let t1 = (contour.frame_times[r.end - 1] + half).min(duration);
            (t0, t1)
        })
        .collect()
}

/// Best periodicity candidate of a frame: (lag in samples, correlation).
pub(crate) fn best_candidate(frame: &[f64], min_lag: usize, max_lag: usize) -> Option<(f64, f64)> {
    let max_lag = max_lag.min(frame.len().saturating_sub(2));
    if min_lag < 1 || min_lag > max_lag {
        return None;
    }
    let r: Vec<f64> = (min_lag - 1..=max_lag + 1)
        .map(|lag| normalized_autocorrelation(frame, lag))
        .collect();
    let mut cands: Vec<(f64, f64)> = Vec::new();
    for k in 1..r.len() - 1 {
        if r[k] > r[k - 1] && r[k] >= r[k + 1] && r[k] > 0.0 {
            let (d, v) = parabolic_peak(r[k - 1], r[k], r[k + 1]);
            let lag = (min_lag - 1 + k) as f64 + d;
            cands.push((lag, v.min(1.0)));
        }
    }
    let best = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    // shortest lag within a small margin of the best guards against octave-down errors
    let mut pick = cands.iter().copied().find(|c| c.1 >= best - 0.03)?;
    // a strong peak near a half or a third of the lag marks `pick` as a subharmonic
    'outer: loop {
        for div in [2.0, 3.0] {
            let target = pick.0 / div;
            if let Some(c) = cands
                .iter()
                .find(|c| (c.0 - target).abs() <= 0.08 * target && c.1 >= SUBHARMONIC_RATIO * pick.1)
            {
                pick = *c;
                continue 'outer;
            }
        }
        return Some(pick);
    }
}

const SUBHARMONIC_RATIO: f64 = 0.8;

fn centred(frame: &[f64]) -> Vec<f64> {
    let mean = frame.iter().sum::<f64>() / frame.len() as f64;
    frame.iter().map(|x| x - mean).collect()
}

/// Per-frame F0 from the normalised autocorrelation peak within [floor, ceiling],
/// followed by 3-point median smoothing.
pub fn pitch_contour(buf: &AudioBuffer, settings: &PitchSettings) -> Result<PitchContour> {
    let sr = buf.sample_rate() as f64;
    let PitchSettings {
        floor_hz,
        ceiling_hz,
        frame_s,
        shift_s,
        ..
    } = *settings;
    if !(floor_hz > 0.0 && floor_hz < ceiling_hz && ceiling_hz <= sr / 2.0) {
        return Err(Error::Precondition(format!(
            "pitch range [{floor_hz}, {ceiling_hz}] invalid for sample rate {sr}"
        )));
    }
    let frames = Frames::new(buf.len(), buf.sample_rate(), frame_s, shift_s)
        .map_err(|e| Error::Unvoiced(format!("empty contour: {e}")))?;
    let min_lag = ((sr / ceiling_hz).floor() as usize).max(2);
    let max_lag = (sr / floor_hz).ceil() as usize;
    let x = buf.samples();
    let global_peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut times = Vec::with_capacity(frames.starts.len());
    let mut raw = Vec::with_capacity(frames.starts.len());
    for &start in &frames.starts {
        times.push(frames.centre_time(start));
        let frame = &x[start..start + frames.len];
        let peak = frame.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if global_peak == 0.0 || peak < settings.silence_threshold * global_peak {
            raw.push(0.0);
            continue;
        }
        let f0 = best_candidate(&centred(frame), min_lag, max_lag)
            .filter(|&(_, r)| r >= settings.voicing_threshold)
            .map(|(lag, _)| sr / lag)
            .filter(|&f| f >= floor_hz && f <= ceiling_hz)
            .unwrap_or(0.0);
        raw.push(f0);
    }

    let mut f0 = raw.clone();
    for i in 1..raw.len().saturating_sub(1) {
        let mut w = [raw[i - 1], raw[i], raw[i + 1]];
        w.sort_by(|a, b| a.total_cmp(b));
        f0[i] = w[1];
    }

    Ok(PitchContour {
        frame_times: times,
        f0,
        floor_hz,
        ceiling_hz,
        frame_s,
        shift_s,
    })
}
