use super::pitch::best_candidate;
use super::{AudioBuffer, PitchSettings};
use crate::error::{Error, Result};

/// `10 log10(r / (1 - r))`, with r clamped to keep the result finite.
pub fn hnr_from_correlation(r: f64) -> f64 {
    let r = r.clamp(1e-6, 1.0 - 1e-9);
    10.0 * (r / (1.0 - r)).log10()
}

/// Per-frame HNR (dB) over `[t0, t1]`. Silent frames and frames without any
/// periodicity candidate in the pitch range are skipped.
pub fn hnr_frames(buf: &AudioBuffer, t0: f64, t1: f64, s: &PitchSettings) -> Result<Vec<f64>> {
    let range = buf.segment_range(t0, t1)?;
    let x = &buf.samples()[range];
    let sr = buf.sample_rate() as f64;
    let len = ((s.frame_s * sr).round() as usize).clamp(1, x.len());
    let hop = ((s.shift_s * sr).round() as usize).max(1);
    let min_lag = ((sr / s.ceiling_hz).floor() as usize).max(2);
    let max_lag = (sr / s.floor_hz).ceil() as usize;
    let mut out = Vec::new();
    let mut start = 0;
    while start + len <= x.len() {
        let frame = &x[start..start + len];
        let mean = frame.iter().sum::<f64>() / len as f64;
        let c: Vec<f64> = frame.iter().map(|v| v - mean).collect();
        if c.iter().any(|&v| v != 0.0) {
            if let Some((_, r)) = best_candidate(&c, min_lag, max_lag) {
                out.push(hnr_from_correlation(r));
            }
        }
        start += hop;
    }
    if out.is_empty() {
        return Err(Error::Undefined(
            "no periodic frames in segment; HNR undefined".into(),
        ));
    }
    Ok(out)
}

/// Mean frame HNR in dB.
pub fn hnr(buf: &AudioBuffer, t0: f64, t1: f64, s: &PitchSettings) -> Result<f64> {
    let f = hnr_frames(buf, t0, t1, s)?;
    Ok(f.iter().sum::<f64>() / f.len() as f64)
}
