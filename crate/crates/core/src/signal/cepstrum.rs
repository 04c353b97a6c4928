use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::AudioBuffer;
use crate::error::{Error, Result};

const MIN_F0: f64 = 70.0;
const MAX_F0: f64 = 500.0;

/// Cepstral peak prominence (dB) of every full frame inside the given
/// `(t0, t1)` segments.
pub fn cpp_frames(
    buf: &AudioBuffer,
    voiced_segments: &[(f64, f64)],
    frame_s: f64,
    shift_s: f64,
) -> Result<Vec<f64>> {
    let sr = buf.sample_rate() as f64;
    let len = (frame_s * sr).round() as usize;
    let hop = ((shift_s * sr).round() as usize).max(1);
    let nfft = (2 * len).next_power_of_two();
    let q_lo = (sr / MAX_F0).floor() as usize;
    let q_hi = ((sr / MIN_F0).ceil() as usize).min(nfft / 2 - 1);
    if len < 2 || q_lo + 2 > q_hi {
        return Err(Error::Precondition("frame too short for CPP".into()));
    }
    let hann: Vec<f64> = (0..len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (len - 1) as f64).cos())
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);

    let mut out = Vec::new();
    for &(t0, t1) in voiced_segments {
        let range = buf.segment_range(t0, t1)?;
        let x = &buf.samples()[range];
        let mut start = 0;
        while start + len <= x.len() {
            let mut spec: Vec<Complex<f64>> = x[start..start + len]
                .iter()
                .zip(&hann)
                .map(|(v, w)| Complex::new(v * w, 0.0))
                .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
                .take(nfft)
                .collect();
            start += hop;
            fwd.process(&mut spec);
            let mut ceps: Vec<Complex<f64>> = spec
                .iter()
                .map(|c| Complex::new(20.0 * (c.norm() + 1e-12).log10(), 0.0))
                .collect();
            inv.process(&mut ceps);
            let c: Vec<f64> = ceps
                .iter()
                .map(|z| 20.0 * ((z.re / nfft as f64).abs() + 1e-12).log10())
                .collect();
            out.push(prominence(&c[q_lo..=q_hi], q_lo, sr));
        }
    }
    if out.is_empty() {
        return Err(Error::Undefined("no voiced frames for CPP".into()));
    }
    Ok(out)
}

/// Peak height of the dB cepstrum above its least-squares trend line over the quefrency band.
fn prominence(band: &[f64], offset: usize, sr: f64) -> f64 {
    let q: Vec<f64> = (0..band.len()).map(|i| (i + offset) as f64 / sr).collect();
    let n = band.len() as f64;
    let mq = q.iter().sum::<f64>() / n;
    let mc = band.iter().sum::<f64>() / n;
    let sxy: f64 = q.iter().zip(band).map(|(a, b)| (a - mq) * (b - mc)).sum();
    let sxx: f64 = q.iter().map(|a| (a - mq).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = mc - slope * mq;
    let (k, peak) = band
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    peak - (icpt + slope * q[k])
}

/// Mean CPP (dB) over the voiced segments, 40 ms frames with a 10 ms hop.
pub fn cpp(buf: &AudioBuffer, voiced_segments: &[(f64, f64)]) -> Result<f64> {
    if voiced_segments.is_empty() {
        return Err(Error::Undefined("no voiced segments; CPP undefined".into()));
    }
    let f = cpp_frames(buf, voiced_segments, 0.04, 0.01)?;
    Ok(f.iter().sum::<f64>() / f.len() as f64)
}
