//! Audio ingestion and low-level DSP.
//!
//! Every analysis here is a pure function of an [`AudioBuffer`]; contours and
//! pulse trains are immutable once built.

mod cepstrum;
mod energy;
mod formant;
mod harmonicity;
mod lpc;
mod pitch;
mod pulses;
mod resample;
mod wav;

pub use cepstrum::{cpp, cpp_frames};
pub use energy::{energy_contour, EnergyContour};
pub use formant::{formants, FormantEstimate, FormantSettings};
pub use harmonicity::{hnr, hnr_frames, hnr_from_correlation};
pub use lpc::{burg, lpc_roots_to_resonances, Resonance};
pub use pitch::{pitch_contour, voiced_segments, PitchContour, PitchSettings};
pub use pulses::{pulse_train, PulseTrain};
pub use resample::resample;
pub use wav::{read_wav, write_wav_16bit, DecodedWav};

use crate::error::{Error, Result};

/// Mono audio normalised to [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Precondition("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::Precondition("audio buffer is empty".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::Precondition(format!(
                "sample {i} is outside [-1, 1] or not finite"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Multiplies every sample by `gain`, clipping is an error.
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|s| s * gain).collect(), self.sample_rate)
    }

    /// Sample index range covering `[t0, t1)` seconds.
    pub fn segment_range(&self, t0: f64, t1: f64) -> Result<std::ops::Range<usize>> {
        let dur = self.duration();
        let eps = 0.5 / self.sample_rate as f64;
        if !(t0.is_finite() && t1.is_finite()) || t0 < -eps || t1 > dur + eps || t0 >= t1 {
            return Err(Error::Precondition(format!(
                "segment [{t0}, {t1}] is not inside the buffer [0, {dur}]"
            )));
        }
        let sr = self.sample_rate as f64;
        let a = ((t0 * sr).round().max(0.0)) as usize;
        let b = ((t1 * sr).round() as usize).min(self.samples.len());
        Ok(a..b)
    }
}

/// Analysis window length and hop in seconds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnalysisWindow {
    pub frame_s: f64,
    pub shift_s: f64,
}

impl AnalysisWindow {
    /// 40 ms frames, 10 ms hop; default for pitch and energy.
    pub const DEFAULT: Self = Self {
        frame_s: 0.04,
        shift_s: 0.01,
    };
    /// 100 ms frames with an 80 ms hop, used for long-term phonation measures.
    pub const PHONATION: Self = Self {
        frame_s: 0.1,
        shift_s: 0.08,
    };
}

impl Default for AnalysisWindow {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Frame layout over `n` samples: (start sample, centre time).
pub(crate) struct Frames {
    pub len: usize,
    pub starts: Vec<usize>,
    pub sample_rate: f64,
}

impl Frames {
    pub fn new(n: usize, sample_rate: u32, frame_s: f64, shift_s: f64) -> Result<Self> {
        if !(frame_s > 0.0 && shift_s > 0.0) {
            return Err(Error::Precondition(
                "frame length and shift must be positive".into(),
            ));
        }
        let sr = sample_rate as f64;
        let len = ((frame_s * sr).round() as usize).max(1);
        let hop = ((shift_s * sr).round() as usize).max(1);
        if len > n {
            return Err(Error::Precondition(format!(
                "frame of {len} samples is longer than the signal ({n} samples)"
            )));
        }
        let count = (n - len) / hop + 1;
        Ok(Self {
            len,
            starts: (0..count).map(|i| i * hop).collect(),
            sample_rate: sr,
        })
    }

    pub fn centre_time(&self, start: usize) -> f64 {
        (start as f64 + self.len as f64 / 2.0) / self.sample_rate
    }
}

/// Three-point parabolic interpolation around index 1: returns (offset, peak value).
pub(crate) fn parabolic_peak(y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let denom = y0 - 2.0 * y1 + y2;
    if denom.abs() < 1e-300 || !denom.is_finite() {
        return (0.0, y1);
    }
    let delta = (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5);
    (delta, y1 - 0.25 * (y0 - y2) * delta)
}

/// Normalised cross-correlation of `x[..n-lag]` against `x[lag..]`.
pub(crate) fn normalized_autocorrelation(x: &[f64], lag: usize) -> f64 {
    if lag >= x.len() {
        return 0.0;
    }
    let a = &x[..x.len() - lag];
    let b = &x[lag..];
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        xy += p * q;
        xx += p * p;
        yy += q * q;
    }
    let d = (xx * yy).sqrt();
    if d <= 0.0 {
        0.0
    } else {
        xy / d
    }
}
