use super::{AudioBuffer, Frames};
use crate::error::Result;

/// Per-frame mean squared amplitude (linear scale).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyContour {
    pub frame_times: Vec<f64>,
    pub energy: Vec<f64>,
}

/// Mean squared amplitude per frame. A signal shorter than one frame yields a
/// single frame spanning the whole buffer.
pub fn energy_contour(buf: &AudioBuffer, frame_s: f64, shift_s: f64) -> Result<EnergyContour> {
    let x = buf.samples();
    let frames = match Frames::new(x.len(), buf.sample_rate(), frame_s, shift_s) {
        Ok(f) => f,
        Err(_) if frame_s > 0.0 && shift_s > 0.0 => {
            let e = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
            return Ok(EnergyContour {
                frame_times: vec![buf.duration() / 2.0],
                energy: vec![e],
            });
        }
        Err(e) => return Err(e),
    };
    let (frame_times, energy) = frames
        .starts
        .iter()
        .map(|&s| {
            let f = &x[s..s + frames.len];
            (
                frames.centre_time(s),
                f.iter().map(|v| v * v).sum::<f64>() / f.len() as f64,
            )
        })
        .unzip();
    Ok(EnergyContour {
        frame_times,
        energy,
    })
}
