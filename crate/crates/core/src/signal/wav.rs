use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioBuffer;
use crate::error::{Error, Result};

/// A decoded WAV file.
#[derive(Debug, Clone)]
pub struct DecodedWav {
    pub buffer: AudioBuffer,
    pub channels: u16,
    pub bits_per_sample: u16,
    /// Set when a multichannel file was averaged down to mono.
    pub downmixed: bool,
}

/// Reads a PCM (8/16/24/32-bit integer or 32-bit float) WAV file as mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<DecodedWav> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other}", path.display())),
    })?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Int => {
            let scale = match spec.bits_per_sample {
                8 => 128.0,
                16 => 32768.0,
                24 => 8_388_608.0,
                32 => 2_147_483_648.0,
                b => return Err(Error::Format(format!("unsupported bit depth {b}"))),
            };
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(e.to_string()))?
        }
        SampleFormat::Float => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| (v as f64).clamp(-1.0, 1.0)))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(e.to_string()))?,
    };
    if interleaved.len() < channels {
        return Err(Error::Format(format!("{}: no audio frames", path.display())));
    }
    let mono: Vec<f64> = if channels == 1 {
        interleaved
    } else {
        log::warn!(
            "{}: {} channels averaged to mono",
            path.display(),
            channels
        );
        interleaved
            .chunks_exact(channels)
            .map(|c| c.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    Ok(DecodedWav {
        buffer: AudioBuffer::new(mono, spec.sample_rate)?,
        channels: spec.channels,
        bits_per_sample: spec.bits_per_sample,
        downmixed: channels > 1,
    })
}

/// Writes a mono 16-bit PCM WAV. Samples are rounded, not dithered.
pub fn write_wav_16bit(path: impl AsRef<Path>, buf: &AudioBuffer) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let map = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Format(other.to_string()),
    };
    let mut w = WavWriter::create(path, spec).map_err(map)?;
    for &s in buf.samples() {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        w.write_sample(v).map_err(map)?;
    }
    w.finalize().map_err(map)
}
