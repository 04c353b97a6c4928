//! Pitch, voice quality, harmonicity and formants of synthetic signals.
//!
//!     cargo run --example voice_analysis

use std::f64::consts::PI;

use dyskit::biomarkers::voice_quality;
use dyskit::signal::{formants, hnr, pitch_contour, AudioBuffer, FormantSettings, PitchSettings};

const SR: u32 = 16000;

/// A tone whose cycle lengths wander by up to `jitter` (relative).
fn tone(f0: f64, jitter: f64, seed: u64) -> Vec<f64> {
    let mut state = seed;
    let mut uniform = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut x = Vec::new();
    while x.len() < SR as usize {
        let n = (SR as f64 / f0 * (1.0 + jitter * uniform())).round() as usize;
        x.extend((0..n).map(|k| 0.6 * (2.0 * PI * k as f64 / n as f64).sin()));
    }
    x
}

/// Impulse train at `f0` filtered by two resonances.
fn vowel(f1: f64, f2: f64, f0: f64) -> Vec<f64> {
    let fs = SR as f64;
    let period = (fs / f0).round() as usize;
    let mut x: Vec<f64> = (0..SR as usize / 2).map(|i| if i % period == 0 { 1.0 } else { 0.0 }).collect();
    for (f, bw) in [(f1, 80.0), (f2, 100.0)] {
        let r = (-PI * bw / fs).exp();
        let (c1, c2) = (2.0 * r * (2.0 * PI * f / fs).cos(), -r * r);
        let mut y = vec![0.0; x.len()];
        for i in 0..x.len() {
            y[i] = (1.0 - c1 - c2) * x[i]
                + c1 * if i >= 1 { y[i - 1] } else { 0.0 }
                + c2 * if i >= 2 { y[i - 2] } else { 0.0 };
        }
        x = y;
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.iter().map(|v| 0.8 * v / peak).collect()
}

fn main() -> dyskit::Result<()> {
    let settings = PitchSettings::default();
    for jitter in [0.0, 0.03, 0.1] {
        let buf = AudioBuffer::new(tone(140.0, jitter, 1), SR)?;
        let contour = pitch_contour(&buf, &settings)?;
        let f0: Vec<f64> = contour.voiced_f0().collect();
        let mean = f0.iter().sum::<f64>() / f0.len() as f64;
        let vq = voice_quality(&buf, &settings);
        println!(
            "injected {:>4.1}%: mean F0 {mean:6.1} Hz, jitter {:.3}%, shimmer {:.3}%, HNR {:.1} dB",
            jitter * 100.0,
            vq.jitter.unwrap_or(f64::NAN),
            vq.shimmer.unwrap_or(f64::NAN),
            hnr(&buf, 0.0, buf.duration(), &settings)?
        );
    }

    for (f1, f2) in [(300.0, 2300.0), (750.0, 1250.0), (320.0, 850.0)] {
        let buf = AudioBuffer::new(vowel(f1, f2, 110.0), SR)?;
        let e = formants(&buf, 0.15, 0.35, &FormantSettings::default())?;
        println!("vowel ({f1:.0}, {f2:.0}) Hz -> F1 {:.0} Hz, F2 {:.0} Hz, confident {}", e.f1, e.f2, e.confident);
    }
    Ok(())
}
