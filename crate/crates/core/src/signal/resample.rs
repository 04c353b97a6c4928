use std::f64::consts::PI;

const ZERO_CROSSINGS: f64 = 16.0;

/// Band-limited resampling with a Hann-windowed sinc kernel.
pub fn resample(x: &[f64], from_hz: f64, to_hz: f64) -> Vec<f64> {
    if x.is_empty() || from_hz == to_hz {
        return x.to_vec();
    }
    let ratio = to_hz / from_hz;
    // cutoff in cycles per input sample, slightly under Nyquist of the slower rate
    let fc = 0.5 * ratio.min(1.0) * 0.95;
    let half_width = ZERO_CROSSINGS / (2.0 * fc);
    let n_out = ((x.len() as f64) * ratio).floor() as usize;
    (0..n_out)
        .map(|m| {
            let t = m as f64 / ratio;
            let lo = ((t - half_width).ceil().max(0.0)) as usize;
            let hi = ((t + half_width).floor() as usize).min(x.len() - 1);
            (lo..=hi)
                .map(|n| {
                    let u = t - n as f64;
                    let arg = 2.0 * fc * u;
                    let sinc = if arg.abs() < 1e-12 {
                        1.0
                    } else {
                        (PI * arg).sin() / (PI * arg)
                    };
                    let w = 0.5 * (1.0 + (PI * u / half_width).cos());
                    x[n] * 2.0 * fc * sinc * w
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_in_band_sine() {
        let sr = 16000.0;
        let x: Vec<f64> = (0..4000)
            .map(|i| (2.0 * PI * 440.0 * i as f64 / sr).sin())
            .collect();
        let y = resample(&x, sr, 10000.0);
        assert_eq!(y.len(), 2500);
        for (m, v) in y.iter().enumerate().skip(200).take(2000) {
            let expect = (2.0 * PI * 440.0 * m as f64 / 10000.0).sin();
            assert!((v - expect).abs() < 0.01, "{m}: {v} vs {expect}");
        }
    }

    #[test]
    fn identity_when_rates_match() {
        let x = vec![0.1, 0.2, 0.3];
        assert_eq!(resample(&x, 8000.0, 8000.0), x);
    }
}
