use nalgebra::DMatrix;

/// A pole pair of the all-pole model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub frequency: f64,
    pub bandwidth: f64,
}

/// Burg's method. Returns `[1, a1, .., ap]` with prediction error filter
/// `A(z) = 1 + sum a_k z^-k`, or `None` when the signal is too short or silent.
pub fn burg(x: &[f64], order: usize) -> Option<Vec<f64>> {
    if x.len() <= order + 1 {
        return None;
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut f: Vec<f64> = x[1..].to_vec();
    let mut b: Vec<f64> = x[..x.len() - 1].to_vec();
    for m in 0..order {
        let num: f64 = f.iter().zip(&b).map(|(p, q)| p * q).sum();
        let den: f64 = f.iter().chain(&b).map(|v| v * v).sum();
        if den <= 0.0 {
            return None;
        }
        let k = -2.0 * num / den;
        let prev = a.clone();
        for j in 1..=m + 1 {
            a[j] = prev[j] + k * prev[m + 1 - j];
        }
        for (p, q) in f.iter_mut().zip(b.iter_mut()) {
            let (fp, bq) = (*p, *q);
            *p = fp + k * bq;
            *q = bq + k * fp;
        }
        f.remove(0);
        b.pop();
        if f.is_empty() {
            break;
        }
    }
    Some(a)
}

/// Converts the roots of `A(z)` to resonances, reflecting roots outside the
/// unit circle. Only upper-half-plane roots are returned, sorted by frequency.
pub fn lpc_roots_to_resonances(a: &[f64], sample_rate: f64) -> Vec<Resonance> {
    let p = a.len() - 1;
    if p == 0 {
        return Vec::new();
    }
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        companion[(0, j)] = -a[j + 1] / a[0];
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    let mut out: Vec<Resonance> = companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im > 1e-12)
        .map(|z| {
            let mut r = z.norm();
            if r > 1.0 {
                r = 1.0 / r;
            }
            Resonance {
                frequency: z.im.atan2(z.re) * sample_rate / (2.0 * std::f64::consts::PI),
                bandwidth: -r.ln() * sample_rate / std::f64::consts::PI,
            }
        })
        .collect();
    out.sort_by(|x, y| x.frequency.total_cmp(&y.frequency));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn recovers_known_pole_pair() {
        // AR(2) resonator at 1000 Hz, bandwidth 100 Hz, fs 10 kHz, driven by an impulse train
        let fs = 10000.0;
        let r = (-PI * 100.0 / fs).exp();
        let theta = 2.0 * PI * 1000.0 / fs;
        let (a1, a2) = (-2.0 * r * theta.cos(), r * r);
        let mut y = vec![0.0; 2000];
        for n in 0..y.len() {
            let e = if n % 97 == 0 { 1.0 } else { 0.0 };
            let y1 = if n >= 1 { y[n - 1] } else { 0.0 };
            let y2 = if n >= 2 { y[n - 2] } else { 0.0 };
            y[n] = e - a1 * y1 - a2 * y2;
        }
        let a = burg(&y, 2).unwrap();
        assert!((a[1] - a1).abs() < 0.02, "{a:?}");
        assert!((a[2] - a2).abs() < 0.02);
        let res = lpc_roots_to_resonances(&a, fs);
        assert_eq!(res.len(), 1);
        assert!((res[0].frequency - 1000.0).abs() < 10.0);
        assert!((res[0].bandwidth - 100.0).abs() < 30.0);
    }

    #[test]
    fn too_short_is_none() {
        assert!(burg(&[1.0, 2.0], 4).is_none());
        assert!(burg(&[0.0; 64], 4).is_none());
    }
}
