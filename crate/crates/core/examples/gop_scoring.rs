//! Goodness-of-pronunciation scores under every method and normalization,
//! correlated with severity.
//!
//!     cargo run --example gop_scoring

use dyskit::gop::{
    score_utterance, severity_correlation, GopConfig, GopMethod, LogitMatrix, Normalization, PhoneSegment,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dyskit::Result<()> {
    let labels: Vec<String> = ["sil", "AA", "IY", "UW", "B", "D", "K", "S"].map(String::from).to_vec();
    let q = labels.len();
    let priors = vec![1.0 / q as f64; q];
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // recognizer confidence in the intended phone drops with severity
    let mut corpus = Vec::new();
    for utt in 0..32 {
        let severity = utt % 4;
        let mut rows = Vec::new();
        let mut segments = Vec::new();
        for _ in 0..6 {
            let k = rng.gen_range(1..q);
            let len = rng.gen_range(3..8);
            segments.push(PhoneSegment { label: labels[k].clone(), start: rows.len(), end: rows.len() + len });
            for _ in 0..len {
                let mut r: Vec<f64> = (0..q).map(|_| rng.gen_range(-1.0..1.0)).collect();
                r[k] += rng.gen_range(1.0..4.0) - 0.8 * severity as f64;
                rows.push(r);
            }
        }
        corpus.push((LogitMatrix::new(rows, labels.clone(), 0.02)?, segments, severity as f64));
    }
    let severities: Vec<f64> = corpus.iter().map(|c| c.2).collect();

    println!("{:<12}{:>9}{:>9}{:>9}", "method", "NONE", "SCALE", "PRIOR");
    for m in GopMethod::ALL {
        let mut line = format!("{:<12}", m.name());
        for n in Normalization::ALL {
            let cfg = GopConfig::new(m, n).with_priors(priors.clone()).with_temperature(2.0);
            let scores = corpus
                .iter()
                .map(|(l, s, _)| Ok(score_utterance(l, s, &cfg)?.utterance))
                .collect::<dyskit::Result<Vec<f64>>>()?;
            let tau = severity_correlation(&scores, &severities)?;
            line += &format!("{:>9}", tau.map_or("NA".into(), |t| format!("{:.3}", t.coefficient)));
        }
        println!("{line}");
    }
    Ok(())
}
