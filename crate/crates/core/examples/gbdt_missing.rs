//! Gradient-boosted trees on data with missing cells: learned default
//! directions, importances and the text model format.
//!
//!     cargo run --example gbdt_missing

use dyskit::trees::{DataMatrix, Gbdt, GbdtParams, Node};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dyskit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 200;
    let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
    // `vrr` is informative but often missing for severe speakers
    let vrr: Vec<f64> = y
        .iter()
        .map(|&c| if c == 3 && rng.gen_bool(0.7) { f64::NAN } else { 90.0 - 12.0 * c as f64 + rng.gen_range(-8.0..8.0) })
        .collect();
    let rate: Vec<f64> = y.iter().map(|&c| 5.0 - 0.5 * c as f64 + rng.gen_range(-0.8..0.8)).collect();
    let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let x = DataMatrix::from_columns(vec!["vrr".into(), "speaking_rate".into(), "noise".into()], vec![vrr, rate, noise])?;

    let params = GbdtParams { rounds: 40, max_depth: 3, ..Default::default() };
    let model = Gbdt::train(&x, &y, 4, &params)?;
    for r in [1, 10, 40] {
        println!("log-loss after {r:>2} rounds: {:.4}", model.truncated(r).log_loss(&x, &y)?);
    }

    if let Node::Split { feature, threshold, default, .. } = &model.trees[0][3].nodes[0] {
        println!(
            "first split for class 3: {} < {threshold:.2}, missing goes {default:?}",
            model.feature_names[*feature]
        );
    }
    for (name, g) in model.feature_names.iter().zip(model.gain_importance()) {
        println!("gain importance {name:<14} {g:.2}");
    }

    let text = model.to_text();
    let back = Gbdt::from_text(&text)?;
    println!("model text: {} lines, round trip exact: {}", text.lines().count(), back == model);
    let p = back.predict_proba(&[f64::NAN, 3.4, 0.5]);
    println!("P(severity | vrr missing, rate 3.4) = {p:.3?}");
    Ok(())
}
