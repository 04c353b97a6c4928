//! Rank statistics used for feature validation, plus collinearity checks.
//!
//!     cargo run --example severity_stats

use dyskit::stats::{kendall_tau, kruskal_wallis, vif_all};

fn main() -> dyskit::Result<()> {
    // speaking rate (syllables/s) for four severity groups
    let groups = vec![
        vec![4.8, 5.1, 4.6, 5.3, 4.9],
        vec![4.2, 4.5, 4.7, 4.1],
        vec![3.6, 3.9, 4.0, 3.4, 3.8],
        vec![2.9, 3.1, 2.5, 3.3],
    ];
    let kw = kruskal_wallis(&groups)?;
    println!("Kruskal-Wallis H = {:.3}, df = {}, p = {:.2e}", kw.h, kw.df, kw.p_value);

    let (rate, severity): (Vec<f64>, Vec<f64>) = groups
        .iter()
        .enumerate()
        .flat_map(|(s, g)| g.iter().map(move |&v| (v, s as f64)))
        .unzip();
    let tau = kendall_tau(&rate, &severity)?;
    println!("Kendall tau-b = {:.3}, p = {:.2e}, n = {}", tau.coefficient, tau.p_value, tau.n);

    // articulation rate nearly duplicates speaking rate
    let artic: Vec<f64> = rate.iter().enumerate().map(|(i, r)| 1.1 * r + 0.01 * (i % 3) as f64).collect();
    let pitch: Vec<f64> = (0..rate.len()).map(|i| 120.0 + ((i * 7) % 11) as f64).collect();
    for (name, v) in ["speaking_rate", "articulation_rate", "f0_mean"].iter().zip(vif_all(&[rate, artic, pitch])?) {
        println!("VIF {name:<18} {:>12.1}{}", v.value, if v.capped { " (capped)" } else { "" });
    }
    Ok(())
}
