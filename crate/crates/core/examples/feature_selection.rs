//! Two-step selection on a synthetic table: collinearity reduction with
//! Lasso, then a significance filter and forest importances.
//!
//!     cargo run --example feature_selection

use dyskit::pipeline::{synth_table, PlantedFeature, TableSpec};
use dyskit::selection::{embedded_select, filter_select, lasso_select, EmbeddedRule, PenalizedConfig};
use dyskit::stats::vif_all;
use dyskit::trees::{DataMatrix, ForestParams};

fn high_vif(x: &DataMatrix) -> dyskit::Result<usize> {
    if x.n_cols() < 3 {
        return Ok(0);
    }
    Ok(vif_all(x.columns())?.iter().filter(|v| v.value > 10.0).count())
}

fn main() -> dyskit::Result<()> {
    let spec = TableSpec {
        languages: vec!["en".into()],
        speakers_per_severity: 6,
        utterances_per_speaker: 4,
        features: vec![
            PlantedFeature::new("jitter", 0.6, &[]),
            PlantedFeature::new("speaking_rate", -0.8, &[]),
            PlantedFeature::new("f0_std", -0.3, &[]),
            PlantedFeature::new("energy_max", 0.0, &[]),
            PlantedFeature::new("npvi_v", 0.0, &[]),
        ],
        speaker_sd: 0.3,
        seed: 4,
    };
    let table = synth_table(&spec)?;

    // two derived columns that duplicate existing information
    let mut names = table.features.names().to_vec();
    let mut cols = table.features.columns().to_vec();
    names.push("articulation_rate".into());
    cols.push(cols[1].iter().map(|v| 1.15 * v).collect());
    names.push("ppq".into());
    cols.push(cols[0].iter().zip(&cols[2]).map(|(a, b)| a + 0.5 * b).collect());
    let x = DataMatrix::from_columns(names, cols)?;
    println!("{} features, {} with VIF > 10", x.n_cols(), high_vif(&x)?);

    let y = table.labels_f64();
    let lasso = lasso_select(&x, &y, &table.speakers, &PenalizedConfig::default())?;
    let kept = x.select_named(&lasso.selected)?;
    println!("lasso keeps {:?}, {} with VIF > 10", lasso.selected, high_vif(&kept)?);

    let filtered = filter_select(&kept, &y, 0.05)?;
    println!("significance filter keeps {:?}", filtered.selected);

    let embedded = embedded_select(&kept, &table.labels(), EmbeddedRule::AboveMean, &ForestParams::default())?;
    for d in &embedded.diagnostics {
        println!("  importance {:<16} {:.3}", d.name, d.importance.unwrap_or(0.0));
    }
    println!("embedded selection keeps {:?}", embedded.selected);
    Ok(())
}
