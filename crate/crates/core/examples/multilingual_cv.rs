//! Leave-one-speaker-out comparison of multilingual table assemblies on a
//! synthetic three-language feature table.
//!
//!     cargo run --release --example multilingual_cv

use dyskit::pipeline::{assemble, loso_cv, planted_sets, synth_table, AssemblyMode, CvConfig, PlantedFeature, TableSpec};
use dyskit::trees::GbdtParams;

fn main() -> dyskit::Result<()> {
    let mut features = vec![PlantedFeature::new("speaking_rate", 0.4, &[]), PlantedFeature::new("hnr", 0.4, &[])];
    features.push(PlantedFeature::new("vsa_tri", 2.0, &["en"]));
    features.push(PlantedFeature::new("npvi_c", 2.0, &["ko"]));
    features.push(PlantedFeature::new("crr", 2.0, &["ta"]));
    features.push(PlantedFeature::new("energy_min", 0.0, &[]));
    let modes = [AssemblyMode::Intersection, AssemblyMode::Union, AssemblyMode::Proposed];
    let cfg = CvConfig {
        grid: vec![GbdtParams { rounds: 60, max_depth: 3, ..Default::default() }],
        ..Default::default()
    };
    let seeds = 5;
    let mut totals = [0.0; 3];
    for seed in 0..seeds {
        let spec = TableSpec {
            languages: vec!["en".into(), "ko".into(), "ta".into()],
            speakers_per_severity: 2,
            utterances_per_speaker: 4,
            features: features.clone(),
            speaker_sd: 0.3,
            seed,
        };
        let table = synth_table(&spec)?;
        let sets = planted_sets(&spec);
        if seed == 0 {
            for (lang, set) in &sets {
                println!("{lang}: {set:?}");
            }
        }
        let mut line = format!("seed {seed}:");
        for (k, mode) in modes.into_iter().enumerate() {
            let a = assemble(&sets, &table, mode, None)?;
            let f1 = loso_cv(&a.table, &cfg)?.metrics.mean_weighted_f1;
            totals[k] += f1;
            line += &format!("  {} {f1:5.1}", mode.name());
        }
        println!("{line}");
    }
    for (k, mode) in modes.into_iter().enumerate() {
        println!("mean weighted F1 {:<13} {:5.1}", mode.name(), totals[k] / seeds as f64);
    }
    Ok(())
}
