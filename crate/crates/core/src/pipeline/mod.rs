//! Dataset handling and the multilingual severity-classification workflow:
//! manifests, feature tables, the healthy-distance transform, two-test
//! feature validation, per-language table assembly, leave-one-speaker-out
//! evaluation, and synthetic corpora.

mod assemble;
mod cv;
mod dataset;
mod synth;
mod table;
mod transform;
mod validate;

pub use assemble::{assemble, AssembledTable, AssemblyMode, FeatureSets};
pub use cv::{fit_final, loso_cv, metrics, weighted_f1, CvConfig, CvReport, Metrics, SpeakerResult};
pub use dataset::{DatasetManifest, Sex, Utterance, MANIFEST_HEADER, N_SEVERITIES};
pub use synth::{planted_sets, synth_corpus, synth_table, PlantedFeature, SeverityEffects, SynthSpec, TableSpec};
pub use table::{FeatureTable, KEY_COLUMNS, NA};
pub use transform::{distance_transform, distance_value, HealthyStats};
pub use validate::{validate_features, Status, ValidationRow, SIGNIFICANCE};
