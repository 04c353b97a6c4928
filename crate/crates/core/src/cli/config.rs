use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::biomarkers::{Direction, ExtractionSettings};
use crate::error::{Error, Result};
use crate::gop::{GopMethod, Normalization};
use crate::pipeline::{AssemblyMode, CvConfig, SynthSpec};
use crate::selection::{ClusterConfig, EmbeddedRule, PenalizedConfig, WrapperConfig};

/// Everything a run depends on. Loaded from a TOML file, then overridden by
/// command-line flags; the resolved value is echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed propagated to every seeded component when given on the command line.
    pub seed: u64,
    /// Worker threads for per-utterance work; 0 uses every core.
    pub jobs: usize,
    pub extract: ExtractConfig,
    pub gop: GopRunConfig,
    pub validate: ValidateConfig,
    pub select: SelectConfig,
    pub train_eval: TrainEvalConfig,
    pub synth: SynthSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            jobs: 1,
            extract: ExtractConfig::default(),
            gop: GopRunConfig::default(),
            validate: ValidateConfig::default(),
            select: SelectConfig::default(),
            train_eval: TrainEvalConfig::default(),
            synth: SynthSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    pub settings: ExtractionSettings,
    /// Language code to inventory TOML file. Languages not listed fall back
    /// to the built-in inventories (en, ko, ta).
    pub inventories: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GopRunConfig {
    /// Temperature used by the SCALE normalization.
    pub temperature: f64,
    /// Per-language class priors in logit-label order. Languages without an
    /// entry use smoothed segment-label frame frequencies of the corpus.
    pub priors: BTreeMap<String, Vec<f64>>,
    /// Pseudo-count added to every class when estimating priors.
    pub prior_smoothing: f64,
    /// Method and normalization used for the per-phoneme ranking.
    pub ranking_method: GopMethod,
    pub ranking_normalization: Normalization,
    /// Minimum utterances containing a label for it to be ranked.
    pub min_support: usize,
}

impl Default for GopRunConfig {
    fn default() -> Self {
        Self {
            temperature: 2.0,
            priors: BTreeMap::new(),
            prior_smoothing: 1.0,
            ranking_method: GopMethod::MaxLogit,
            ranking_normalization: Normalization::Prior,
            min_support: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    /// Expected directions for features outside the registry, or overrides.
    pub directions: BTreeMap<String, Direction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SelectMethod {
    Lasso,
    #[value(name = "elastic_net", alias = "elastic-net")]
    ElasticNet,
    Cluster,
    Filter,
    Rfe,
    Embedded,
    Iterative,
}

impl SelectMethod {
    pub fn name(self) -> &'static str {
        match self {
            SelectMethod::Lasso => "lasso",
            SelectMethod::ElasticNet => "elastic_net",
            SelectMethod::Cluster => "cluster",
            SelectMethod::Filter => "filter",
            SelectMethod::Rfe => "rfe",
            SelectMethod::Embedded => "embedded",
            SelectMethod::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectConfig {
    pub method: Option<SelectMethod>,
    /// Restrict selection to one language's rows.
    pub language: Option<String>,
    pub penalized: PenalizedConfig,
    pub cluster: ClusterConfig,
    /// Filter, RFE, embedded and iterative settings.
    pub wrapper: WrapperConfig,
    pub embedded_rule: EmbeddedRule,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            method: None,
            language: None,
            penalized: PenalizedConfig::default(),
            cluster: ClusterConfig::default(),
            wrapper: WrapperConfig::default(),
            embedded_rule: EmbeddedRule::AboveMean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainEvalConfig {
    pub mode: AssemblyMode,
    /// Language for MONOLINGUAL runs.
    pub language: Option<String>,
    /// Language code to feature-set file (one feature per line).
    pub feature_sets: BTreeMap<String, PathBuf>,
    pub cv: CvConfig,
}

impl Default for TrainEvalConfig {
    fn default() -> Self {
        Self {
            mode: AssemblyMode::Proposed,
            language: None,
            feature_sets: BTreeMap::new(),
            cv: CvConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses TOML; relative paths inside resolve against `base`.
    pub fn from_toml_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        if let Some(base) = base {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            cfg.extract.inventories.values_mut().for_each(fix);
            cfg.train_eval.feature_sets.values_mut().for_each(fix);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path.parent())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    /// Applies a command-line seed to every seeded component.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.synth.seed = seed;
        self.select.cluster.seed = seed;
        self.select.cluster.forest.seed = seed;
        self.select.wrapper.forest.seed = seed;
    }
}
