//! Feature selection: collinearity reduction (Lasso, Elastic Net, Ward
//! clustering) followed by filter, wrapper and embedded selectors, plus the
//! gain-based iterative elimination used by the multilingual pipeline.

mod cluster;
mod linear;
mod penalized;
mod wrapper;

pub use cluster::{cluster_select, ward_linkage, ClusterConfig, Merge};
pub use linear::{alpha_grid, alpha_max, elastic_net_path, LinearPath};
pub use penalized::{elastic_net_select, lasso_select, PenalizedConfig};
pub use wrapper::{
    embedded_select, filter_select, iterative_gain_select, rfe_select, EmbeddedRule,
    WrapperConfig,
};

use serde::Serialize;

use crate::error::{Error, Result};

/// Per-feature evidence recorded by a selector.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FeatureDiagnostic {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub importance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl FeatureDiagnostic {
    fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub method: String,
    /// Selected names, in input column order.
    pub selected: Vec<String>,
    pub diagnostics: Vec<FeatureDiagnostic>,
    /// `(number of features, CV accuracy)` for elimination-style selectors.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub curve: Vec<(usize, f64)>,
    /// Chosen hyperparameters such as the penalty.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub chosen: Vec<(String, f64)>,
}

impl SelectionResult {
    /// One feature name per line.
    pub fn feature_set_text(&self) -> String {
        self.selected.iter().map(|s| format!("{s}\n")).collect()
    }
}

/// Parses a feature-set file: one name per line, blank lines and `#`
/// comments ignored.
pub fn parse_feature_set(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Leave-one-group-out splits in sorted group order: `(train, test)` rows.
pub fn group_folds(groups: &[String]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut keys: Vec<&String> = groups.iter().collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|g| {
            (0..groups.len()).partition::<Vec<usize>, _>(|&i| &groups[i] != g)
        })
        .collect()
}

/// Speaker-grouped k-fold: groups are assigned round-robin in sorted order.
pub fn group_kfold(groups: &[String], k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut keys: Vec<&String> = groups.iter().collect();
    keys.sort();
    keys.dedup();
    let k = k.clamp(1, keys.len().max(1));
    (0..k)
        .map(|f| {
            let held: Vec<&String> = keys.iter().enumerate().filter(|(i, _)| i % k == f).map(|(_, g)| *g).collect();
            (0..groups.len()).partition::<Vec<usize>, _>(|&i| !held.contains(&&groups[i]))
        })
        .collect()
}

fn check_shape(n_rows: usize, labels: usize, groups: Option<usize>) -> Result<()> {
    if labels != n_rows {
        return Err(Error::Schema(format!("{labels} labels for {n_rows} rows")));
    }
    if let Some(g) = groups {
        if g != n_rows {
            return Err(Error::Schema(format!("{g} group ids for {n_rows} rows")));
        }
    }
    Ok(())
}
