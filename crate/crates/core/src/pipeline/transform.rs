use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FeatureTable;
use crate::error::{Error, Result};

/// Healthy-control mean and population std per (language, feature).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HealthyStats {
    pub stats: BTreeMap<(String, String), (f64, f64)>,
}

impl HealthyStats {
    /// Uses only severity-0 rows. A pair with no healthy value is absent.
    pub fn fit(table: &FeatureTable) -> Self {
        let mut acc: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for (j, name) in table.features.names().iter().enumerate() {
            let col = table.features.column(j);
            for i in 0..table.n_rows() {
                if table.severities[i] == 0 && !col[i].is_nan() {
                    acc.entry((table.languages[i].clone(), name.clone())).or_default().push(col[i]);
                }
            }
        }
        let stats = acc
            .into_iter()
            .filter_map(|(k, v)| Some((k, mean_std(&v)?)))
            .collect();
        Self { stats }
    }

    /// [`fit`](Self::fit), then pairs with no healthy value for the given
    /// languages fall back to that language's rows of any severity, then to
    /// every row. Pairs with no present value at all stay absent.
    pub fn fit_with_fallback<'a>(table: &FeatureTable, languages: impl IntoIterator<Item = &'a String>) -> Self {
        let mut st = Self::fit(table);
        let mut langs: Vec<String> = table.languages.clone();
        langs.extend(languages.into_iter().cloned());
        langs.sort();
        langs.dedup();
        for (j, name) in table.features.names().iter().enumerate() {
            let col = table.features.column(j);
            for lang in &langs {
                let key = (lang.clone(), name.clone());
                if st.stats.contains_key(&key) {
                    continue;
                }
                let mut v: Vec<f64> = (0..table.n_rows())
                    .filter(|&i| &table.languages[i] == lang && !col[i].is_nan())
                    .map(|i| col[i])
                    .collect();
                if v.is_empty() {
                    v = col.iter().copied().filter(|x| !x.is_nan()).collect();
                }
                if let Some(ms) = mean_std(&v) {
                    st.stats.insert(key, ms);
                }
            }
        }
        st
    }

    pub fn get(&self, language: &str, feature: &str) -> Option<(f64, f64)> {
        self.stats.get(&(language.to_string(), feature.to_string())).copied()
    }
}

fn mean_std(v: &[f64]) -> Option<(f64, f64)> {
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    Some((m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt()))
}

/// Inverse distance from the healthy mean in units of the healthy std:
/// 1 within one std, `σ/|f − μ|` beyond. With `σ = 0` the value is 1 at
/// `f = μ` and 0 elsewhere.
pub fn distance_value(f: f64, mean: f64, std: f64) -> f64 {
    let d = (f - mean).abs();
    if std == 0.0 {
        return if d == 0.0 { 1.0 } else { 0.0 };
    }
    if d > std {
        std / d
    } else {
        1.0
    }
}

/// Applies [`distance_value`] to every present cell; missing stays missing.
pub fn distance_transform(table: &FeatureTable, stats: &HealthyStats) -> Result<FeatureTable> {
    let mut out = table.features.clone();
    for j in 0..out.n_cols() {
        let name = out.names()[j].clone();
        let col = out.column_mut(j);
        for (i, v) in col.iter_mut().enumerate() {
            if v.is_nan() {
                continue;
            }
            let lang = &table.languages[i];
            let (m, s) = stats.get(lang, &name).ok_or_else(|| {
                Error::Lookup(format!("no healthy statistics for ({lang}, {name})"))
            })?;
            *v = distance_value(*v, m, s);
        }
    }
    table.with_features(out)
}
