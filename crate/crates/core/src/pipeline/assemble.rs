use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FeatureTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AssemblyMode {
    /// Features shared by every language, all cells kept.
    Intersection,
    /// Every language's features, all cells kept.
    Union,
    /// Every language's features, cells blanked where the row's language
    /// did not select the feature.
    Proposed,
    /// One language's rows and features.
    Monolingual,
}

impl AssemblyMode {
    pub const ALL: [AssemblyMode; 4] = [
        AssemblyMode::Intersection,
        AssemblyMode::Union,
        AssemblyMode::Proposed,
        AssemblyMode::Monolingual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AssemblyMode::Intersection => "INTERSECTION",
            AssemblyMode::Union => "UNION",
            AssemblyMode::Proposed => "PROPOSED",
            AssemblyMode::Monolingual => "MONOLINGUAL",
        }
    }
}

impl fmt::Display for AssemblyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AssemblyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown assembly mode {s:?}")))
    }
}

/// Per-language selected feature names.
pub type FeatureSets = BTreeMap<String, Vec<String>>;

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledTable {
    pub mode: AssemblyMode,
    pub table: FeatureTable,
}

/// Builds the training table for one assembly mode. Columns keep their order
/// in `table`.
pub fn assemble(
    sets: &FeatureSets,
    table: &FeatureTable,
    mode: AssemblyMode,
    language: Option<&str>,
) -> Result<AssembledTable> {
    if sets.is_empty() {
        return Err(Error::InvalidData("no per-language feature sets".into()));
    }
    if let Some((l, _)) = sets.iter().find(|(_, f)| f.is_empty()) {
        return Err(Error::InvalidData(format!("feature set for language {l:?} is empty")));
    }
    let member: BTreeMap<&str, BTreeSet<&str>> = sets
        .iter()
        .map(|(l, f)| (l.as_str(), f.iter().map(String::as_str).collect()))
        .collect();
    for f in member.values().flatten() {
        if table.features.index_of(f).is_none() {
            return Err(Error::Schema(format!("feature {f:?} not in the table")));
        }
    }
    let keep_cols = |wanted: &dyn Fn(&str) -> bool| -> Vec<usize> {
        (0..table.features.n_cols()).filter(|&j| wanted(&table.features.names()[j])).collect()
    };

    let out = match mode {
        AssemblyMode::Monolingual => {
            let l = language
                .ok_or_else(|| Error::Config("monolingual assembly needs a language".into()))?;
            let f = member
                .get(l)
                .ok_or_else(|| Error::Lookup(format!("no feature set for language {l:?}")))?;
            let rows: Vec<usize> = (0..table.n_rows()).filter(|&i| table.languages[i] == l).collect();
            let t = table.select_rows(&rows);
            let cols = keep_cols(&|n| f.contains(n));
            t.with_features(t.features.select_columns(&cols))?
        }
        _ => {
            for l in &table.languages {
                if !member.contains_key(l.as_str()) {
                    return Err(Error::Lookup(format!("no feature set for language {l:?}")));
                }
            }
            if mode == AssemblyMode::Intersection {
                let mut seen = Vec::new();
                let mut common: Option<BTreeSet<&str>> = None;
                for (l, f) in &member {
                    seen.push(*l);
                    let c = match common {
                        None => f.clone(),
                        Some(c) => c.intersection(f).copied().collect(),
                    };
                    if c.is_empty() {
                        return Err(Error::InvalidData(format!(
                            "empty feature intersection across languages {}",
                            seen.join(", ")
                        )));
                    }
                    common = Some(c);
                }
                let common = common.unwrap_or_default();
                let cols = keep_cols(&|n| common.contains(n));
                table.with_features(table.features.select_columns(&cols))?
            } else {
                let cols = keep_cols(&|n| member.values().any(|f| f.contains(n)));
                let mut m = table.features.select_columns(&cols);
                if mode == AssemblyMode::Proposed {
                    for j in 0..m.n_cols() {
                        let name = m.names()[j].clone();
                        for (i, v) in m.column_mut(j).iter_mut().enumerate() {
                            if !member[table.languages[i].as_str()].contains(name.as_str()) {
                                *v = f64::NAN;
                            }
                        }
                    }
                }
                table.with_features(m)?
            }
        }
    };
    Ok(AssembledTable { mode, table: out })
}
