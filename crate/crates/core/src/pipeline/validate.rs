use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::biomarkers::Direction;
use crate::error::{Error, Result};
use crate::stats::{kendall_tau, kruskal_wallis};
use crate::trees::DataMatrix;

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// A test was not significant.
    X,
    /// Significant, but against the expected direction.
    Triangle,
    /// Significant and in the expected direction.
    O,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::X => "X",
            Status::Triangle => "TRIANGLE",
            Status::O => "O",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub feature: String,
    pub n: usize,
    pub h: Option<f64>,
    pub h_p: Option<f64>,
    pub tau: Option<f64>,
    pub tau_p: Option<f64>,
    pub direction: Direction,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Kruskal-Wallis across severity groups and Kendall tau against severity,
/// then the expected-direction check. Missing cells are skipped per feature.
pub fn validate_features(
    x: &DataMatrix,
    severity: &[usize],
    directions: &BTreeMap<String, Direction>,
) -> Result<Vec<ValidationRow>> {
    if x.n_rows() != severity.len() {
        return Err(Error::Schema(format!(
            "{} rows for {} labels",
            x.n_rows(),
            severity.len()
        )));
    }
    let mut levels: Vec<usize> = severity.to_vec();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() < 2 {
        return Err(Error::Precondition("validation needs at least 2 severity groups".into()));
    }
    let mut rows = Vec::with_capacity(x.n_cols());
    for (j, name) in x.names().iter().enumerate() {
        let direction = *directions
            .get(name)
            .ok_or_else(|| Error::Config(format!("no expected direction for {name:?}")))?;
        let (v, s): (Vec<f64>, Vec<f64>) = x
            .column(j)
            .iter()
            .zip(severity)
            .filter(|(v, _)| !v.is_nan())
            .map(|(v, &s)| (*v, s as f64))
            .unzip();
        let mut row = ValidationRow {
            feature: name.clone(),
            n: v.len(),
            h: None,
            h_p: None,
            tau: None,
            tau_p: None,
            direction,
            status: Status::X,
            note: None,
        };
        let groups: Vec<Vec<f64>> = levels
            .iter()
            .map(|&l| v.iter().zip(&s).filter(|(_, &g)| g == l as f64).map(|(a, _)| *a).collect())
            .filter(|g: &Vec<f64>| !g.is_empty())
            .collect();
        let kw = kruskal_wallis(&groups);
        let kt = kendall_tau(&v, &s);
        match (&kw, &kt) {
            (Ok(k), Ok(t)) => {
                row.h = Some(k.h).filter(|h| h.is_finite());
                row.h_p = Some(k.p_value).filter(|p| p.is_finite());
                row.tau = Some(t.coefficient);
                row.tau_p = Some(t.p_value);
                let significant = row.h_p.is_some_and(|p| p < SIGNIFICANCE) && t.p_value < SIGNIFICANCE;
                row.status = if !significant {
                    Status::X
                } else if match direction {
                    Direction::Up => t.coefficient > 0.0,
                    Direction::Down => t.coefficient < 0.0,
                    Direction::Either => true,
                } {
                    Status::O
                } else {
                    Status::Triangle
                };
            }
            _ => {
                let msg = kt
                    .as_ref()
                    .err()
                    .or(kw.as_ref().err())
                    .map(ToString::to_string)
                    .unwrap_or_default();
                row.note = Some(msg);
            }
        }
        rows.push(row);
    }
    Ok(rows)
}
