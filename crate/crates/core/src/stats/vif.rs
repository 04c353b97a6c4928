use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Upper bound reported for perfectly collinear features.
pub const VIF_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VifResult {
    pub value: f64,
    /// Set when the value hit the cap (degenerate design).
    pub capped: bool,
}

fn complete_rows(columns: &[Vec<f64>]) -> Vec<usize> {
    let n = columns.first().map_or(0, Vec::len);
    (0..n)
        .filter(|&r| columns.iter().all(|c| c[r].is_finite()))
        .collect()
}

/// Variance inflation factor of `columns[target]` regressed on all other
/// columns (with intercept), over complete-case rows.
pub fn vif(columns: &[Vec<f64>], target: usize) -> Result<VifResult> {
    let p = columns.len();
    if target >= p {
        return Err(Error::Precondition(format!("vif: no column {target}")));
    }
    if p < 3 {
        return Err(Error::Precondition("vif: need at least 2 other features".into()));
    }
    let rows = complete_rows(columns);
    if rows.len() < p + 2 {
        return Err(Error::Precondition(format!(
            "vif: {} complete rows, need {}",
            rows.len(),
            p + 2
        )));
    }
    Ok(vif_on_rows(columns, target, &rows))
}

fn vif_on_rows(columns: &[Vec<f64>], target: usize, rows: &[usize]) -> VifResult {
    let p = columns.len();
    let n = rows.len();
    let y = DVector::from_iterator(n, rows.iter().map(|&r| columns[target][r]));
    let mean = y.mean();
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if !(sst > 0.0) {
        return VifResult {
            value: VIF_CAP,
            capped: true,
        };
    }
    let mut x = DMatrix::<f64>::zeros(n, p);
    for (i, &r) in rows.iter().enumerate() {
        x[(i, 0)] = 1.0;
        let mut k = 1;
        for (c, col) in columns.iter().enumerate() {
            if c != target {
                x[(i, k)] = col[r];
                k += 1;
            }
        }
    }
    // centre and scale predictors for conditioning
    for k in 1..p {
        let col = x.column(k);
        let m = col.mean();
        let s = col.iter().map(|v| (v - m).powi(2)).sum::<f64>().sqrt();
        let s = if s > 0.0 { s } else { 1.0 };
        for i in 0..n {
            x[(i, k)] = (x[(i, k)] - m) / s;
        }
    }
    let svd = x.clone().svd(true, true);
    let beta = svd.solve(&y, 1e-12).expect("svd computed with U and V");
    let resid = &y - &x * beta;
    let sse: f64 = resid.iter().map(|v| v * v).sum();
    let r2 = 1.0 - sse / sst;
    let value = 1.0 / (1.0 - r2);
    if !value.is_finite() || value > VIF_CAP || value < 0.0 {
        VifResult {
            value: VIF_CAP,
            capped: true,
        }
    } else {
        VifResult {
            value: value.max(1.0),
            capped: false,
        }
    }
}

/// VIF of every column over the rows complete in all columns.
pub fn vif_all(columns: &[Vec<f64>]) -> Result<Vec<VifResult>> {
    let p = columns.len();
    if p < 3 {
        return Err(Error::Precondition("vif: need at least 3 features".into()));
    }
    let rows = complete_rows(columns);
    if rows.len() < p + 2 {
        return Err(Error::Precondition(format!(
            "vif: {} complete rows, need {}",
            rows.len(),
            p + 2
        )));
    }
    Ok((0..p).map(|t| vif_on_rows(columns, t, &rows)).collect())
}
