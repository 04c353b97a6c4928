use serde::{Deserialize, Serialize};

use super::linear::{alpha_grid, alpha_max, apply, elastic_net_path, standardize};
use super::{check_shape, group_folds, FeatureDiagnostic, SelectionResult};
use crate::error::{Error, Result};
use crate::trees::DataMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenalizedConfig {
    /// Explicit penalty grid; generated from the data when empty.
    pub alphas: Vec<f64>,
    pub n_alphas: usize,
    pub eps: f64,
    pub l1_ratios: Vec<f64>,
    /// Minimum |coefficient| (standardized scale) counted as selected.
    pub coef_threshold: f64,
}

impl Default for PenalizedConfig {
    fn default() -> Self {
        Self {
            alphas: Vec::new(),
            n_alphas: 50,
            eps: 1e-3,
            l1_ratios: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            coef_threshold: 0.001,
        }
    }
}

/// Cross-validated penalized regression shared by Lasso and Elastic Net.
fn penalized_select(
    method: &str,
    x: &DataMatrix,
    y: &[f64],
    groups: &[String],
    ratios: &[f64],
    cfg: &PenalizedConfig,
) -> Result<SelectionResult> {
    check_shape(x.n_rows(), y.len(), Some(groups.len()))?;
    if ratios.is_empty() || ratios.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::Config("l1 ratios must lie in (0, 1]".into()));
    }
    let all: Vec<usize> = (0..x.n_rows()).collect();
    let full = standardize(x, &all);
    let mut diagnostics: Vec<FeatureDiagnostic> =
        x.names().iter().map(|n| FeatureDiagnostic::named(n)).collect();
    let keep: Vec<usize> = (0..x.n_cols())
        .filter(|&j| {
            let ok = full.scales[j] > 0.0;
            if !ok {
                log::warn!("{method}: dropping constant column {:?}", x.names()[j]);
                diagnostics[j].note = Some("constant column dropped".into());
            }
            ok
        })
        .collect();
    let folds = group_folds(groups);
    if folds.len() < 2 {
        return Err(Error::Precondition(format!("{method}: need at least 2 speakers")));
    }
    let kept_cols: Vec<Vec<f64>> = keep.iter().map(|&j| full.cols[j].clone()).collect();

    // (ratio, alpha grid, per-fold paths)
    let mut best: Option<(f64, usize, usize)> = None;
    let mut fits = Vec::new();
    for (ri, &ratio) in ratios.iter().enumerate() {
        let alphas = if cfg.alphas.is_empty() {
            alpha_grid(alpha_max(&kept_cols, y, ratio).max(1e-12), cfg.n_alphas, cfg.eps)
        } else {
            let mut a = cfg.alphas.clone();
            a.sort_by(|p, q| q.total_cmp(p));
            a
        };
        let mut mse = vec![0.0; alphas.len()];
        let mut paths = Vec::with_capacity(folds.len());
        for (train, test) in &folds {
            let st = standardize(x, train);
            let tr_cols: Vec<Vec<f64>> = keep.iter().map(|&j| st.cols[j].clone()).collect();
            let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let path = elastic_net_path(&tr_cols, &ytr, &alphas, ratio);
            let te_cols: Vec<Vec<f64>> = keep
                .iter()
                .map(|&j| apply(x.column(j), test, st.means[j], st.scales[j]))
                .collect();
            for (k, (b, b0)) in path.coefs.iter().zip(&path.intercepts).enumerate() {
                let err: f64 = test
                    .iter()
                    .enumerate()
                    .map(|(r, &i)| {
                        let fit = b0 + b.iter().zip(&te_cols).map(|(bj, c)| bj * c[r]).sum::<f64>();
                        (y[i] - fit).powi(2)
                    })
                    .sum::<f64>()
                    / test.len() as f64;
                mse[k] += err / folds.len() as f64;
            }
            paths.push(path);
        }
        for (k, &m) in mse.iter().enumerate() {
            if best.is_none_or(|b| m < b.0) {
                best = Some((m, ri, k));
            }
        }
        fits.push((alphas, paths));
    }
    let (cv_mse, ri, ai) = best.expect("non-empty grid");
    let (alphas, paths) = &fits[ri];
    let mut selected_mask = vec![true; keep.len()];
    let mut mean_coef = vec![0.0; keep.len()];
    for p in paths {
        for (m, (s, c)) in selected_mask.iter_mut().zip(mean_coef.iter_mut()).enumerate() {
            let v = p.coefs[ai][m];
            *s &= v.abs() > cfg.coef_threshold;
            *c += v / paths.len() as f64;
        }
    }
    let mut selected = Vec::new();
    for (m, &j) in keep.iter().enumerate() {
        diagnostics[j].coefficient = Some(mean_coef[m]);
        if selected_mask[m] {
            selected.push(x.names()[j].clone());
        }
    }
    Ok(SelectionResult {
        method: method.to_string(),
        selected,
        diagnostics,
        curve: Vec::new(),
        chosen: vec![
            ("l1_ratio".into(), ratios[ri]),
            ("alpha".into(), alphas[ai]),
            ("cv_mse".into(), cv_mse),
        ],
    })
}

/// Lasso with leave-one-speaker-out CV. Features whose coefficient exceeds
/// the threshold in every fold at the CV-chosen penalty are selected.
pub fn lasso_select(
    x: &DataMatrix,
    y: &[f64],
    groups: &[String],
    cfg: &PenalizedConfig,
) -> Result<SelectionResult> {
    penalized_select("lasso", x, y, groups, &[1.0], cfg)
}

/// Elastic Net: (ratio, penalty) fixed jointly by pooled CV error, then the
/// per-fold coefficient rule of [`lasso_select`].
pub fn elastic_net_select(
    x: &DataMatrix,
    y: &[f64],
    groups: &[String],
    cfg: &PenalizedConfig,
) -> Result<SelectionResult> {
    penalized_select("elastic_net", x, y, groups, &cfg.l1_ratios, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn groups(n: usize, speakers: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{}", i % speakers)).collect()
    }

    fn table(seed: u64, n: usize) -> (DataMatrix, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..4) as f64).collect();
        let good: Vec<f64> = y.iter().map(|v| v + 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
        let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        (
            DataMatrix::from_columns(vec!["good".into(), "noise".into()], vec![good, noise]).unwrap(),
            y,
        )
    }

    #[test]
    fn noise_rarely_selected() {
        let mut hits = 0;
        let cfg = PenalizedConfig {
            alphas: vec![0.05],
            ..Default::default()
        };
        for seed in 0..40 {
            let (x, y) = table(seed, 80);
            let r = lasso_select(&x, &y, &groups(80, 8), &cfg).unwrap();
            assert!(r.selected.contains(&"good".to_string()));
            hits += usize::from(r.selected.contains(&"noise".to_string()));
        }
        assert!(hits <= 2, "noise selected in {hits}/40");
    }

    #[test]
    fn huge_penalty_selects_nothing() {
        let (x, y) = table(1, 60);
        let cfg = PenalizedConfig {
            alphas: vec![1e6],
            ..Default::default()
        };
        assert!(lasso_select(&x, &y, &groups(60, 6), &cfg).unwrap().selected.is_empty());
    }

    #[test]
    fn ratio_one_is_lasso() {
        let (x, y) = table(2, 60);
        let g = groups(60, 6);
        let cfg = PenalizedConfig {
            l1_ratios: vec![1.0],
            ..Default::default()
        };
        let a = lasso_select(&x, &y, &g, &cfg).unwrap();
        let b = elastic_net_select(&x, &y, &g, &cfg).unwrap();
        assert_eq!(a.selected, b.selected);
        assert_eq!(a.diagnostics, b.diagnostics);
    }

    #[test]
    fn grouping_effect() {
        let (x, y) = table(3, 80);
        let twin = x.column(0).to_vec();
        let x2 = DataMatrix::from_columns(
            vec!["a".into(), "b".into()],
            vec![x.column(0).to_vec(), twin],
        )
        .unwrap();
        let cfg = PenalizedConfig {
            l1_ratios: vec![0.1],
            ..Default::default()
        };
        let r = elastic_net_select(&x2, &y, &groups(80, 8), &cfg).unwrap();
        assert_eq!(r.selected.len(), 2);
        let c: Vec<f64> = r.diagnostics.iter().map(|d| d.coefficient.unwrap()).collect();
        assert!((c[0] - c[1]).abs() < 1e-3 * c[0].abs(), "{c:?}");
    }

    #[test]
    fn constant_column_dropped() {
        let (x, y) = table(4, 40);
        let x3 = DataMatrix::from_columns(
            vec!["good".into(), "flat".into()],
            vec![x.column(0).to_vec(), vec![1.0; 40]],
        )
        .unwrap();
        let r = lasso_select(&x3, &y, &groups(40, 4), &PenalizedConfig::default()).unwrap();
        assert!(r.diagnostics[1].note.is_some());
        assert!(!r.selected.contains(&"flat".to_string()));
    }

    #[test]
    fn order_of_unrelated_features_does_not_matter() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let (x, y) = table(5, 80);
        let n1: Vec<f64> = (0..80).map(|_| rng.sample(StandardNormal)).collect();
        let n2: Vec<f64> = (0..80).map(|_| rng.sample(StandardNormal)).collect();
        let good = x.column(0).to_vec();
        let g = groups(80, 8);
        let a = DataMatrix::from_columns(
            vec!["good".into(), "dup".into(), "n1".into(), "n2".into()],
            vec![good.clone(), good.clone(), n1.clone(), n2.clone()],
        )
        .unwrap();
        let b = DataMatrix::from_columns(
            vec!["good".into(), "dup".into(), "n2".into(), "n1".into()],
            vec![good.clone(), good, n2, n1],
        )
        .unwrap();
        let cfg = PenalizedConfig::default();
        let mut sa = lasso_select(&a, &y, &g, &cfg).unwrap().selected;
        let mut sb = lasso_select(&b, &y, &g, &cfg).unwrap().selected;
        sa.sort();
        sb.sort();
        assert_eq!(sa, sb);
    }
}
