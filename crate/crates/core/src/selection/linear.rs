use crate::trees::DataMatrix;

/// Column-standardized copy of a design matrix with the statistics used.
#[derive(Debug, Clone)]
pub(crate) struct Standardized {
    pub cols: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

/// z-scores the given rows of `x` with population std. Missing cells are
/// replaced by the column mean of those rows (z = 0). Zero-variance columns
/// become all-zero.
pub(crate) fn standardize(x: &DataMatrix, rows: &[usize]) -> Standardized {
    let mut cols = Vec::with_capacity(x.n_cols());
    let mut means = Vec::with_capacity(x.n_cols());
    let mut scales = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let c = x.column(j);
        let present: Vec<f64> = rows.iter().map(|&i| c[i]).filter(|v| !v.is_nan()).collect();
        let m = if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        };
        let var = if present.is_empty() {
            0.0
        } else {
            present.iter().map(|v| (v - m).powi(2)).sum::<f64>() / present.len() as f64
        };
        let s = var.sqrt();
        cols.push(apply(c, rows, m, s));
        means.push(m);
        scales.push(s);
    }
    Standardized { cols, means, scales }
}

pub(crate) fn apply(c: &[f64], rows: &[usize], mean: f64, scale: f64) -> Vec<f64> {
    rows.iter()
        .map(|&i| {
            let v = c[i];
            if v.is_nan() || scale == 0.0 {
                0.0
            } else {
                (v - mean) / scale
            }
        })
        .collect()
}

/// Coefficients along a decreasing penalty grid for one mixing ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPath {
    pub l1_ratio: f64,
    pub alphas: Vec<f64>,
    /// `coefs[k]` are the standardized-scale coefficients at `alphas[k]`.
    pub coefs: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
}

/// Smallest penalty giving the all-zero solution on standardized columns.
pub fn alpha_max(cols: &[Vec<f64>], y: &[f64], l1_ratio: f64) -> f64 {
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    cols.iter()
        .map(|c| c.iter().zip(y).map(|(a, b)| a * (b - my)).sum::<f64>().abs() / n)
        .fold(0.0, f64::max)
        / l1_ratio.max(1e-3)
}

/// Geometric grid from `alpha_max` down to `alpha_max * eps`.
pub fn alpha_grid(alpha_max: f64, n: usize, eps: f64) -> Vec<f64> {
    if n == 1 {
        return vec![alpha_max];
    }
    (0..n)
        .map(|k| alpha_max * eps.powf(k as f64 / (n - 1) as f64))
        .collect()
}

fn soft(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

/// Coordinate descent for
/// `1/(2n)·‖y − b0 − Xb‖² + α·ρ·‖b‖₁ + α·(1−ρ)/2·‖b‖²`
/// with warm starts along `alphas` (expected in decreasing order).
pub fn elastic_net_path(cols: &[Vec<f64>], y: &[f64], alphas: &[f64], l1_ratio: f64) -> LinearPath {
    let p = cols.len();
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / n).collect();
    let col_means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    // centre columns so the intercept decouples
    let centred: Vec<Vec<f64>> = cols
        .iter()
        .zip(&col_means)
        .map(|(c, m)| c.iter().map(|v| v - m).collect())
        .collect();
    let cn: Vec<f64> = centred
        .iter()
        .zip(&norms)
        .zip(&col_means)
        .map(|((_, nn), m)| nn - m * m)
        .collect();
    let mut b = vec![0.0; p];
    let mut r: Vec<f64> = y.iter().map(|v| v - my).collect();
    let mut coefs = Vec::with_capacity(alphas.len());
    let mut intercepts = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let l1 = alpha * l1_ratio;
        let l2 = alpha * (1.0 - l1_ratio);
        for _ in 0..100_000 {
            let mut max_delta: f64 = 0.0;
            let mut max_b: f64 = 0.0;
            for j in 0..p {
                if cn[j] <= 0.0 {
                    continue;
                }
                let c = &centred[j];
                let old = b[j];
                let rho: f64 = c.iter().zip(&r).map(|(a, rr)| a * rr).sum::<f64>() / n + cn[j] * old;
                let new = soft(rho, l1) / (cn[j] + l2);
                if new != old {
                    let d = new - old;
                    for (ri, ci) in r.iter_mut().zip(c) {
                        *ri -= d * ci;
                    }
                    b[j] = new;
                    max_delta = max_delta.max(d.abs());
                }
                max_b = max_b.max(new.abs());
            }
            if max_delta <= 1e-10 * max_b.max(1e-12) || max_delta < 1e-12 {
                break;
            }
        }
        let b0 = my - b.iter().zip(&col_means).map(|(bj, m)| bj * m).sum::<f64>();
        coefs.push(b.clone());
        intercepts.push(b0);
    }
    LinearPath {
        l1_ratio,
        alphas: alphas.to_vec(),
        coefs,
        intercepts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn data(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let y = (0..n)
            .map(|i| 2.0 * cols[0][i] - cols[1][i] + 0.1 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        (cols, y)
    }

    #[test]
    fn tiny_penalty_matches_least_squares() {
        let (cols, y) = data(1, 60, 4);
        let path = elastic_net_path(&cols, &y, &[1e-10], 1.0);
        let n = y.len();
        let mut x = DMatrix::from_element(n, 5, 1.0);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                x[(i, j + 1)] = c[i];
            }
        }
        let beta = x.clone().svd(true, true).solve(&DVector::from_vec(y), 1e-12).unwrap();
        for j in 0..4 {
            assert!((path.coefs[0][j] - beta[j + 1]).abs() < 1e-6);
        }
        assert!((path.intercepts[0] - beta[0]).abs() < 1e-6);
    }

    #[test]
    fn kkt_conditions_hold() {
        let (cols, y) = data(2, 80, 6);
        let alpha = 0.1;
        let ratio = 0.5;
        let path = elastic_net_path(&cols, &y, &[alpha], ratio);
        let b = &path.coefs[0];
        let n = y.len() as f64;
        for j in 0..6 {
            let resid_dot: f64 = (0..y.len())
                .map(|i| {
                    let fit = path.intercepts[0] + (0..6).map(|k| b[k] * cols[k][i]).sum::<f64>();
                    cols[j][i] * (y[i] - fit)
                })
                .sum::<f64>()
                / n;
            let grad = resid_dot - alpha * (1.0 - ratio) * b[j];
            if b[j] != 0.0 {
                assert!((grad - alpha * ratio * b[j].signum()).abs() < 1e-5);
            } else {
                assert!(grad.abs() <= alpha * ratio + 1e-6);
            }
        }
    }

    #[test]
    fn l1_norm_non_increasing_in_alpha() {
        let (cols, y) = data(3, 50, 8);
        let amax = alpha_max(&cols, &y, 1.0);
        let path = elastic_net_path(&cols, &y, &alpha_grid(amax, 30, 1e-3), 1.0);
        let norms: Vec<f64> = path.coefs.iter().map(|c| c.iter().map(|v| v.abs()).sum()).collect();
        for w in norms.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        assert!(path.coefs[0].iter().all(|v| v.abs() < 1e-12));
    }
}
