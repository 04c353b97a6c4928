use super::paired;

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut j = k + 1;
        while j < idx.len() && x[idx[j]] == x[idx[k]] {
            j += 1;
        }
        let avg = (k + j + 1) as f64 / 2.0;
        for &i in &idx[k..j] {
            r[i] = avg;
        }
        k = j;
    }
    r
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman ρ over rows where both values are present.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let (a, b) = paired(x, y);
    if a.len() < 2 {
        return None;
    }
    pearson(&average_ranks(&a), &average_ranks(&b))
}

/// Symmetric Spearman matrix over columns with pairwise deletion.
pub fn spearman_matrix(columns: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    let p = columns.len();
    let mut m = vec![vec![None; p]; p];
    for i in 0..p {
        let present = columns[i].iter().filter(|v| v.is_finite()).count();
        m[i][i] = (present >= 2).then_some(1.0);
        for j in i + 1..p {
            let r = spearman(&columns[i], &columns[j]);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    m
}
