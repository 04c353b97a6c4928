use serde::{Deserialize, Serialize};

use super::{check_shape, FeatureDiagnostic, SelectionResult};
use crate::error::Result;
use crate::stats::spearman_matrix;
use crate::trees::{permutation_importance, DataMatrix, ExtraTrees, ForestParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    /// Ward merge height at which the dendrogram is cut.
    pub threshold: f64,
    pub forest: ForestParams,
    pub n_repeats: usize,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            forest: ForestParams::default(),
            n_repeats: 5,
            seed: 0,
        }
    }
}

/// One agglomeration step. Leaves are `0..n`; the cluster formed at step `k`
/// gets id `n + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
}

/// Ward agglomeration on a symmetric distance matrix using the
/// Lance-Williams update. Ties go to the pair with the smallest ids.
pub fn ward_linkage(dist: &[Vec<f64>]) -> Vec<Merge> {
    let n = dist.len();
    let total = 2 * n.max(1) - 1;
    let mut d = vec![vec![f64::INFINITY; total]; total];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = dist[i][j];
        }
    }
    let mut size = vec![0usize; total];
    size[..n].fill(1);
    let mut active: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut best = (f64::INFINITY, 0, 0);
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                if d[i][j] < best.0 {
                    best = (d[i][j], i, j);
                }
            }
        }
        let (h, s, t) = best;
        let new = n + step;
        size[new] = size[s] + size[t];
        active.retain(|&k| k != s && k != t);
        for &v in &active {
            let tot = (size[v] + size[s] + size[t]) as f64;
            let val = ((size[v] + size[s]) as f64 / tot * d[v][s].powi(2)
                + (size[v] + size[t]) as f64 / tot * d[v][t].powi(2)
                - size[v] as f64 / tot * h.powi(2))
            .max(0.0)
            .sqrt();
            d[v][new] = val;
            d[new][v] = val;
        }
        active.push(new);
        out.push(Merge {
            a: s,
            b: t,
            distance: h,
            size: size[new],
        });
    }
    out
}

/// Flat cluster label per leaf after applying merges with height ≤ `t`.
/// Labels are numbered by first leaf occurrence.
pub(crate) fn cut(n: usize, merges: &[Merge], t: f64) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..2 * n.max(1) - 1).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (k, m) in merges.iter().enumerate() {
        if m.distance <= t {
            let new = n + k;
            let ra = find(&mut parent, m.a);
            let rb = find(&mut parent, m.b);
            parent[ra] = new;
            parent[rb] = new;
        } else {
            // later merges are at least as high
            break;
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let pos = roots.iter().position(|&x| x == r).unwrap_or_else(|| {
            roots.push(r);
            roots.len() - 1
        });
        labels[i] = pos;
    }
    labels
}

/// Ward clustering of features on `1 − |ρ|` (Spearman), keeping per cluster
/// the feature with the highest forest permutation importance.
pub fn cluster_select(x: &DataMatrix, y: &[usize], cfg: &ClusterConfig) -> Result<SelectionResult> {
    check_shape(x.n_rows(), y.len(), None)?;
    let p = x.n_cols();
    let names = x.names();
    if p <= 1 {
        return Ok(SelectionResult {
            method: "cluster".into(),
            selected: names.to_vec(),
            diagnostics: names
                .iter()
                .map(|n| FeatureDiagnostic {
                    cluster: Some(0),
                    ..FeatureDiagnostic::named(n)
                })
                .collect(),
            curve: Vec::new(),
            chosen: vec![("threshold".into(), cfg.threshold)],
        });
    }
    let rho = spearman_matrix(x.columns());
    let dist: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| if i == j { 0.0 } else { 1.0 - rho[i][j].map_or(0.0, f64::abs) })
                .collect()
        })
        .collect();
    let merges = ward_linkage(&dist);
    let labels = cut(p, &merges, cfg.threshold);
    let n_classes = y.iter().max().map_or(1, |m| m + 1);
    let forest = ExtraTrees::train(x, y, n_classes, &cfg.forest)?;
    let imp = permutation_importance(&forest, x, y, cfg.n_repeats, cfg.seed)?;
    let n_clusters = labels.iter().max().map_or(0, |m| m + 1);
    let mut rep = vec![usize::MAX; n_clusters];
    for j in 0..p {
        let c = labels[j];
        if rep[c] == usize::MAX || imp[j] > imp[rep[c]] {
            rep[c] = j;
        }
    }
    let selected = (0..p)
        .filter(|j| rep.contains(j))
        .map(|j| names[j].clone())
        .collect();
    let diagnostics = (0..p)
        .map(|j| FeatureDiagnostic {
            cluster: Some(labels[j]),
            importance: Some(imp[j]),
            ..FeatureDiagnostic::named(&names[j])
        })
        .collect();
    Ok(SelectionResult {
        method: "cluster".into(),
        selected,
        diagnostics,
        curve: Vec::new(),
        chosen: vec![("threshold".into(), cfg.threshold)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn hand_traced_ward() {
        // points on a line at 0, 1, 5, 7; Ward heights from pairwise distances
        let pts = [0.0f64, 1.0, 5.0, 7.0];
        let dist: Vec<Vec<f64>> = pts.iter().map(|a| pts.iter().map(|b| (a - b).abs()).collect()).collect();
        let m = ward_linkage(&dist);
        // step 1: {0,1} at 1
        assert_eq!((m[0].a, m[0].b, m[0].distance), (0, 1, 1.0));
        // step 2: {2,3} at 2
        assert_eq!((m[1].a, m[1].b, m[1].distance), (2, 3, 2.0));
        // step 3, by hand:
        // d({2},{0,1})² = (2/3)·25 + (2/3)·16 − (1/3)·1 = 27
        // d({3},{0,1})² = (2/3)·49 + (2/3)·36 − (1/3)·1 = 56.33…
        // d({0,1},{2,3})² = (3/4)·27 + (3/4)·56.33… − (2/4)·4 = 60.5
        assert_eq!((m[2].a, m[2].b), (4, 5));
        assert!((m[2].distance - 60.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(cut(4, &m, 1.5), vec![0, 0, 1, 2]);
    }

    #[test]
    fn twins_collapse() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let n = 120;
        let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let a: Vec<f64> = y.iter().map(|&c| c as f64 + rng.gen_range(-0.6..0.6)).collect();
        let b = a.clone();
        let c: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let x = DataMatrix::from_columns(vec!["a".into(), "b".into(), "c".into()], vec![a, b, c]).unwrap();
        let cfg = ClusterConfig {
            forest: ForestParams { n_trees: 20, ..Default::default() },
            ..Default::default()
        };
        let r = cluster_select(&x, &y, &cfg).unwrap();
        assert_eq!(r.selected.len(), 2);
        assert!(r.selected.contains(&"c".to_string()));
    }

    #[test]
    fn independent_columns_all_kept() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let n = 300;
        let cols: Vec<Vec<f64>> = (0..5).map(|_| (0..n).map(|_| rng.gen()).collect()).collect();
        let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let x = DataMatrix::from_columns((0..5).map(|k| format!("f{k}")).collect(), cols).unwrap();
        let cfg = ClusterConfig {
            forest: ForestParams { n_trees: 5, ..Default::default() },
            ..Default::default()
        };
        assert_eq!(cluster_select(&x, &y, &cfg).unwrap().selected.len(), 5);
    }

    #[test]
    fn single_feature() {
        let x = DataMatrix::from_columns(vec!["a".into()], vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(cluster_select(&x, &[0, 1], &ClusterConfig::default()).unwrap().selected, vec!["a"]);
    }
}
