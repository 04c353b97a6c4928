use super::normal_two_sided;
use crate::error::{Error, Result};

/// A correlation coefficient with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub coefficient: f64,
    pub p_value: f64,
    pub n: usize,
}

fn pairs(t: u64) -> u64 {
    t * t.saturating_sub(1) / 2
}

/// Sizes of runs of equal values in a sorted slice.
fn tie_groups(sorted: &[f64]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < sorted.len() {
        let mut j = k + 1;
        while j < sorted.len() && sorted[j] == sorted[k] {
            j += 1;
        }
        out.push((j - k) as u64);
        k = j;
    }
    out
}

/// Merge sort counting inversions (strictly greater pairs).
fn sort_count_swaps(v: &mut Vec<f64>) -> u64 {
    let n = v.len();
    let mut buf = v.clone();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if v[j] < v[i] {
                    buf[k] = v[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + hi - j].copy_from_slice(&v[j..hi]);
            lo = hi;
        }
        std::mem::swap(v, &mut buf);
        width *= 2;
    }
    swaps
}

/// Kendall tau-b with a tie-corrected normal-approximation p-value,
/// computed in O(n log n).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::Precondition(format!(
            "kendall_tau: lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Precondition("kendall_tau: need at least 2 observations".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Precondition("kendall_tau: non-finite input".into()));
    }
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();

    let x_ties = tie_groups(&xs);
    let mut joint = 0u64;
    let mut k = 0;
    while k < n {
        let mut j = k + 1;
        while j < n && xs[j] == xs[k] && ys[j] == ys[k] {
            j += 1;
        }
        joint += pairs((j - k) as u64);
        k = j;
    }
    let swaps = sort_count_swaps(&mut ys);
    let y_ties = tie_groups(&ys);

    let n0 = pairs(n as u64);
    let n1: u64 = x_ties.iter().map(|&t| pairs(t)).sum();
    let n2: u64 = y_ties.iter().map(|&t| pairs(t)).sum();
    if n1 == n0 || n2 == n0 {
        return Err(Error::Undefined("kendall_tau: constant input".into()));
    }
    let s = n0 as i64 - n1 as i64 - n2 as i64 + joint as i64 - 2 * swaps as i64;
    let tau = tau_b(s, n0, n1, n2);
    Ok(CorrelationResult {
        coefficient: tau,
        p_value: p_value(s, n, &x_ties, &y_ties),
        n,
    })
}

/// tau-b from the concordance score and pair counts.
pub(crate) fn tau_b(s: i64, n0: u64, n1: u64, n2: u64) -> f64 {
    let d = (((n0 - n1) as f64) * ((n0 - n2) as f64)).sqrt();
    (s as f64 / d).clamp(-1.0, 1.0)
}

fn p_value(s: i64, n: usize, xt: &[u64], yt: &[u64]) -> f64 {
    let nf = n as f64;
    let f = |ts: &[u64], g: &dyn Fn(f64) -> f64| ts.iter().map(|&t| g(t as f64)).sum::<f64>();
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt = f(xt, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = f(yt, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let v1 = f(xt, &|t| t * (t - 1.0)) * f(yt, &|t| t * (t - 1.0)) / (2.0 * nf * (nf - 1.0));
    let v2 = if n > 2 {
        f(xt, &|t| t * (t - 1.0) * (t - 2.0)) * f(yt, &|t| t * (t - 1.0) * (t - 2.0))
            / (9.0 * nf * (nf - 1.0) * (nf - 2.0))
    } else {
        0.0
    };
    let var = (v0 - vt - vu) / 18.0 + v1 + v2;
    if var > 0.0 {
        normal_two_sided(s as f64 / var.sqrt())
    } else {
        1.0
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// O(n²) pair counting.
    pub(crate) fn brute_force_tau(x: &[f64], y: &[f64]) -> Option<f64> {
        let n = x.len();
        let (mut s, mut tx, mut ty) = (0i64, 0u64, 0u64);
        for i in 0..n {
            for j in i + 1..n {
                let dx = x[i] - x[j];
                let dy = y[i] - y[j];
                if dx == 0.0 {
                    tx += 1;
                }
                if dy == 0.0 {
                    ty += 1;
                }
                if dx != 0.0 && dy != 0.0 {
                    s += if (dx > 0.0) == (dy > 0.0) { 1 } else { -1 };
                }
            }
        }
        let n0 = (n * (n - 1) / 2) as u64;
        (tx < n0 && ty < n0).then(|| s as f64 / (((n0 - tx) as f64) * ((n0 - ty) as f64)).sqrt())
    }

    #[test]
    fn identity_and_reverse() {
        let x = [1.0, 5.0, 2.0, 8.0];
        assert_eq!(kendall_tau(&x, &x).unwrap().coefficient, 1.0);
        let r: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(kendall_tau(&x, &r).unwrap().coefficient, -1.0);
    }

    #[test]
    fn hand_value() {
        let t = kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((t.coefficient - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_is_undefined() {
        assert!(matches!(
            kendall_tau(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn bad_lengths() {
        assert!(matches!(kendall_tau(&[1.0], &[1.0]), Err(Error::Precondition(_))));
        assert!(matches!(kendall_tau(&[1.0, 2.0], &[1.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn p_value_small_for_strong_trend() {
        let x: Vec<f64> = (0..50).map(f64::from).collect();
        let t = kendall_tau(&x, &x).unwrap();
        assert!(t.p_value < 1e-10);
    }

    proptest! {
        #[test]
        fn agrees_with_pair_counting(
            v in prop::collection::vec((0i32..4, 0i32..4), 2..40)
        ) {
            let x: Vec<f64> = v.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = v.iter().map(|p| p.1 as f64).collect();
            match (kendall_tau(&x, &y), brute_force_tau(&x, &y)) {
                (Ok(r), Some(b)) => prop_assert_eq!(r.coefficient, b),
                (Err(Error::Undefined(_)), None) => {}
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }

        #[test]
        fn p_in_unit_interval(v in prop::collection::vec((0i32..6, 0i32..6), 3..30)) {
            let x: Vec<f64> = v.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = v.iter().map(|p| p.1 as f64).collect();
            if let Ok(r) = kendall_tau(&x, &y) {
                prop_assert!((0.0..=1.0).contains(&r.p_value));
                prop_assert!((-1.0..=1.0).contains(&r.coefficient));
            }
        }
    }
}
