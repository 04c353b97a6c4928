use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::average_ranks;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KruskalResult {
    pub h: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Kruskal-Wallis H with tie correction; p from chi-square with k−1 df.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<KruskalResult> {
    if groups.len() < 2 || groups.iter().any(Vec::is_empty) {
        return Err(Error::Precondition(
            "kruskal_wallis: need at least 2 non-empty groups".into(),
        ));
    }
    let all: Vec<f64> = groups.concat();
    if all.len() < 3 {
        return Err(Error::Precondition("kruskal_wallis: need at least 3 values".into()));
    }
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("kruskal_wallis: non-finite input".into()));
    }
    let df = groups.len() - 1;
    let n = all.len() as f64;
    let ranks = average_ranks(&all);
    let mut sorted = all.clone();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut k = 0;
    while k < sorted.len() {
        let mut j = k + 1;
        while j < sorted.len() && sorted[j] == sorted[k] {
            j += 1;
        }
        let t = (j - k) as f64;
        ties += t * t * t - t;
        k = j;
    }
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalResult {
            h: 0.0,
            df,
            p_value: 1.0,
        });
    }
    let mut off = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[off..off + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        off += g.len();
    }
    let h = ((12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction).max(0.0);
    let chi = ChiSquared::new(df as f64).expect("df >= 1");
    Ok(KruskalResult {
        h,
        df,
        p_value: (1.0 - chi.cdf(h)).clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_value() {
        let r = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert!((r.h - 27.0 / 7.0).abs() < 1e-12);
        assert_eq!(r.df, 1);
        assert!((r.p_value - 0.049535).abs() < 1e-5);
    }

    #[test]
    fn identical_values() {
        let r = kruskal_wallis(&[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!((r.h, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn interleaved_groups_near_zero() {
        let r = kruskal_wallis(&[vec![1.0, 4.0, 5.0, 8.0], vec![2.0, 3.0, 6.0, 7.0]]).unwrap();
        assert!(r.h < 0.1);
    }

    #[test]
    fn separated_groups_reach_maximum() {
        // maximum H for sizes (n_i) is attained when groups occupy consecutive rank blocks
        let g = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![100.0, 101.0, 102.0]];
        let r = kruskal_wallis(&g).unwrap();
        let n = 9.0;
        let sum: f64 = [6.0f64, 15.0, 24.0].iter().map(|r| r * r / 3.0).sum();
        let max = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
        assert!((r.h - max).abs() < 1e-12);
    }

    #[test]
    fn too_small() {
        assert!(kruskal_wallis(&[vec![1.0]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0], vec![]]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_invariance(
            a in prop::collection::vec(-5.0f64..5.0, 1..10),
            b in prop::collection::vec(-5.0f64..5.0, 2..10),
        ) {
            let r1 = kruskal_wallis(&[a.clone(), b.clone()]).unwrap();
            let f = |v: &Vec<f64>| v.iter().map(|x| x.exp() + 2.0 * x).collect::<Vec<_>>();
            let r2 = kruskal_wallis(&[f(&a), f(&b)]).unwrap();
            prop_assert!((r1.h - r2.h).abs() < 1e-9);
        }
    }
}
