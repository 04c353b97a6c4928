/// Mean, median, population std, min and max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(x: &[f64]) -> Option<Summary> {
    if x.is_empty() {
        return None;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len();
    let median = if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    };
    Some(Summary {
        mean,
        median,
        std: var.sqrt(),
        min: s[0],
        max: s[m - 1],
    })
}

/// Summary plus moment shape statistics. Skewness and excess kurtosis are
/// `None` for zero-variance input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptive {
    pub summary: Summary,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

pub fn descriptive(x: &[f64]) -> Option<Descriptive> {
    let summary = summarize(x)?;
    let n = x.len() as f64;
    let moment = |k: i32| x.iter().map(|v| (v - summary.mean).powi(k)).sum::<f64>() / n;
    let m2 = moment(2);
    let (skewness, kurtosis) = if m2 > 0.0 {
        (Some(moment(3) / m2.powf(1.5)), Some(moment(4) / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    Some(Descriptive {
        summary,
        skewness,
        kurtosis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_no_shape() {
        let d = descriptive(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(d.summary.std, 0.0);
        assert_eq!(d.skewness, None);
        assert_eq!(d.kurtosis, None);
    }

    #[test]
    fn two_values() {
        let d = descriptive(&[1.0, 4.0]).unwrap();
        assert_eq!(d.summary.mean, 2.5);
        assert_eq!(d.summary.std, 1.5);
        assert_eq!(d.summary.median, 2.5);
    }

    #[test]
    fn symmetric_zero_skew() {
        let d = descriptive(&[-3.0, -1.0, 0.0, 1.0, 3.0]).unwrap();
        assert!(d.skewness.unwrap().abs() < 1e-9);
    }

    #[test]
    fn uniform_kurtosis() {
        // excess kurtosis of a discrete uniform on two points is -2
        let d = descriptive(&[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!((d.kurtosis.unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_is_none() {
        assert!(descriptive(&[]).is_none());
    }
}
