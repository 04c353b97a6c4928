use crate::alignment::{AlignedPair, PhoneClass};

/// Consonant, vowel and overall phoneme recognition rates in percent.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhonemeAccuracy {
    pub crr: Option<f64>,
    pub vrr: Option<f64>,
    pub prr: Option<f64>,
}

/// Rates over the canonical side of an alignment. A pair counts as correct
/// only when both labels are identical; insertions are ignored.
pub fn phoneme_accuracy(pairs: &[AlignedPair]) -> PhonemeAccuracy {
    let mut total = [0usize; 2];
    let mut hit = [0usize; 2];
    for p in pairs {
        let Some(c) = &p.canonical else { continue };
        let k = match c.class {
            PhoneClass::Consonant => 0,
            PhoneClass::Vowel => 1,
            _ => continue,
        };
        total[k] += 1;
        hit[k] += usize::from(p.is_match());
    }
    let rate = |h: usize, t: usize| (t > 0).then(|| h as f64 / t as f64 * 100.0);
    PhonemeAccuracy {
        crr: rate(hit[0], total[0]),
        vrr: rate(hit[1], total[1]),
        prr: rate(hit[0] + hit[1], total[0] + total[1]),
    }
}
