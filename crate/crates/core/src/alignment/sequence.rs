use super::{LanguageInventory, PhoneClass, Tier};

/// Symbol written for a gap in alignment reports.
pub const GAP_SYMBOL: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phone {
    pub label: String,
    pub class: PhoneClass,
}

/// Ordered non-silence phones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhoneSequence {
    pub phones: Vec<Phone>,
}

impl PhoneSequence {
    /// Builds a sequence from raw labels; silences and gap symbols are dropped
    /// and stress digits removed according to the inventory.
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>, inv: &LanguageInventory) -> Self {
        let phones = labels
            .into_iter()
            .filter(|l| l.trim() != GAP_SYMBOL)
            .filter_map(|l| {
                let class = inv.classify(l);
                (class != PhoneClass::Silence).then(|| Phone {
                    label: inv.normalize(l).to_string(),
                    class,
                })
            })
            .collect();
        Self { phones }
    }

    pub fn from_tier(tier: &Tier, inv: &LanguageInventory) -> Self {
        Self::from_labels(tier.intervals.iter().map(|i| i.label.as_str()), inv)
    }

    /// Whitespace-separated labels, as written in decoded-phone files.
    pub fn parse(text: &str, inv: &LanguageInventory) -> Self {
        Self::from_labels(text.split_whitespace(), inv)
    }

    pub fn len(&self) -> usize {
        self.phones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phones.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.phones.iter().map(|p| p.label.as_str()).collect()
    }
}

/// One column of a pairwise alignment. `None` marks a gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedPair {
    pub canonical: Option<Phone>,
    pub decoded: Option<Phone>,
}

impl AlignedPair {
    pub fn is_match(&self) -> bool {
        matches!((&self.canonical, &self.decoded), (Some(c), Some(d)) if c.label == d.label)
    }

    pub fn canonical_label(&self) -> &str {
        self.canonical.as_ref().map_or(GAP_SYMBOL, |p| p.label.as_str())
    }

    pub fn decoded_label(&self) -> &str {
        self.decoded.as_ref().map_or(GAP_SYMBOL, |p| p.label.as_str())
    }
}

/// Unit-cost edit distance of an alignment.
pub fn alignment_cost(pairs: &[AlignedPair]) -> usize {
    pairs.iter().filter(|p| !p.is_match()).count()
}

/// Global minimum edit-distance alignment with unit costs. Among equal-cost
/// paths the traceback prefers a diagonal step (match or substitution), then
/// deletion of a canonical phone, then insertion of a decoded phone.
pub fn align_sequences(canonical: &PhoneSequence, decoded: &PhoneSequence) -> Vec<AlignedPair> {
    let a = &canonical.phones;
    let b = &decoded.phones;
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i;
    }
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = usize::from(a[i - 1].label != b[j - 1].label);
            d[i * w + j] = (d[(i - 1) * w + j - 1] + sub)
                .min(d[(i - 1) * w + j] + 1)
                .min(d[i * w + j - 1] + 1);
        }
    }
    let mut out = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let sub = usize::from(a[i - 1].label != b[j - 1].label);
            if d[(i - 1) * w + j - 1] + sub == here {
                out.push(AlignedPair {
                    canonical: Some(a[i - 1].clone()),
                    decoded: Some(b[j - 1].clone()),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[(i - 1) * w + j] + 1 == here {
            out.push(AlignedPair {
                canonical: Some(a[i - 1].clone()),
                decoded: None,
            });
            i -= 1;
        } else {
            out.push(AlignedPair {
                canonical: None,
                decoded: Some(b[j - 1].clone()),
            });
            j -= 1;
        }
    }
    out.reverse();
    out
}
