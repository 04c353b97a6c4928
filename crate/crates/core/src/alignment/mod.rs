//! Time-aligned phone tiers, phone inventories and sequence alignment.

mod inventory;
mod sequence;
mod textgrid;

pub use inventory::{CornerVowel, LanguageInventory, PhoneClass};
pub use sequence::{
    align_sequences, alignment_cost, AlignedPair, Phone, PhoneSequence, GAP_SYMBOL,
};
pub use textgrid::{parse_textgrid, serialize_textgrid, Alignment, Interval, Tier};

use crate::error::{Error, Result};

/// Number of vowel-class intervals on the phone tier; each vowel interval is
/// one syllable nucleus.
pub fn syllable_count(a: &Alignment, inv: &LanguageInventory) -> Result<usize> {
    let tier = a.phone_tier(inv)?;
    Ok(tier
        .intervals
        .iter()
        .filter(|iv| inv.classify(&iv.label) == PhoneClass::Vowel)
        .count())
}

pub(crate) fn missing_tier(name: &str) -> Error {
    Error::Lookup(format!("alignment has no phone tier named {name:?}"))
}
