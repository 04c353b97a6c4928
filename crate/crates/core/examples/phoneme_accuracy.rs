//! Align a decoded phone string to its canonical form and score it.
//!
//!     cargo run --example phoneme_accuracy -- "HH AH L OW" "HH EH L OW W"

use dyskit::alignment::{align_sequences, alignment_cost, LanguageInventory, PhoneSequence};
use dyskit::biomarkers::phoneme_accuracy;

fn main() {
    let mut args = std::env::args().skip(1);
    let canonical = args.next().unwrap_or_else(|| "HH IY W IH L AH L AW AH R EH L AY".into());
    let decoded = args.next().unwrap_or_else(|| "SH IY W AO L AH L AW AE N L IY AY".into());

    let inv = LanguageInventory::english();
    let c = PhoneSequence::parse(&canonical, &inv);
    let d = PhoneSequence::parse(&decoded, &inv);
    let pairs = align_sequences(&c, &d);

    println!("{:<10}{:<10}", "canonical", "decoded");
    for p in &pairs {
        let mark = if p.is_match() { "" } else { "  x" };
        println!("{:<10}{:<10}{mark}", p.canonical_label(), p.decoded_label());
    }
    let acc = phoneme_accuracy(&pairs);
    let pct = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.2}%"));
    println!("edit cost {}", alignment_cost(&pairs));
    println!("CRR {}  VRR {}  PRR {}", pct(acc.crr), pct(acc.vrr), pct(acc.prr));
}
