//! Vowel-space area and centralization from corner-vowel formants.
//!
//!     cargo run --example vowel_space

use dyskit::biomarkers::{vowel_space, CornerFormants};

fn main() {
    let speakers = [
        ("typical", ((300.0, 2300.0), (800.0, 1300.0), (300.0, 800.0), (700.0, 1800.0))),
        ("centralized", ((380.0, 1950.0), (680.0, 1400.0), (390.0, 1050.0), (620.0, 1700.0))),
    ];
    println!("{:<12}{:>12}{:>12}{:>8}{:>8}{:>8}", "speaker", "VSA tri", "VSA quad", "FCR", "VAI", "F2 i/u");
    for (name, (i, a, u, ae)) in speakers {
        let vs = vowel_space(&CornerFormants { i: Some(i), a: Some(a), u: Some(u), ae: Some(ae) });
        println!(
            "{name:<12}{:>12.0}{:>12.0}{:>8.3}{:>8.3}{:>8.3}",
            vs.vsa_triangle.unwrap(),
            vs.vsa_quadrilateral.unwrap(),
            vs.fcr.unwrap(),
            vs.vai.unwrap(),
            vs.f2_ratio.unwrap()
        );
    }

    // an utterance without /u/ borrows the speaker average
    let utterance = CornerFormants { i: Some((310.0, 2250.0)), a: Some((790.0, 1320.0)), u: None, ae: None };
    let speaker = CornerFormants { i: None, a: None, u: Some((305.0, 820.0)), ae: Some((690.0, 1790.0)) };
    let vs = vowel_space(&utterance.impute(&speaker));
    println!("imputed utterance: VSA tri {:.0}, VSA quad {:.0}", vs.vsa_triangle.unwrap(), vs.vsa_quadrilateral.unwrap());
}
