use crate::alignment::{Alignment, CornerVowel, LanguageInventory};
use crate::signal::{formants, AudioBuffer, FormantSettings};

/// Mean (F1, F2) in Hz per corner vowel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CornerFormants {
    pub i: Option<(f64, f64)>,
    pub u: Option<(f64, f64)>,
    pub a: Option<(f64, f64)>,
    pub ae: Option<(f64, f64)>,
}

impl CornerFormants {
    pub fn get(&self, c: CornerVowel) -> Option<(f64, f64)> {
        match c {
            CornerVowel::I => self.i,
            CornerVowel::U => self.u,
            CornerVowel::A => self.a,
            CornerVowel::Ae => self.ae,
        }
    }

    pub fn set(&mut self, c: CornerVowel, v: Option<(f64, f64)>) {
        match c {
            CornerVowel::I => self.i = v,
            CornerVowel::U => self.u = v,
            CornerVowel::A => self.a = v,
            CornerVowel::Ae => self.ae = v,
        }
    }

    /// Fills corners missing here from `fallback`.
    pub fn impute(&self, fallback: &CornerFormants) -> CornerFormants {
        let mut out = *self;
        for c in CornerVowel::ALL {
            if out.get(c).is_none() {
                out.set(c, fallback.get(c));
            }
        }
        out
    }

    /// Per-corner mean over the sets where that corner is present.
    pub fn mean_of<'a>(sets: impl IntoIterator<Item = &'a CornerFormants>) -> CornerFormants {
        let mut acc = [(0.0, 0.0, 0usize); 4];
        for s in sets {
            for (k, c) in CornerVowel::ALL.into_iter().enumerate() {
                if let Some((f1, f2)) = s.get(c) {
                    acc[k].0 += f1;
                    acc[k].1 += f2;
                    acc[k].2 += 1;
                }
            }
        }
        let mut out = CornerFormants::default();
        for (k, c) in CornerVowel::ALL.into_iter().enumerate() {
            let (s1, s2, n) = acc[k];
            if n > 0 {
                out.set(c, Some((s1 / n as f64, s2 / n as f64)));
            }
        }
        out
    }
}

/// Vowel-space area and centralization measures.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VowelSpace {
    pub vsa_triangle: Option<f64>,
    pub vsa_quadrilateral: Option<f64>,
    pub fcr: Option<f64>,
    pub vai: Option<f64>,
    pub f2_ratio: Option<f64>,
}

/// Triangle /i/-/a/-/u/ area in the F1-F2 plane (Hz²).
pub fn vsa_triangle(i: (f64, f64), a: (f64, f64), u: (f64, f64)) -> f64 {
    0.5 * (i.0 * (a.1 - u.1) + a.0 * (u.1 - i.1) + u.0 * (i.1 - a.1)).abs()
}

/// Quadrilateral /i/-/æ/-/a/-/u/ area in the F1-F2 plane (Hz²).
pub fn vsa_quadrilateral(i: (f64, f64), ae: (f64, f64), a: (f64, f64), u: (f64, f64)) -> f64 {
    let pos = i.1 * ae.0 + ae.1 * a.0 + a.1 * u.0 + u.1 * i.0;
    let neg = i.0 * ae.1 + ae.0 * a.1 + a.0 * u.1 + u.0 * i.1;
    0.5 * (pos - neg).abs()
}

pub fn vowel_space(c: &CornerFormants) -> VowelSpace {
    let mut out = VowelSpace::default();
    if let (Some(i), Some(a), Some(u)) = (c.i, c.a, c.u) {
        out.vsa_triangle = Some(vsa_triangle(i, a, u));
        let num = u.1 + a.1 + i.0 + u.0;
        let den = i.1 + a.0;
        if num > 0.0 && den > 0.0 {
            out.fcr = Some(num / den);
            out.vai = Some(den / num);
        }
        if u.1 > 0.0 {
            out.f2_ratio = Some(i.1 / u.1);
        }
        if let Some(ae) = c.ae {
            out.vsa_quadrilateral = Some(vsa_quadrilateral(i, ae, a, u));
        }
    }
    out
}

/// Mean formants over every instance of each corner vowel in the phone tier.
/// Confident estimates are preferred; low-confidence ones are used only when a
/// corner has no confident instance.
pub fn corner_formants(
    buf: &AudioBuffer,
    alignment: &Alignment,
    inv: &LanguageInventory,
    settings: &FormantSettings,
) -> CornerFormants {
    let Ok(tier) = alignment.phone_tier(inv) else {
        return CornerFormants::default();
    };
    let dur = buf.duration();
    let mut found: [(Vec<(f64, f64)>, Vec<(f64, f64)>); 4] = Default::default();
    for iv in &tier.intervals {
        let Some(c) = inv.corner_of(&iv.label) else { continue };
        let (t0, t1) = (iv.t0.max(0.0), iv.t1.min(dur));
        if t1 <= t0 {
            continue;
        }
        if let Ok(est) = formants(buf, t0, t1, settings) {
            let k = CornerVowel::ALL.iter().position(|&x| x == c).unwrap();
            if est.confident {
                found[k].0.push((est.f1, est.f2));
            } else {
                found[k].1.push((est.f1, est.f2));
            }
        }
    }
    let mut out = CornerFormants::default();
    for (k, c) in CornerVowel::ALL.into_iter().enumerate() {
        let pool = if found[k].0.is_empty() { &found[k].1 } else { &found[k].0 };
        if !pool.is_empty() {
            let n = pool.len() as f64;
            let f1 = pool.iter().map(|p| p.0).sum::<f64>() / n;
            let f2 = pool.iter().map(|p| p.1).sum::<f64>() / n;
            out.set(c, Some((f1, f2)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const I: (f64, f64) = (300.0, 2300.0);
    const A: (f64, f64) = (800.0, 1300.0);
    const U: (f64, f64) = (300.0, 800.0);
    const AE: (f64, f64) = (700.0, 1800.0);

    fn full() -> CornerFormants {
        CornerFormants {
            i: Some(I),
            u: Some(U),
            a: Some(A),
            ae: Some(AE),
        }
    }

    #[test]
    fn hand_values() {
        let v = vowel_space(&full());
        assert_eq!(v.vsa_triangle, Some(375000.0));
        assert_eq!(v.vsa_quadrilateral, Some(450000.0));
        assert!((v.fcr.unwrap() - 2700.0 / 3100.0).abs() < 1e-12);
        assert!((v.vai.unwrap() - 1.1481).abs() < 1e-4);
        assert_eq!(v.f2_ratio, Some(2.875));
    }

    #[test]
    fn missing_ae_only_drops_quadrilateral() {
        let mut c = full();
        c.ae = None;
        let v = vowel_space(&c);
        assert!(v.vsa_quadrilateral.is_none());
        assert!(v.vsa_triangle.is_some());
    }

    #[test]
    fn missing_corner_all_missing() {
        let mut c = full();
        c.u = None;
        assert_eq!(vowel_space(&c), VowelSpace {
            vsa_triangle: None,
            vsa_quadrilateral: None,
            fcr: None,
            vai: None,
            f2_ratio: None,
        });
    }

    #[test]
    fn imputation_from_speaker_means() {
        let utt = CornerFormants {
            i: Some(I),
            ..Default::default()
        };
        let others = [full(), CornerFormants { a: Some((900.0, 1400.0)), ..Default::default() }];
        let spk = CornerFormants::mean_of(&others);
        assert_eq!(spk.a, Some((850.0, 1350.0)));
        let imp = utt.impute(&spk);
        assert_eq!(imp.i, Some(I));
        assert_eq!(imp.u, Some(U));
        assert_eq!(imp.a, Some((850.0, 1350.0)));
    }

    fn pt() -> impl Strategy<Value = (f64, f64)> {
        (200.0f64..1000.0, 600.0f64..3000.0)
    }

    proptest! {
        #[test]
        fn area_invariances(i in pt(), a in pt(), u in pt(), ae in pt()) {
            let t = vsa_triangle(i, a, u);
            for (p, q, r) in [(a, u, i), (u, i, a), (i, u, a), (u, a, i), (a, i, u)] {
                prop_assert!((vsa_triangle(p, q, r) - t).abs() <= 1e-6 * (1.0 + t));
            }
            let q = vsa_quadrilateral(i, ae, a, u);
            for (p1, p2, p3, p4) in [(ae, a, u, i), (a, u, i, ae), (u, i, ae, a), (u, a, ae, i)] {
                prop_assert!((vsa_quadrilateral(p1, p2, p3, p4) - q).abs() <= 1e-6 * (1.0 + q));
            }
            prop_assert!(t >= 0.0 && q >= 0.0);
        }

        #[test]
        fn fcr_vai_reciprocal(i in pt(), a in pt(), u in pt()) {
            let v = vowel_space(&CornerFormants { i: Some(i), a: Some(a), u: Some(u), ae: None });
            prop_assert!((v.fcr.unwrap() * v.vai.unwrap() - 1.0).abs() < 1e-9);
        }
    }
}
