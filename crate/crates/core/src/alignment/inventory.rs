use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhoneClass {
    Vowel,
    Consonant,
    Silence,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerVowel {
    I,
    U,
    A,
    Ae,
}

impl CornerVowel {
    pub const ALL: [CornerVowel; 4] = [CornerVowel::I, CornerVowel::U, CornerVowel::A, CornerVowel::Ae];
}

/// On-disk form of an inventory (TOML).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct InventoryFile {
    language: String,
    #[serde(default = "default_tier")]
    phone_tier: String,
    #[serde(default = "default_silence")]
    silence: Vec<String>,
    #[serde(default)]
    strip_stress: bool,
    vowels: Vec<String>,
    consonants: Vec<String>,
    corners: BTreeMap<CornerVowel, Vec<String>>,
}

fn default_tier() -> String {
    "phones".into()
}

fn default_silence() -> Vec<String> {
    vec!["".into(), "sil".into(), "sp".into()]
}

/// Phone classes and corner-vowel labels for one language.
#[derive(Debug, Clone)]
pub struct LanguageInventory {
    pub language: String,
    pub phone_tier: String,
    pub strip_stress: bool,
    silence: Vec<String>,
    classes: HashMap<String, PhoneClass>,
    corners: BTreeMap<CornerVowel, Vec<String>>,
    vowels: Vec<String>,
    consonants: Vec<String>,
}

impl LanguageInventory {
    fn from_file(f: InventoryFile) -> Result<Self> {
        let mut classes = HashMap::new();
        for v in &f.vowels {
            classes.insert(v.clone(), PhoneClass::Vowel);
        }
        for c in &f.consonants {
            if classes.insert(c.clone(), PhoneClass::Consonant).is_some() {
                return Err(Error::Config(format!(
                    "{}: phone {c:?} listed as both vowel and consonant",
                    f.language
                )));
            }
        }
        for corner in CornerVowel::ALL {
            let labels = f.corners.get(&corner).filter(|l| !l.is_empty()).ok_or_else(|| {
                Error::Config(format!("{}: corner vowel {corner:?} has no labels", f.language))
            })?;
            for l in labels {
                if classes.get(l) != Some(&PhoneClass::Vowel) {
                    return Err(Error::Config(format!(
                        "{}: corner label {l:?} is not a vowel of the inventory",
                        f.language
                    )));
                }
            }
        }
        Ok(Self {
            language: f.language,
            phone_tier: f.phone_tier,
            strip_stress: f.strip_stress,
            silence: f.silence,
            classes,
            corners: f.corners,
            vowels: f.vowels,
            consonants: f.consonants,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: InventoryFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("inventory: {e}")))?;
        Self::from_file(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let f = InventoryFile {
            language: self.language.clone(),
            phone_tier: self.phone_tier.clone(),
            silence: self.silence.clone(),
            strip_stress: self.strip_stress,
            vowels: self.vowels.clone(),
            consonants: self.consonants.clone(),
            corners: self.corners.clone(),
        };
        toml::to_string(&f).expect("inventory serializes")
    }

    fn build(
        language: &str,
        vowels: &[&str],
        consonants: &[&str],
        corners: [&[&str]; 4],
        strip_stress: bool,
    ) -> Self {
        let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let corners = CornerVowel::ALL
            .into_iter()
            .zip(corners)
            .map(|(c, l)| (c, own(l)))
            .collect();
        Self::from_file(InventoryFile {
            language: language.into(),
            phone_tier: default_tier(),
            silence: default_silence(),
            strip_stress,
            vowels: own(vowels),
            consonants: own(consonants),
            corners,
        })
        .expect("built-in inventory is consistent")
    }

    /// ARPAbet English. The glides W and Y are grouped with the vowels.
    pub fn english() -> Self {
        Self::build(
            "en",
            &[
                "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY",
                "UH", "UW", "W", "Y",
            ],
            &[
                "B", "CH", "D", "DH", "F", "G", "HH", "JH", "K", "L", "M", "N", "NG", "P", "R",
                "S", "SH", "T", "TH", "V", "Z", "ZH",
            ],
            [&["IY"], &["UW"], &["AA"], &["AE"]],
            true,
        )
    }

    /// Romanized Korean.
    pub fn korean() -> Self {
        Self::build(
            "ko",
            &["a", "ae", "e", "i", "o", "u", "eo", "eu", "ui", "oe", "wi"],
            &[
                "g", "n", "d", "r", "m", "b", "s", "j", "ch", "k", "t", "p", "h", "ng", "kk", "tt",
                "pp", "ss", "jj",
            ],
            [&["i"], &["u"], &["a"], &["ae"]],
            false,
        )
    }

    /// Romanized Tamil. `ae` covers the front open allophone of /a/.
    pub fn tamil() -> Self {
        Self::build(
            "ta",
            &["a", "aa", "ae", "i", "ii", "u", "uu", "e", "ee", "ai", "o", "oo", "au"],
            &[
                "k", "ng", "c", "nj", "t", "nn", "th", "n", "p", "m", "y", "r", "l", "v", "zh",
                "ll", "rr", "nnn",
            ],
            [&["i", "ii"], &["u", "uu"], &["a", "aa"], &["ae"]],
            false,
        )
    }

    /// Built-in inventory by language code.
    pub fn builtin(language: &str) -> Option<Self> {
        match language {
            "en" => Some(Self::english()),
            "ko" => Some(Self::korean()),
            "ta" => Some(Self::tamil()),
            _ => None,
        }
    }

    /// Label with surrounding whitespace removed and, if enabled, the trailing
    /// stress digit stripped.
    pub fn normalize<'a>(&self, label: &'a str) -> &'a str {
        let l = label.trim();
        if self.strip_stress {
            l.trim_end_matches(|c: char| c.is_ascii_digit())
        } else {
            l
        }
    }

    pub fn is_silence(&self, label: &str) -> bool {
        let l = self.normalize(label);
        self.silence.iter().any(|s| s == l)
    }

    pub fn classify(&self, label: &str) -> PhoneClass {
        if self.is_silence(label) {
            return PhoneClass::Silence;
        }
        self.classes
            .get(self.normalize(label))
            .copied()
            .unwrap_or(PhoneClass::Other)
    }

    pub fn corner_of(&self, label: &str) -> Option<CornerVowel> {
        let l = self.normalize(label);
        self.corners
            .iter()
            .find(|(_, ls)| ls.iter().any(|x| x == l))
            .map(|(c, _)| *c)
    }

    pub fn vowels(&self) -> &[String] {
        &self.vowels
    }

    pub fn consonants(&self) -> &[String] {
        &self.consonants
    }

    pub fn corner_labels(&self, c: CornerVowel) -> &[String] {
        &self.corners[&c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes() {
        let en = LanguageInventory::english();
        assert_eq!(en.classify("IY1"), PhoneClass::Vowel);
        assert_eq!(en.classify("W"), PhoneClass::Vowel);
        assert_eq!(en.classify("HH"), PhoneClass::Consonant);
        assert_eq!(en.classify("sil"), PhoneClass::Silence);
        assert_eq!(en.classify(""), PhoneClass::Silence);
        assert_eq!(en.classify("spn"), PhoneClass::Other);
        assert_eq!(en.corner_of("AE0"), Some(CornerVowel::Ae));
        assert_eq!(en.corner_of("IH"), None);
    }

    #[test]
    fn builtins_consistent() {
        for l in ["en", "ko", "ta"] {
            let inv = LanguageInventory::builtin(l).unwrap();
            for c in CornerVowel::ALL {
                for lab in inv.corner_labels(c) {
                    assert_eq!(inv.classify(lab), PhoneClass::Vowel);
                }
            }
        }
    }

    #[test]
    fn toml_roundtrip() {
        let en = LanguageInventory::english();
        let back = LanguageInventory::from_toml_str(&en.to_toml_string()).unwrap();
        assert_eq!(back.classify("AW"), PhoneClass::Vowel);
        assert_eq!(back.corner_of("UW"), Some(CornerVowel::U));
    }

    #[test]
    fn corner_must_be_vowel() {
        let text = r#"
language = "xx"
vowels = ["a", "i", "u"]
consonants = ["k"]
[corners]
i = ["i"]
u = ["u"]
a = ["a"]
ae = ["k"]
"#;
        assert!(matches!(LanguageInventory::from_toml_str(text), Err(Error::Config(_))));
    }
}
