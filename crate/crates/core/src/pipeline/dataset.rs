use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sex {
    M,
    F,
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "M" | "m" => Ok(Sex::M),
            "F" | "f" => Ok(Sex::F),
            other => Err(Error::InvalidData(format!("sex must be M or F, got {other:?}"))),
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::M => "M",
            Sex::F => "F",
        })
    }
}

/// Ordinal severity: 0 healthy, 1 mild, 2 moderate, 3 severe.
pub const N_SEVERITIES: usize = 4;

/// One manifest row. Empty path columns are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub utt_id: String,
    pub speaker: String,
    pub language: String,
    pub severity: u8,
    pub sex: Sex,
    pub wav: Option<PathBuf>,
    pub textgrid: Option<PathBuf>,
    pub phones: Option<PathBuf>,
    pub logits: Option<PathBuf>,
    pub segments: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub utterances: Vec<Utterance>,
}

pub const MANIFEST_HEADER: [&str; 10] = [
    "utt_id", "speaker", "language", "severity", "sex", "wav", "textgrid", "phones", "logits",
    "segments",
];

fn opt_path(s: &str, base: Option<&Path>) -> Option<PathBuf> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let p = PathBuf::from(s);
    Some(match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    })
}

impl DatasetManifest {
    /// Builds and validates a manifest.
    pub fn new(utterances: Vec<Utterance>) -> Result<Self> {
        let m = Self { utterances };
        m.validate()?;
        Ok(m)
    }

    /// Ids unique, severities in range, one language and severity per speaker.
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let mut speakers: BTreeMap<&str, (&str, u8)> = BTreeMap::new();
        for u in &self.utterances {
            if !ids.insert(u.utt_id.as_str()) {
                return Err(Error::InvalidData(format!("duplicate utterance id {:?}", u.utt_id)));
            }
            if usize::from(u.severity) >= N_SEVERITIES {
                return Err(Error::InvalidData(format!(
                    "{}: severity {} outside 0..=3",
                    u.utt_id, u.severity
                )));
            }
            let e = speakers.entry(&u.speaker).or_insert((&u.language, u.severity));
            if e.0 != u.language || e.1 != u.severity {
                return Err(Error::InvalidData(format!(
                    "speaker {:?} has more than one language or severity",
                    u.speaker
                )));
            }
        }
        Ok(())
    }

    /// Reads a manifest CSV. Relative paths resolve against the manifest's
    /// directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("manifest lacks column {name:?}")))
        };
        let idx: Vec<usize> = MANIFEST_HEADER[..5].iter().map(|n| col(n)).collect::<Result<_>>()?;
        let path_idx: Vec<Option<usize>> =
            MANIFEST_HEADER[5..].iter().map(|n| header.iter().position(|h| h == *n)).collect();
        let mut utterances = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let get = |k: usize| rec.get(k).unwrap_or("");
            let severity = get(idx[3]).parse::<u8>().map_err(|_| {
                Error::InvalidData(format!("row {}: bad severity {:?}", line + 2, get(idx[3])))
            })?;
            let p = |k: usize| path_idx[k].and_then(|c| opt_path(get(c), base));
            utterances.push(Utterance {
                utt_id: get(idx[0]).to_string(),
                speaker: get(idx[1]).to_string(),
                language: get(idx[2]).to_string(),
                severity,
                sex: get(idx[4]).parse()?,
                wav: p(0),
                textgrid: p(1),
                phones: p(2),
                logits: p(3),
                segments: p(4),
            });
        }
        Self::new(utterances)
    }

    /// CSV text; paths are written relative to `base` when they lie under it.
    pub fn to_csv(&self, base: Option<&Path>) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(MANIFEST_HEADER)?;
        let show = |p: &Option<PathBuf>| -> String {
            match p {
                None => String::new(),
                Some(p) => base
                    .and_then(|b| p.strip_prefix(b).ok())
                    .unwrap_or(p)
                    .to_string_lossy()
                    .into_owned(),
            }
        };
        for u in &self.utterances {
            w.write_record([
                u.utt_id.clone(),
                u.speaker.clone(),
                u.language.clone(),
                u.severity.to_string(),
                u.sex.to_string(),
                show(&u.wav),
                show(&u.textgrid),
                show(&u.phones),
                show(&u.logits),
                show(&u.segments),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidData(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn speakers(&self) -> Vec<&str> {
        let s: BTreeSet<&str> = self.utterances.iter().map(|u| u.speaker.as_str()).collect();
        s.into_iter().collect()
    }

    pub fn languages(&self) -> Vec<&str> {
        let s: BTreeSet<&str> = self.utterances.iter().map(|u| u.language.as_str()).collect();
        s.into_iter().collect()
    }

    pub fn get(&self, utt_id: &str) -> Option<&Utterance> {
        self.utterances.iter().find(|u| u.utt_id == utt_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "utt_id,speaker,language,severity,sex,wav,textgrid,phones,logits,segments\n\
        u1,s1,en,0,M,a.wav,a.TextGrid,,,\n\
        u2,s1,en,0,M,/abs/b.wav,,,,\n\
        u3,s2,ko,2,F,,,,,\n";

    #[test]
    fn parse_and_resolve() {
        let m = DatasetManifest::parse(TEXT, Some(Path::new("/data"))).unwrap();
        assert_eq!(m.utterances.len(), 3);
        assert_eq!(m.utterances[0].wav.as_deref(), Some(Path::new("/data/a.wav")));
        assert_eq!(m.utterances[1].wav.as_deref(), Some(Path::new("/abs/b.wav")));
        assert_eq!(m.utterances[2].sex, Sex::F);
        assert!(m.utterances[0].phones.is_none());
        assert_eq!(m.speakers(), vec!["s1", "s2"]);
        assert_eq!(m.languages(), vec!["en", "ko"]);
    }

    #[test]
    fn round_trip() {
        let m = DatasetManifest::parse(TEXT, Some(Path::new("/data"))).unwrap();
        let text = m.to_csv(Some(Path::new("/data"))).unwrap();
        assert_eq!(DatasetManifest::parse(&text, Some(Path::new("/data"))).unwrap(), m);
    }

    #[test]
    fn invariants() {
        let dup = "utt_id,speaker,language,severity,sex\nu1,s1,en,0,M\nu1,s2,en,0,M\n";
        assert!(DatasetManifest::parse(dup, None).is_err());
        let mixed = "utt_id,speaker,language,severity,sex\nu1,s1,en,0,M\nu2,s1,en,1,M\n";
        assert!(DatasetManifest::parse(mixed, None).is_err());
        let range = "utt_id,speaker,language,severity,sex\nu1,s1,en,4,M\n";
        assert!(DatasetManifest::parse(range, None).is_err());
        let nocol = "utt_id,speaker,language,severity\nu1,s1,en,0\n";
        assert!(matches!(DatasetManifest::parse(nocol, None), Err(Error::Schema(_))));
    }
}
