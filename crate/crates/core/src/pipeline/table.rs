use std::path::Path;

use crate::error::{Error, Result};
use crate::trees::DataMatrix;

/// The sole missing-value marker in feature CSVs.
pub const NA: &str = "NA";

pub const KEY_COLUMNS: [&str; 4] = ["utt_id", "speaker", "language", "severity"];

/// Row keys plus a feature matrix (`NaN` = missing).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub utt_ids: Vec<String>,
    pub speakers: Vec<String>,
    pub languages: Vec<String>,
    pub severities: Vec<u8>,
    pub features: DataMatrix,
}

impl FeatureTable {
    pub fn new(
        utt_ids: Vec<String>,
        speakers: Vec<String>,
        languages: Vec<String>,
        severities: Vec<u8>,
        features: DataMatrix,
    ) -> Result<Self> {
        let n = utt_ids.len();
        if speakers.len() != n || languages.len() != n || severities.len() != n {
            return Err(Error::Schema("key columns differ in length".into()));
        }
        if features.n_cols() > 0 && features.n_rows() != n {
            return Err(Error::Schema(format!(
                "{} key rows for {} feature rows",
                n,
                features.n_rows()
            )));
        }
        Ok(Self {
            utt_ids,
            speakers,
            languages,
            severities,
            features,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.utt_ids.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.severities.iter().map(|&s| usize::from(s)).collect()
    }

    pub fn labels_f64(&self) -> Vec<f64> {
        self.severities.iter().map(|&s| f64::from(s)).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let pick = |v: &[String]| rows.iter().map(|&i| v[i].clone()).collect();
        Self {
            utt_ids: pick(&self.utt_ids),
            speakers: pick(&self.speakers),
            languages: pick(&self.languages),
            severities: rows.iter().map(|&i| self.severities[i]).collect(),
            features: self.features.select_rows(rows),
        }
    }

    pub fn with_features(&self, features: DataMatrix) -> Result<Self> {
        Self::new(
            self.utt_ids.clone(),
            self.speakers.clone(),
            self.languages.clone(),
            self.severities.clone(),
            features,
        )
    }

    /// Rows sorted by utterance id.
    pub fn sorted(&self) -> Self {
        let mut order: Vec<usize> = (0..self.n_rows()).collect();
        order.sort_by(|&a, &b| self.utt_ids[a].cmp(&self.utt_ids[b]));
        self.select_rows(&order)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = KEY_COLUMNS.to_vec();
        header.extend(self.features.names().iter().map(String::as_str));
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec = vec![
                self.utt_ids[i].clone(),
                self.speakers[i].clone(),
                self.languages[i].clone(),
                self.severities[i].to_string(),
            ];
            for j in 0..self.features.n_cols() {
                let v = self.features.get(i, j);
                rec.push(if v.is_nan() { NA.to_string() } else { v.to_string() });
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidData(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        for (k, name) in KEY_COLUMNS.iter().enumerate() {
            if header.get(k) != Some(name) {
                return Err(Error::Schema(format!("column {} must be {name:?}", k + 1)));
            }
        }
        let names: Vec<String> = header.iter().skip(KEY_COLUMNS.len()).map(str::to_string).collect();
        let mut rows = Vec::new();
        let (mut ids, mut spk, mut lang, mut sev) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str, v: &str| {
                Error::InvalidData(format!("row {}: bad {what} {v:?}", line + 2))
            };
            ids.push(rec[0].to_string());
            spk.push(rec[1].to_string());
            lang.push(rec[2].to_string());
            sev.push(rec[3].parse::<u8>().map_err(|_| bad("severity", &rec[3]))?);
            let row = rec
                .iter()
                .skip(KEY_COLUMNS.len())
                .map(|c| {
                    if c == NA {
                        Ok(f64::NAN)
                    } else {
                        c.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad("value", c))
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::new(ids, spk, lang, sev, DataMatrix::from_rows(names, &rows)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureTable {
        let f = DataMatrix::from_columns(
            vec!["a".into(), "b".into()],
            vec![vec![1.5, f64::NAN], vec![0.1 + 0.2, -3e-12]],
        )
        .unwrap();
        FeatureTable::new(
            vec!["u2".into(), "u1".into()],
            vec!["s1".into(), "s2".into()],
            vec!["en".into(), "ko".into()],
            vec![0, 3],
            f,
        )
        .unwrap()
    }

    fn same(a: &FeatureTable, b: &FeatureTable) -> bool {
        a.utt_ids == b.utt_ids
            && a.severities == b.severities
            && a.features.names() == b.features.names()
            && a.features
                .columns()
                .iter()
                .flatten()
                .zip(b.features.columns().iter().flatten())
                .all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample();
        let text = t.to_csv().unwrap();
        assert!(text.contains(",NA,"));
        let back = FeatureTable::parse(&text).unwrap();
        assert!(same(&t, &back));
        assert_eq!(back.to_csv().unwrap(), text);
    }

    #[test]
    fn sorted_by_id() {
        assert_eq!(sample().sorted().utt_ids, vec!["u1", "u2"]);
    }

    #[test]
    fn rejects_bad_cells() {
        let bad = "utt_id,speaker,language,severity,a\nu1,s,en,0,oops\n";
        assert!(FeatureTable::parse(bad).is_err());
        let hdr = "id,speaker,language,severity,a\nu1,s,en,0,1\n";
        assert!(matches!(FeatureTable::parse(hdr), Err(Error::Schema(_))));
    }
}
