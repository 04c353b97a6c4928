//! Goodness-of-pronunciation scoring over frame-level phoneme logits.

mod io;

pub use io::{read_logits, read_segments, write_logits_binary, write_logits_csv, write_segments};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{kendall_tau, CorrelationResult};

/// Frames × classes logits with class labels and frame shift (s).
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMatrix {
    data: Vec<f64>,
    frames: usize,
    labels: Vec<String>,
    pub frame_shift: f64,
}

impl LogitMatrix {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<String>, frame_shift: f64) -> Result<Self> {
        let q = labels.len();
        if q < 2 {
            return Err(Error::InvalidData("logits need at least 2 classes".into()));
        }
        if let Some((f, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != q) {
            return Err(Error::InvalidData(format!(
                "frame {f} has {} values, expected {q}",
                r.len()
            )));
        }
        let data: Vec<f64> = rows.concat();
        Self::from_flat(data, labels, frame_shift)
    }

    pub fn from_flat(data: Vec<f64>, labels: Vec<String>, frame_shift: f64) -> Result<Self> {
        let q = labels.len();
        if q < 2 {
            return Err(Error::InvalidData("logits need at least 2 classes".into()));
        }
        if data.len() % q != 0 {
            return Err(Error::InvalidData(format!(
                "{} values is not a multiple of {q} classes",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite logit".into()));
        }
        Ok(Self {
            frames: data.len() / q,
            data,
            labels,
            frame_shift,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn classes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, f: usize) -> &[f64] {
        let q = self.classes();
        &self.data[f * q..(f + 1) * q]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn class_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Lookup(format!("phoneme {label:?} not in logit classes")))
    }
}

/// A phoneme occupying frames `start..end`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhoneSegment {
    pub label: String,
    #[serde(rename = "start_frame")]
    pub start: usize,
    #[serde(rename = "end_frame")]
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GopMethod {
    Gmm,
    Nn,
    Dnn,
    Entropy,
    Margin,
    MaxLogit,
    LogitMargin,
}

impl GopMethod {
    pub const ALL: [GopMethod; 7] = [
        GopMethod::Gmm,
        GopMethod::Nn,
        GopMethod::Dnn,
        GopMethod::Entropy,
        GopMethod::Margin,
        GopMethod::MaxLogit,
        GopMethod::LogitMargin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GopMethod::Gmm => "GMM",
            GopMethod::Nn => "NN",
            GopMethod::Dnn => "DNN",
            GopMethod::Entropy => "ENTROPY",
            GopMethod::Margin => "MARGIN",
            GopMethod::MaxLogit => "MAXLOGIT",
            GopMethod::LogitMargin => "LOGITMARGIN",
        }
    }
}

impl fmt::Display for GopMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GopMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GopMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown GoP method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Normalization {
    None,
    Scale,
    Prior,
}

impl Normalization {
    pub const ALL: [Normalization; 3] = [Normalization::None, Normalization::Scale, Normalization::Prior];

    pub fn name(self) -> &'static str {
        match self {
            Normalization::None => "NONE",
            Normalization::Scale => "SCALE",
            Normalization::Prior => "PRIOR",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Normalization::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown normalization {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GopConfig {
    pub method: GopMethod,
    pub normalization: Normalization,
    pub temperature: f64,
    /// Class priors in logit-label order; needed for PRIOR and DNN.
    pub priors: Option<Vec<f64>>,
}

impl GopConfig {
    pub fn new(method: GopMethod, normalization: Normalization) -> Self {
        Self {
            method,
            normalization,
            temperature: 1.0,
            priors: None,
        }
    }

    pub fn with_priors(mut self, priors: Vec<f64>) -> Self {
        self.priors = Some(priors);
        self
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    fn checked_priors(&self, classes: usize) -> Result<&[f64]> {
        let p = self
            .priors
            .as_deref()
            .ok_or_else(|| Error::Config("class priors required".into()))?;
        if p.len() != classes {
            return Err(Error::Config(format!(
                "{} priors for {classes} classes",
                p.len()
            )));
        }
        if p.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("priors must be positive".into()));
        }
        if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("priors must sum to 1".into()));
        }
        Ok(p)
    }

    pub fn validate(&self, classes: usize) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::Config("temperature must be positive".into()));
        }
        if self.normalization == Normalization::Prior || self.method == GopMethod::Dnn {
            self.checked_priors(classes)?;
        }
        Ok(())
    }
}

/// Applies the configured logit normalization.
pub fn normalize(l: &LogitMatrix, cfg: &GopConfig) -> Result<LogitMatrix> {
    cfg.validate(l.classes())?;
    let mut out = l.clone();
    match cfg.normalization {
        Normalization::None => {}
        Normalization::Scale => out.data.iter_mut().for_each(|v| *v /= cfg.temperature),
        Normalization::Prior => {
            let lp: Vec<f64> = cfg.checked_priors(l.classes())?.iter().map(|p| p.ln()).collect();
            let q = l.classes();
            for (k, v) in out.data.iter_mut().enumerate() {
                *v -= lp[k % q];
            }
        }
    }
    Ok(out)
}

fn log_softmax(row: &[f64]) -> Vec<f64> {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    row.iter().map(|v| v - lse).collect()
}

fn max_excluding(x: &[f64], skip: usize) -> f64 {
    x.iter()
        .enumerate()
        .filter(|(k, _)| *k != skip)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_segment(l: &LogitMatrix, seg: &PhoneSegment) -> Result<usize> {
    if seg.start >= seg.end || seg.end > l.frames() {
        return Err(Error::InvalidData(format!(
            "segment {:?} frames {}..{} outside 0..{}",
            seg.label,
            seg.start,
            seg.end,
            l.frames()
        )));
    }
    l.class_index(&seg.label)
}

/// Scores one segment on already normalized logits.
fn score_normalized(l: &LogitMatrix, seg: &PhoneSegment, cfg: &GopConfig) -> Result<f64> {
    let p = check_segment(l, seg)?;
    let q = l.classes();
    let n = (seg.end - seg.start) as f64;
    let mut mean_logit = vec![0.0; q];
    let mut mean_prob = vec![0.0; q];
    let mut mean_logprob_p = 0.0;
    for f in seg.start..seg.end {
        let row = l.row(f);
        let ls = log_softmax(row);
        mean_logprob_p += ls[p] / n;
        for k in 0..q {
            mean_logit[k] += row[k] / n;
            mean_prob[k] += ls[k].exp() / n;
        }
    }
    let score = match cfg.method {
        GopMethod::Gmm => mean_logprob_p,
        GopMethod::Nn => {
            let best = mean_prob.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            mean_prob[p].ln() - best.ln()
        }
        GopMethod::Dnn => mean_prob[p] / cfg.checked_priors(q)?[p],
        GopMethod::Entropy => -mean_prob
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|v| v * v.ln())
            .sum::<f64>(),
        GopMethod::Margin => mean_prob[p] - max_excluding(&mean_prob, p),
        GopMethod::MaxLogit => mean_logit[p],
        GopMethod::LogitMargin => mean_logit[p] - max_excluding(&mean_logit, p),
    };
    Ok(score)
}

/// GoP of one phoneme segment.
pub fn score_phoneme(l: &LogitMatrix, seg: &PhoneSegment, cfg: &GopConfig) -> Result<f64> {
    score_normalized(&normalize(l, cfg)?, seg, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GopScore {
    /// Per-segment `(label, score)` in input order.
    pub phonemes: Vec<(String, f64)>,
    /// Unweighted mean of the per-segment scores.
    pub utterance: f64,
}

pub fn score_utterance(l: &LogitMatrix, segments: &[PhoneSegment], cfg: &GopConfig) -> Result<GopScore> {
    if segments.is_empty() {
        return Err(Error::InvalidData("no phoneme segments to score".into()));
    }
    let norm = normalize(l, cfg)?;
    let phonemes = segments
        .iter()
        .map(|s| Ok((s.label.clone(), score_normalized(&norm, s, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    let utterance = phonemes.iter().map(|p| p.1).sum::<f64>() / phonemes.len() as f64;
    Ok(GopScore { phonemes, utterance })
}

/// Kendall tau-b between utterance scores and severity; `None` when either
/// side is constant.
pub fn severity_correlation(scores: &[f64], severities: &[f64]) -> Result<Option<CorrelationResult>> {
    match kendall_tau(scores, severities) {
        Ok(r) => Ok(Some(r)),
        Err(Error::Undefined(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeRank {
    pub label: String,
    pub tau: f64,
    pub p_value: f64,
    pub utterances: usize,
}

/// Per-label Kendall tau between phoneme scores and utterance severity,
/// sorted ascending (most severity-degraded label first). Scores of a label
/// are averaged within each utterance; labels seen in fewer than
/// `min_support` utterances or with undefined tau are omitted.
pub fn phoneme_ranking(
    utterances: &[(Vec<(String, f64)>, f64)],
    min_support: usize,
) -> Vec<PhonemeRank> {
    let mut by_label: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (phones, severity) in utterances {
        let mut per_utt: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for (l, s) in phones {
            let e = per_utt.entry(l.as_str()).or_default();
            e.0 += s;
            e.1 += 1;
        }
        for (l, (sum, n)) in per_utt {
            let e = by_label.entry(l).or_default();
            e.0.push(sum / n as f64);
            e.1.push(*severity);
        }
    }
    let mut out: Vec<PhonemeRank> = by_label
        .into_iter()
        .filter(|(_, (s, _))| s.len() >= min_support.max(2))
        .filter_map(|(l, (s, sev))| {
            let r = kendall_tau(&s, &sev).ok()?;
            Some(PhonemeRank {
                label: l.to_string(),
                tau: r.coefficient,
                p_value: r.p_value,
                utterances: s.len(),
            })
        })
        .collect();
    out.sort_by(|a, b| a.tau.total_cmp(&b.tau).then_with(|| a.label.cmp(&b.label)));
    out
}
