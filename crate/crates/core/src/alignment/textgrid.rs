use std::fmt::Write as _;

use super::{missing_tier, LanguageInventory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub t0: f64,
    pub t1: f64,
    pub label: String,
}

impl Interval {
    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tier {
    pub name: String,
    pub xmin: f64,
    pub xmax: f64,
    pub intervals: Vec<Interval>,
}

/// Interval tiers of a TextGrid. Point tiers are dropped at parse time.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub xmin: f64,
    pub xmax: f64,
    pub tiers: Vec<Tier>,
}

impl Alignment {
    /// Single-tier alignment from `(t0, t1, label)` triples.
    pub fn from_intervals(tier: &str, intervals: &[(f64, f64, String)]) -> Result<Self> {
        let ivs: Vec<Interval> = intervals
            .iter()
            .map(|(t0, t1, l)| Interval {
                t0: *t0,
                t1: *t1,
                label: l.clone(),
            })
            .collect();
        let xmin = ivs.first().map_or(0.0, |i| i.t0.min(0.0));
        let xmax = ivs.last().map_or(0.0, |i| i.t1);
        check_tier(&ivs, 0)?;
        Ok(Self {
            xmin,
            xmax,
            tiers: vec![Tier {
                name: tier.to_string(),
                xmin,
                xmax,
                intervals: ivs,
            }],
        })
    }

    pub fn total_duration(&self) -> f64 {
        self.xmax - self.xmin
    }

    /// Case-insensitive tier lookup.
    pub fn tier(&self, name: &str) -> Option<&Tier> {
        self.tiers.iter().find(|t| t.name.eq_ignore_ascii_case(name))
    }

    pub fn phone_tier(&self, inv: &LanguageInventory) -> Result<&Tier> {
        self.tier(&inv.phone_tier).ok_or_else(|| missing_tier(&inv.phone_tier))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Str(String),
    Num(f64),
    Flag(bool),
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            '"' => {
                let start = line;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            s.push('"');
                        }
                        Some('"') => break,
                        Some(ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            s.push(ch);
                        }
                        None => {
                            return Err(Error::Parse {
                                line: start,
                                message: "unterminated string".into(),
                            })
                        }
                    }
                }
                out.push((Token::Str(s), start));
            }
            '!' => {
                for ch in chars.by_ref() {
                    if ch == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '[' => {
                for ch in chars.by_ref() {
                    if ch == ']' {
                        break;
                    }
                }
            }
            '<' => {
                let mut w = String::new();
                for ch in chars.by_ref() {
                    if ch == '>' {
                        break;
                    }
                    w.push(ch);
                }
                out.push((Token::Flag(w.trim() == "exists"), line));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut w = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '"' || n == '[' || n == '<' || n == '!' {
                        break;
                    }
                    w.push(n);
                    chars.next();
                }
                if let Ok(v) = w.parse::<f64>() {
                    out.push((Token::Num(v), line));
                }
            }
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<(Token, usize)>,
    pos: usize,
}

impl Cursor {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(1, |t| t.1)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line(),
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn num(&mut self, what: &str) -> Result<f64> {
        match self.next() {
            Some(Token::Num(v)) => Ok(v),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("expected number for {what}")))
            }
        }
    }

    fn string(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Token::Str(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("expected string for {what}")))
            }
        }
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let v = self.num(what)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(self.err(format!("invalid {what} {v}")));
        }
        Ok(v as usize)
    }
}

fn check_tier(ivs: &[Interval], line: usize) -> Result<()> {
    let mut prev_end = f64::NEG_INFINITY;
    for iv in ivs {
        if !(iv.t0 < iv.t1) {
            return Err(Error::Parse {
                line,
                message: format!("interval [{}, {}] has xmin >= xmax", iv.t0, iv.t1),
            });
        }
        if iv.t0 < prev_end - 1e-9 {
            return Err(Error::Parse {
                line,
                message: format!("interval starting at {} overlaps the previous one", iv.t0),
            });
        }
        prev_end = iv.t1;
    }
    Ok(())
}

/// Parses the long or short TextGrid text format.
pub fn parse_textgrid(text: &str) -> Result<Alignment> {
    let mut c = Cursor {
        toks: tokenize(text)?,
        pos: 0,
    };
    let file_type = c.string("file type").map_err(|_| c.err("malformed header"))?;
    let class = c.string("object class").map_err(|_| c.err("malformed header"))?;
    if !file_type.starts_with("ooTextFile") || class != "TextGrid" {
        return Err(Error::Parse {
            line: 1,
            message: format!("malformed header: {file_type:?} / {class:?}"),
        });
    }
    let xmin = c.num("xmin")?;
    let xmax = c.num("xmax")?;
    if xmin > xmax {
        return Err(c.err(format!("xmin {xmin} > xmax {xmax}")));
    }
    let has_tiers = match c.toks.get(c.pos) {
        Some((Token::Flag(b), _)) => {
            let b = *b;
            c.pos += 1;
            b
        }
        _ => true,
    };
    let mut tiers = Vec::new();
    if has_tiers {
        let n = c.count("tier count")?;
        for _ in 0..n {
            let tier_class = c.string("tier class")?;
            let name = c.string("tier name")?;
            let t_min = c.num("tier xmin")?;
            let t_max = c.num("tier xmax")?;
            if t_min > t_max {
                return Err(c.err(format!("tier {name:?}: xmin {t_min} > xmax {t_max}")));
            }
            let count = c.count("interval count")?;
            match tier_class.as_str() {
                "IntervalTier" => {
                    let mut ivs = Vec::with_capacity(count);
                    let mut prev_end = f64::NEG_INFINITY;
                    for _ in 0..count {
                        let line = c.line();
                        let t0 = c.num("interval xmin")?;
                        let t1 = c.num("interval xmax")?;
                        let label = c.string("interval text")?;
                        let iv = Interval {
                            t0,
                            t1,
                            label: label.trim().to_string(),
                        };
                        check_tier(std::slice::from_ref(&iv), line)?;
                        if t0 < prev_end - 1e-9 {
                            return Err(Error::Parse {
                                line,
                                message: format!(
                                    "tier {name:?}: interval starting at {t0} overlaps the previous one ending at {prev_end}"
                                ),
                            });
                        }
                        prev_end = t1;
                        ivs.push(iv);
                    }
                    tiers.push(Tier {
                        name,
                        xmin: t_min,
                        xmax: t_max,
                        intervals: ivs,
                    });
                }
                "TextTier" => {
                    for _ in 0..count {
                        c.num("point time")?;
                        c.string("point mark")?;
                    }
                }
                other => return Err(c.err(format!("unknown tier class {other:?}"))),
            }
        }
    }
    Ok(Alignment { xmin, xmax, tiers })
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Writes the long text format. Numbers use the shortest round-trip form.
pub fn serialize_textgrid(a: &Alignment) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n");
    let _ = writeln!(s, "xmin = {}\nxmax = {}", a.xmin, a.xmax);
    if a.tiers.is_empty() {
        let _ = writeln!(s, "tiers? <absent>");
        return s;
    }
    let _ = writeln!(s, "tiers? <exists>\nsize = {}\nitem []:", a.tiers.len());
    for (i, t) in a.tiers.iter().enumerate() {
        let _ = writeln!(s, "    item [{}]:", i + 1);
        let _ = writeln!(s, "        class = \"IntervalTier\"");
        let _ = writeln!(s, "        name = {}", quote(&t.name));
        let _ = writeln!(s, "        xmin = {}\n        xmax = {}", t.xmin, t.xmax);
        let _ = writeln!(s, "        intervals: size = {}", t.intervals.len());
        for (k, iv) in t.intervals.iter().enumerate() {
            let _ = writeln!(s, "        intervals [{}]:", k + 1);
            let _ = writeln!(s, "            xmin = {}", iv.t0);
            let _ = writeln!(s, "            xmax = {}", iv.t1);
            let _ = writeln!(s, "            text = {}", quote(&iv.label));
        }
    }
    s
}
