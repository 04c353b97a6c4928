use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Classifier, DataMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub eta: f64,
    pub min_child_weight: f64,
    pub lambda: f64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            rounds: 100,
            max_depth: 4,
            eta: 0.3,
            min_child_weight: 1.0,
            lambda: 1.0,
        }
    }
}

/// Side taken by rows whose split feature is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Present values `< threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        default: DefaultDirection,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        value: f64,
    },
}

/// Regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Indices of the nodes visited by `row`, root first.
    pub fn path(&self, row: &[f64]) -> Vec<usize> {
        let mut out = vec![0];
        let mut k = 0;
        while let Node::Split {
            feature,
            threshold,
            default,
            left,
            right,
            ..
        } = &self.nodes[k]
        {
            let v = row[*feature];
            let go_left = if v.is_nan() {
                *default == DefaultDirection::Left
            } else {
                v < *threshold
            };
            k = if go_left { *left } else { *right };
            out.push(k);
        }
        out
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        match self.nodes[*self.path(row).last().unwrap()] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("paths end at leaves"),
        }
    }
}

/// The winning split of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub default: DefaultDirection,
    pub gain: f64,
}

/// Second-order split gain with L2 regularization `lambda`.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr))
}

/// Midpoint between two distinct sorted values that still separates them.
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m > a {
        m
    } else {
        b
    }
}

/// Relative margin a gain must clear to replace the incumbent. Candidates
/// inducing the same partition accumulate their sums in different orders, so
/// mathematically equal gains can differ in the last bits.
const TIE_MARGIN: f64 = 1e-12;

struct Builder<'a> {
    x: &'a DataMatrix,
    g: &'a [f64],
    h: &'a [f64],
    params: &'a GbdtParams,
    sorted: Vec<Vec<usize>>,
    in_node: Vec<bool>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn best_split(&mut self, rows: &[usize]) -> Option<SplitCandidate> {
        for &i in rows {
            self.in_node[i] = true;
        }
        let mcw = self.params.min_child_weight;
        let lambda = self.params.lambda;
        let mut best: Option<SplitCandidate> = None;
        let mut best_gain = 0.0f64;
        for (j, order) in self.sorted.iter().enumerate() {
            let col = self.x.column(j);
            let present: Vec<usize> = order.iter().copied().filter(|&i| self.in_node[i]).collect();
            if present.len() < 2 {
                continue;
            }
            let (gp, hp) = present.iter().fold((0.0, 0.0), |(a, b), &i| (a + self.g[i], b + self.h[i]));
            // summed directly so a node without missing rows gets exact zeros
            let (gm, hm) = rows
                .iter()
                .filter(|&&i| col[i].is_nan())
                .fold((0.0, 0.0), |(a, b), &i| (a + self.g[i], b + self.h[i]));
            let (mut gl, mut hl) = (0.0, 0.0);
            for w in 0..present.len() - 1 {
                let i = present[w];
                gl += self.g[i];
                hl += self.h[i];
                let (a, b) = (col[i], col[present[w + 1]]);
                if a == b {
                    continue;
                }
                let threshold = midpoint(a, b);
                let (gr, hr) = (gp - gl, hp - hl);
                for (default, l, r) in [
                    (DefaultDirection::Left, (gl + gm, hl + hm), (gr, hr)),
                    (DefaultDirection::Right, (gl, hl), (gr + gm, hr + hm)),
                ] {
                    if l.1 < mcw || r.1 < mcw {
                        continue;
                    }
                    let gain = split_gain(l.0, l.1, r.0, r.1, lambda);
                    if gain > best_gain + TIE_MARGIN * best_gain.abs() {
                        best_gain = gain;
                        best = Some(SplitCandidate {
                            feature: j,
                            threshold,
                            default,
                            gain,
                        });
                    }
                }
            }
        }
        for &i in rows {
            self.in_node[i] = false;
        }
        best
    }

    fn leaf(&mut self, rows: &[usize]) -> usize {
        let (g, h) = rows.iter().fold((0.0, 0.0), |(a, b), &i| (a + self.g[i], b + self.h[i]));
        self.nodes.push(Node::Leaf {
            value: -g / (h + self.params.lambda) * self.params.eta,
        });
        self.nodes.len() - 1
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        if depth >= self.params.max_depth || rows.len() < 2 {
            return self.leaf(&rows);
        }
        let Some(s) = self.best_split(&rows) else {
            return self.leaf(&rows);
        };
        let col = self.x.column(s.feature);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| {
            let v = col[i];
            if v.is_nan() {
                s.default == DefaultDirection::Left
            } else {
                v < s.threshold
            }
        });
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: s.feature,
            threshold: s.threshold,
            default: s.default,
            left,
            right,
            gain: s.gain,
        };
        id
    }
}

/// Fits one regression tree to gradient/hessian statistics by exact greedy
/// search. Candidates are visited by feature index, then ascending
/// threshold, then LEFT before RIGHT; a candidate replaces the incumbent only
/// with larger gain beyond a relative rounding margin. Leaf values are scaled by `eta`.
pub fn fit_tree(x: &DataMatrix, g: &[f64], h: &[f64], params: &GbdtParams) -> Tree {
    let n = x.n_rows();
    let sorted = (0..x.n_cols())
        .map(|j| {
            let col = x.column(j);
            let mut idx: Vec<usize> = (0..n).filter(|&i| !col[i].is_nan()).collect();
            idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            idx
        })
        .collect();
    let mut b = Builder {
        x,
        g,
        h,
        params,
        sorted,
        in_node: vec![false; n],
        nodes: Vec::new(),
    };
    b.build((0..n).collect(), 0);
    Tree { nodes: b.nodes }
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = k;
        }
    }
    best
}

/// Softmax gradient-boosted trees: one tree per class per round.
#[derive(Debug, Clone, PartialEq)]
pub struct Gbdt {
    pub feature_names: Vec<String>,
    pub n_classes: usize,
    pub params: GbdtParams,
    /// `trees[round][class]`.
    pub trees: Vec<Vec<Tree>>,
}

const FORMAT_HEADER: &str = "dyskit-gbdt 1";

impl Gbdt {
    pub fn train(x: &DataMatrix, y: &[usize], n_classes: usize, params: &GbdtParams) -> Result<Self> {
        if y.len() != x.n_rows() {
            return Err(Error::Schema(format!("{} labels for {} rows", y.len(), x.n_rows())));
        }
        if n_classes == 0 || y.iter().any(|&c| c >= n_classes) {
            return Err(Error::InvalidData("label outside 0..n_classes".into()));
        }
        let n = x.n_rows();
        let mut margins = vec![vec![0.0; n_classes]; n];
        let mut trees = Vec::with_capacity(params.rounds);
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        for _ in 0..params.rounds {
            let probs: Vec<Vec<f64>> = margins.iter().map(|m| softmax(m)).collect();
            let mut round = Vec::with_capacity(n_classes);
            for k in 0..n_classes {
                for i in 0..n {
                    let p = probs[i][k];
                    g[i] = p - f64::from(u8::from(y[i] == k));
                    h[i] = (2.0 * p * (1.0 - p)).max(1e-16);
                }
                round.push(fit_tree(x, &g, &h, params));
            }
            for (i, m) in margins.iter_mut().enumerate() {
                let row = x.row(i);
                for (k, t) in round.iter().enumerate() {
                    m[k] += t.predict(&row);
                }
            }
            trees.push(round);
        }
        Ok(Self {
            feature_names: x.names().to_vec(),
            n_classes,
            params: params.clone(),
            trees,
        })
    }

    /// Copy keeping only the first `rounds` boosting rounds.
    pub fn truncated(&self, rounds: usize) -> Self {
        let mut c = self.clone();
        c.trees.truncate(rounds);
        c
    }

    pub fn margins(&self, row: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.n_classes];
        for round in &self.trees {
            for (k, t) in round.iter().enumerate() {
                m[k] += t.predict(row);
            }
        }
        m
    }

    /// Class probabilities for a row in training-column order.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        softmax(&self.margins(row))
    }

    /// Row given as names and values. Names the model was not trained on
    /// are a schema error; model features not supplied count as missing.
    pub fn predict_proba_named(&self, names: &[String], values: &[f64]) -> Result<Vec<f64>> {
        Ok(self.predict_proba(&self.align_row(names, values)?))
    }

    fn align_row(&self, names: &[String], values: &[f64]) -> Result<Vec<f64>> {
        let index: HashMap<&str, usize> = self
            .feature_names
            .iter()
            .enumerate()
            .map(|(k, n)| (n.as_str(), k))
            .collect();
        let mut row = vec![f64::NAN; self.feature_names.len()];
        for (n, v) in names.iter().zip(values) {
            let k = index
                .get(n.as_str())
                .ok_or_else(|| Error::Schema(format!("feature {n:?} unknown to the model")))?;
            row[*k] = *v;
        }
        Ok(row)
    }

    /// Probability rows for every row of `x`, matched by column name.
    pub fn predict_proba_matrix(&self, x: &DataMatrix) -> Result<Vec<Vec<f64>>> {
        if x.names() == self.feature_names.as_slice() {
            return Ok((0..x.n_rows()).map(|i| self.predict_proba(&x.row(i))).collect());
        }
        (0..x.n_rows())
            .map(|i| self.predict_proba_named(x.names(), &x.row(i)))
            .collect()
    }

    /// Mean negative log-likelihood of `y`.
    pub fn log_loss(&self, x: &DataMatrix, y: &[usize]) -> Result<f64> {
        let p = self.predict_proba_matrix(x)?;
        Ok(p.iter()
            .zip(y)
            .map(|(p, &c)| -p[c].max(1e-300).ln())
            .sum::<f64>()
            / y.len().max(1) as f64)
    }

    /// Total split gain per training feature.
    pub fn gain_importance(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.feature_names.len()];
        for t in self.trees.iter().flatten() {
            for n in &t.nodes {
                if let Node::Split { feature, gain, .. } = n {
                    out[*feature] += gain;
                }
            }
        }
        out
    }

    /// Versioned line-oriented text. Floats use the shortest representation
    /// that parses back to the same bits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "{FORMAT_HEADER}");
        let _ = writeln!(s, "classes {}", self.n_classes);
        let _ = writeln!(
            s,
            "params {} {} {} {} {}",
            p.rounds, p.max_depth, p.eta, p.min_child_weight, p.lambda
        );
        let _ = writeln!(s, "features {}", self.feature_names.len());
        for n in &self.feature_names {
            let _ = writeln!(s, "feature {}", serde_json::to_string(n).unwrap());
        }
        let _ = writeln!(s, "rounds {}", self.trees.len());
        for (r, round) in self.trees.iter().enumerate() {
            for (k, t) in round.iter().enumerate() {
                let _ = writeln!(s, "tree {r} {k} {}", t.nodes.len());
                for (id, n) in t.nodes.iter().enumerate() {
                    match n {
                        Node::Split {
                            feature,
                            threshold,
                            default,
                            left,
                            right,
                            gain,
                        } => {
                            let d = if *default == DefaultDirection::Left { "L" } else { "R" };
                            let _ = writeln!(s, "{id} split {feature} {threshold} {d} {left} {right} {gain}");
                        }
                        Node::Leaf { value } => {
                            let _ = writeln!(s, "{id} leaf {value}");
                        }
                    }
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim_end()));
        let bad = |line: usize, msg: &str| Error::Parse {
            line,
            message: format!("model: {msg}"),
        };
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(0, &format!("missing {what}")));
        let (ln, h) = next("header")?;
        if h != FORMAT_HEADER {
            return Err(bad(ln, "unsupported format or version"));
        }
        fn field<T: std::str::FromStr>(line: usize, s: Option<&str>) -> Result<T> {
            s.and_then(|v| v.parse().ok()).ok_or_else(|| Error::Parse {
                line,
                message: format!("model: bad field {s:?}"),
            })
        }
        let keyed = |(ln, l): (usize, &str), key: &str| -> Result<Vec<String>> {
            let mut it = l.split(' ');
            if it.next() != Some(key) {
                return Err(bad(ln, &format!("expected {key}")));
            }
            Ok(it.map(str::to_string).collect())
        };
        let c = next("classes")?;
        let n_classes: usize = field(c.0, keyed(c, "classes")?.first().map(String::as_str))?;
        let pl = next("params")?;
        let pv = keyed(pl, "params")?;
        let params = GbdtParams {
            rounds: field(pl.0, pv.first().map(String::as_str))?,
            max_depth: field(pl.0, pv.get(1).map(String::as_str))?,
            eta: field(pl.0, pv.get(2).map(String::as_str))?,
            min_child_weight: field(pl.0, pv.get(3).map(String::as_str))?,
            lambda: field(pl.0, pv.get(4).map(String::as_str))?,
        };
        let fl = next("features")?;
        let nf: usize = field(fl.0, keyed(fl, "features")?.first().map(String::as_str))?;
        let mut feature_names = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, l) = next("feature")?;
            let name = l
                .strip_prefix("feature ")
                .and_then(|q| serde_json::from_str::<String>(q).ok())
                .ok_or_else(|| bad(ln, "bad feature line"))?;
            feature_names.push(name);
        }
        let rl = next("rounds")?;
        let nr: usize = field(rl.0, keyed(rl, "rounds")?.first().map(String::as_str))?;
        let mut trees = Vec::with_capacity(nr);
        for r in 0..nr {
            let mut round = Vec::with_capacity(n_classes);
            for k in 0..n_classes {
                let tl = next("tree")?;
                let tv = keyed(tl, "tree")?;
                let (tr, tk, nn): (usize, usize, usize) = (
                    field(tl.0, tv.first().map(String::as_str))?,
                    field(tl.0, tv.get(1).map(String::as_str))?,
                    field(tl.0, tv.get(2).map(String::as_str))?,
                );
                if (tr, tk) != (r, k) {
                    return Err(bad(tl.0, "trees out of order"));
                }
                let mut nodes = Vec::with_capacity(nn);
                for id in 0..nn {
                    let (ln, l) = next("node")?;
                    let f: Vec<&str> = l.split(' ').collect();
                    if field::<usize>(ln, f.first().copied())? != id {
                        return Err(bad(ln, "node ids out of order"));
                    }
                    let node = match f.get(1).copied() {
                        Some("leaf") => Node::Leaf {
                            value: field(ln, f.get(2).copied())?,
                        },
                        Some("split") => {
                            let feature: usize = field(ln, f.get(2).copied())?;
                            let left: usize = field(ln, f.get(5).copied())?;
                            let right: usize = field(ln, f.get(6).copied())?;
                            if feature >= nf || left >= nn || right >= nn {
                                return Err(bad(ln, "index out of range"));
                            }
                            Node::Split {
                                feature,
                                threshold: field(ln, f.get(3).copied())?,
                                default: match f.get(4).copied() {
                                    Some("L") => DefaultDirection::Left,
                                    Some("R") => DefaultDirection::Right,
                                    _ => return Err(bad(ln, "bad default direction")),
                                },
                                left,
                                right,
                                gain: field(ln, f.get(7).copied())?,
                            }
                        }
                        _ => return Err(bad(ln, "unknown node kind")),
                    };
                    nodes.push(node);
                }
                round.push(Tree { nodes });
            }
            trees.push(round);
        }
        Ok(Self {
            feature_names,
            n_classes,
            params,
            trees,
        })
    }
}

impl Classifier for Gbdt {
    fn predict_labels(&self, x: &DataMatrix) -> Result<Vec<usize>> {
        Ok(self.predict_proba_matrix(x)?.iter().map(|p| argmax(p)).collect())
    }
}
