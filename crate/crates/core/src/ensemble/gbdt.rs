//! Squared-loss gradient boosting over exact-greedy regression trees.
//!
//! Each round fits a depth-limited tree to the current residuals. Splits
//! are `x[feature] <= threshold` (left) with the threshold halfway between
//! adjacent distinct sorted values; the chosen split maximizes the reduction
//! in squared error, ties going to the lower feature index and then the
//! lower threshold. Leaves hold the mean residual of their rows. There is no
//! row or feature subsampling, so fitting is fully deterministic.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const FORMAT_HEADER: &str = "cfbench-gbdt v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        GbdtConfig { n_trees: 100, max_depth: 3, learning_rate: 0.1, min_leaf: 20 }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::Config("tree depth must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!("learning rate {} outside (0, 1]", self.learning_rate)));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

/// Feature rows with regression labels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

impl ResidualDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map(Vec::len).unwrap_or(0)
    }

    pub fn push(&mut self, row: Vec<f64>, label: f64) {
        self.features.push(row);
        self.labels.push(label);
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.len() != self.labels.len() {
            return Err(Error::Contract("feature/label count mismatch".into()));
        }
        let d = self.n_features();
        if self.features.iter().any(|r| r.len() != d) {
            return Err(Error::Contract("ragged feature rows".into()));
        }
        if self.labels.iter().chain(self.features.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::Contract("non-finite value in residual dataset".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub n_features: usize,
    pub base: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl GbdtModel {
    /// A model that always predicts zero.
    pub fn zero(n_features: usize) -> Self {
        GbdtModel { n_features, base: 0.0, learning_rate: 1.0, trees: Vec::new() }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_with(row, self.trees.len())
    }

    /// Prediction using only the first `n_trees` trees.
    pub fn predict_with(&self, row: &[f64], n_trees: usize) -> f64 {
        let sum: f64 = self.trees.iter().take(n_trees).map(|t| t.predict(row)).sum();
        self.base + self.learning_rate * sum
    }

    /// One line per node: `tree node split feature threshold left right` or
    /// `tree node leaf value`.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{FORMAT_HEADER}")?;
        writeln!(w, "n_features {}", self.n_features)?;
        writeln!(w, "base {}", self.base)?;
        writeln!(w, "learning_rate {}", self.learning_rate)?;
        writeln!(w, "trees {}", self.trees.len())?;
        for (ti, tree) in self.trees.iter().enumerate() {
            for (ni, node) in tree.nodes.iter().enumerate() {
                match node {
                    Node::Split { feature, threshold, left, right } => {
                        writeln!(w, "{ti} {ni} split {feature} {threshold} {left} {right}")?
                    }
                    Node::Leaf { value } => writeln!(w, "{ti} {ni} leaf {value}")?,
                }
            }
        }
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing `{name}`")))??;
            Ok(line)
        };
        let header = next("header")?;
        if header.trim() != FORMAT_HEADER {
            return Err(Error::Parse(format!("unsupported model header `{}`", header.trim())));
        }
        let field = |line: String, name: &str| -> Result<String> {
            line.trim()
                .strip_prefix(name)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| Error::Parse(format!("expected `{name}`")))
        };
        let bad = |what: &str| Error::Parse(format!("bad {what}"));
        let n_features: usize = field(next("n_features")?, "n_features")?.parse().map_err(|_| bad("n_features"))?;
        let base: f64 = field(next("base")?, "base")?.parse().map_err(|_| bad("base"))?;
        let learning_rate: f64 = field(next("learning_rate")?, "learning_rate")?.parse().map_err(|_| bad("learning_rate"))?;
        let n_trees: usize = field(next("trees")?, "trees")?.parse().map_err(|_| bad("trees"))?;
        let mut trees: Vec<Tree> = vec![Tree { nodes: Vec::new() }; n_trees];
        for line in lines {
            let line = line?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.is_empty() {
                continue;
            }
            let ti: usize = parts[0].parse().map_err(|_| bad("tree id"))?;
            let ni: usize = parts.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("node id"))?;
            let tree = trees.get_mut(ti).ok_or_else(|| bad("tree id"))?;
            if ni != tree.nodes.len() {
                return Err(Error::Parse(format!("node {ni} of tree {ti} out of order")));
            }
            let node = match (parts.get(2).copied(), parts.len()) {
                (Some("leaf"), 4) => Node::Leaf { value: parts[3].parse().map_err(|_| bad("leaf value"))? },
                (Some("split"), 7) => Node::Split {
                    feature: parts[3].parse().map_err(|_| bad("feature"))?,
                    threshold: parts[4].parse().map_err(|_| bad("threshold"))?,
                    left: parts[5].parse().map_err(|_| bad("left child"))?,
                    right: parts[6].parse().map_err(|_| bad("right child"))?,
                },
                _ => return Err(Error::Parse(format!("bad node line `{line}`"))),
            };
            tree.nodes.push(node);
        }
        for (ti, t) in trees.iter().enumerate() {
            if t.nodes.is_empty() {
                return Err(Error::Parse(format!("tree {ti} has no nodes")));
            }
            for n in &t.nodes {
                if let Node::Split { feature, left, right, .. } = *n {
                    if feature >= n_features || left >= t.nodes.len() || right >= t.nodes.len() {
                        return Err(Error::Parse(format!("tree {ti} references a missing node or feature")));
                    }
                }
            }
        }
        Ok(GbdtModel { n_features, base, learning_rate, trees })
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn best_split(x: &[Vec<f64>], r: &[f64], idx: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    let n = idx.len();
    if n < 2 * min_leaf {
        return None;
    }
    let total: f64 = idx.iter().map(|&i| r[i]).sum();
    let node_sse: f64 = {
        let m = total / n as f64;
        idx.iter().map(|&i| (r[i] - m).powi(2)).sum()
    };
    let parent = total * total / n as f64;
    let n_features = x[idx[0]].len();
    let per_feature: Vec<Option<(f64, usize, Vec<usize>)>> = (0..n_features)
        .into_par_iter()
        .map(|f| {
            let mut order = idx.to_vec();
            order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
            let mut best: Option<(f64, usize)> = None;
            let mut left_sum = 0.0;
            for pos in 1..n {
                left_sum += r[order[pos - 1]];
                if pos < min_leaf || n - pos < min_leaf {
                    continue;
                }
                if x[order[pos - 1]][f] >= x[order[pos]][f] {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / pos as f64 + right_sum * right_sum / (n - pos) as f64 - parent;
                if best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, pos));
                }
            }
            best.map(|(g, pos)| (g, pos, order))
        })
        .collect();

    let mut best: Option<(f64, usize, usize, Vec<usize>)> = None;
    for (f, cand) in per_feature.into_iter().enumerate() {
        if let Some((gain, pos, order)) = cand {
            if best.as_ref().is_none_or(|b| gain > b.0) {
                best = Some((gain, f, pos, order));
            }
        }
    }

    let (gain, feature, pos, order) = best?;
    if !(gain > 1e-12 * (1.0 + node_sse)) {
        return None;
    }
    let (lo, hi) = (x[order[pos - 1]][feature], x[order[pos]][feature]);
    let mut threshold = lo + 0.5 * (hi - lo);
    if threshold >= hi {
        threshold = lo;
    }
    let (left, right) = order.split_at(pos);
    Some(SplitChoice { feature, threshold, left: left.to_vec(), right: right.to_vec() })
}

fn grow(x: &[Vec<f64>], r: &[f64], idx: &[usize], depth: usize, cfg: &GbdtConfig, nodes: &mut Vec<Node>) -> usize {
    let me = nodes.len();
    let mean = idx.iter().map(|&i| r[i]).sum::<f64>() / idx.len() as f64;
    nodes.push(Node::Leaf { value: mean });
    if depth >= cfg.max_depth {
        return me;
    }
    if let Some(s) = best_split(x, r, idx, cfg.min_leaf) {
        let left = grow(x, r, &s.left, depth + 1, cfg, nodes);
        let right = grow(x, r, &s.right, depth + 1, cfg, nodes);
        nodes[me] = Node::Split { feature: s.feature, threshold: s.threshold, left, right };
    }
    me
}

/// Fits a single regression tree to `targets`.
pub fn fit_tree(features: &[Vec<f64>], targets: &[f64], cfg: &GbdtConfig) -> Tree {
    let idx: Vec<usize> = (0..targets.len()).collect();
    let mut nodes = Vec::new();
    grow(features, targets, &idx, 0, cfg, &mut nodes);
    Tree { nodes }
}

/// Gradient boosting with squared loss, starting from zero. Constant labels
/// give a tree-free model predicting that constant. Stops early once a round
/// finds no split, since further trees would leave predictions unchanged.
pub fn fit_gbdt(data: &ResidualDataset, cfg: &GbdtConfig) -> Result<GbdtModel> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Fit("empty residual dataset".into()));
    }
    data.validate()?;
    let mut model = GbdtModel { n_features: data.n_features(), base: 0.0, learning_rate: cfg.learning_rate, trees: Vec::new() };
    let first = data.labels[0];
    if data.labels.iter().all(|&y| y == first) {
        model.base = first;
        return Ok(model);
    }

    let mut pred = vec![0.0; data.len()];
    for _ in 0..cfg.n_trees {
        let residual: Vec<f64> = data.labels.iter().zip(&pred).map(|(y, p)| y - p).collect();
        let tree = fit_tree(&data.features, &residual, cfg);
        if tree.nodes.len() == 1 {
            break;
        }
        for (p, row) in pred.iter_mut().zip(&data.features) {
            *p += cfg.learning_rate * tree.predict(row);
        }
        model.trees.push(tree);
    }
    Ok(model)
}
