//! Bagged regression trees with random feature subsets at each split.

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct Forest {
    trees: Vec<Tree>,
}

pub(crate) struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Fraction of features tried at each split.
    pub max_features: f64,
}

struct Builder<'a> {
    xs: &'a [&'a [f64]],
    ys: &'a [f64],
    p: &'a ForestParams,
    nodes: Vec<Node>,
    scratch: Vec<(f64, f64)>,
}

impl Builder<'_> {
    fn build(&mut self, idx: &mut [usize], depth: usize, rng: &mut Rng) -> usize {
        let n = idx.len();
        let sum: f64 = idx.iter().map(|&i| self.ys[i]).sum();
        let mean = sum / n as f64;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(mean));
        if depth >= self.p.max_depth || n < 2 * self.p.min_leaf.max(1) {
            return id;
        }
        let sq: f64 = idx.iter().map(|&i| (self.ys[i] - mean).powi(2)).sum();
        if sq < 1e-12 {
            return id;
        }
        let d = self.xs[0].len();
        let tries = ((self.p.max_features * d as f64).round() as usize).clamp(1, d);
        let mut best: Option<(usize, f64, f64)> = None;
        let parent_score = sum * sum / n as f64;
        for f in sample(rng, d, tries).into_iter() {
            self.scratch.clear();
            self.scratch.extend(idx.iter().map(|&i| (self.xs[i][f], self.ys[i])));
            self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = 0.0;
            let min_leaf = self.p.min_leaf.max(1);
            for k in 1..n {
                left += self.scratch[k - 1].1;
                if k < min_leaf || n - k < min_leaf || self.scratch[k - 1].0 == self.scratch[k].0 {
                    continue;
                }
                let right = sum - left;
                let score = left * left / k as f64 + right * right / (n - k) as f64;
                if score > parent_score + 1e-12 && best.is_none_or(|b| score > b.2) {
                    let (a, b) = (self.scratch[k - 1].0, self.scratch[k].0);
                    // The midpoint of adjacent floats can round up to `b`.
                    let mid = 0.5 * (a + b);
                    let threshold = if mid < b { mid } else { a };
                    best = Some((f, threshold, score));
                }
            }
        }
        let Some((feature, threshold, _)) = best else { return id };
        let mut split = 0;
        for k in 0..n {
            if self.xs[idx[k]][feature] <= threshold {
                idx.swap(k, split);
                split += 1;
            }
        }
        if split == 0 || split == n {
            return id;
        }
        let (l, r) = idx.split_at_mut(split);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

impl Forest {
    pub fn empty() -> Self {
        Forest { trees: Vec::new() }
    }

    pub fn fit(xs: &[&[f64]], ys: &[f64], p: &ForestParams, rng: &mut Rng) -> Self {
        let n = xs.len();
        let mut trees = Vec::with_capacity(p.trees);
        for _ in 0..p.trees.max(1) {
            let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut b = Builder {
                xs,
                ys,
                p,
                nodes: Vec::new(),
                scratch: Vec::with_capacity(n),
            };
            b.build(&mut idx, 0, rng);
            trees.push(Tree { nodes: b.nodes });
        }
        Forest { trees }
    }

    /// Mean over trees; 0 before fitting.
    pub fn predict(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}
