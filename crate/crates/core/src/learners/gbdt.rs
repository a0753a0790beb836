//! Second-order gradient boosting on the logistic loss.
//!
//! Split search is exact greedy over pre-sorted columns. Trees grow either
//! depth-wise (every node down to `max_depth`) or leaf-wise (the
//! highest-gain leaf first, up to `max_leaves`).

use serde::{Deserialize, Serialize};

use super::presort::{improves, midpoint, Presorted};
use super::tree::{Arena, Node};
use super::{check_dims, check_training_input, normalize, require_both_classes, Classifier, Matrix};
use crate::error::{Error, Result};
use crate::numerics::{logistic, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    DepthWise,
    LeafWise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub growth: Growth,
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
    /// Leaf L2 penalty.
    pub lambda: f64,
    /// Per-split penalty.
    pub gamma: f64,
    pub subsample: f64,
    pub colsample: f64,
    /// Minimum hessian sum in each child.
    pub min_child_weight: f64,
    pub min_samples_leaf: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self::base()
    }
}

impl GbdtParams {
    /// Depth-wise base learner configuration.
    pub fn base() -> Self {
        Self {
            n_rounds: 150,
            learning_rate: 0.1,
            growth: Growth::DepthWise,
            max_depth: Some(5),
            max_leaves: None,
            lambda: 1.0,
            gamma: 0.0,
            subsample: 0.8,
            colsample: 0.8,
            min_child_weight: 1.0,
            min_samples_leaf: 1,
        }
    }

    /// Leaf-wise meta learner configuration.
    pub fn meta() -> Self {
        Self {
            n_rounds: 100,
            learning_rate: 0.1,
            growth: Growth::LeafWise,
            max_depth: None,
            max_leaves: Some(31),
            lambda: 1.0,
            gamma: 0.0,
            subsample: 1.0,
            colsample: 1.0,
            min_child_weight: 1e-3,
            min_samples_leaf: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.lambda >= 0.0 && self.gamma >= 0.0) {
            return bad("lambda and gamma must be non-negative");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must lie in (0, 1]");
        }
        if !(self.colsample > 0.0 && self.colsample <= 1.0) {
            return bad("colsample must lie in (0, 1]");
        }
        if self.growth == Growth::LeafWise && self.max_leaves.is_some_and(|l| l < 2) {
            return bad("max_leaves must be at least 2");
        }
        if self.growth == Growth::DepthWise && self.max_depth.is_none() {
            return bad("depth-wise growth needs max_depth");
        }
        Ok(())
    }
}

/// Second-order gain of splitting a node into (L, R).
pub fn gbdt_split_gain(g_l: f64, h_l: f64, g_r: f64, h_r: f64, lambda: f64, gamma: f64) -> f64 {
    let g = g_l + g_r;
    let h = h_l + h_r;
    0.5 * (g_l * g_l / (h_l + lambda) + g_r * g_r / (h_r + lambda) - g * g / (h + lambda)) - gamma
}

/// Newton leaf weight `−G/(H+λ)`.
pub fn leaf_value(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub params: GbdtParams,
    /// Prior log-odds of the positive class.
    pub base_score: f64,
    /// Trees with unscaled leaf weights; predictions scale them by η.
    pub trees: Vec<Node>,
    pub n_features: usize,
    /// Total split gain per feature.
    pub gain_importance: Vec<f64>,
    /// Training log loss before the first round and after each round.
    pub train_loss: Vec<f64>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct TreeBuilder<'a> {
    params: &'a GbdtParams,
    grad: &'a [f64],
    hess: &'a [f64],
    features: &'a [usize],
    data: Presorted<'a>,
    arena: Arena,
    gains: &'a mut [f64],
}

impl TreeBuilder<'_> {
    fn sums(&self, start: usize, end: usize) -> (f64, f64) {
        let mut g = 0.0;
        let mut h = 0.0;
        for &p in self.data.members(start, end) {
            let r = self.data.row_of[p as usize];
            g += self.grad[r];
            h += self.hess[r];
        }
        (g, h)
    }

    fn best_split(&self, start: usize, end: usize, g: f64, h: f64) -> Option<Candidate> {
        let n = end - start;
        let min_leaf = self.params.min_samples_leaf.max(1);
        if n < 2 * min_leaf {
            return None;
        }
        let (lambda, gamma) = (self.params.lambda, self.params.gamma);
        let mcw = self.params.min_child_weight;
        let mut best: Option<Candidate> = None;
        for &f in self.features {
            let order = self.data.sorted(f, start, end);
            let (mut gl, mut hl) = (0.0, 0.0);
            for i in 0..n - 1 {
                let r = self.data.row_of[order[i] as usize];
                gl += self.grad[r];
                hl += self.hess[r];
                let left_n = i + 1;
                if left_n < min_leaf || n - left_n < min_leaf {
                    continue;
                }
                let v = self.data.value(order[i], f);
                let next = self.data.value(order[i + 1], f);
                if v == next {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                if hl < mcw || hr < mcw {
                    continue;
                }
                let gain = gbdt_split_gain(gl, hl, gr, hr, lambda, gamma);
                if gain > 0.0 && best.as_ref().is_none_or(|b| improves(gain, b.gain)) {
                    best = Some(Candidate {
                        feature: f,
                        threshold: midpoint(v, next),
                        gain,
                    });
                }
            }
        }
        best
    }

    fn apply(&mut self, id: usize, start: usize, end: usize, c: &Candidate) -> [(usize, usize, usize); 2] {
        let mid = self.data.split(start, end, c.feature, c.threshold);
        self.gains[c.feature] += c.gain;
        let (l, r) = self
            .arena
            .split(id, c.feature, c.threshold, mid - start, end - mid);
        for (child, s, e) in [(l, start, mid), (r, mid, end)] {
            let (g, h) = self.sums(s, e);
            self.arena
                .set_leaf_value(child, leaf_value(g, h, self.params.lambda));
        }
        [(l, start, mid), (r, mid, end)]
    }

    fn grow_depth_wise(&mut self, id: usize, start: usize, end: usize, depth: usize) {
        if self.params.max_depth.is_some_and(|m| depth >= m) {
            return;
        }
        let (g, h) = self.sums(start, end);
        let Some(c) = self.best_split(start, end, g, h) else {
            return;
        };
        for (child, s, e) in self.apply(id, start, end, &c) {
            self.grow_depth_wise(child, s, e, depth + 1);
        }
    }

    fn grow_leaf_wise(&mut self, root: usize, n: usize) {
        let max_leaves = self.params.max_leaves.unwrap_or(usize::MAX);
        // (node, start, end, depth, best split)
        let mut open: Vec<(usize, usize, usize, usize, Option<Candidate>)> = Vec::new();
        let c = self.candidate(0, n, 0);
        open.push((root, 0, n, 0, c));
        let mut leaves = 1;
        while leaves < max_leaves {
            // Highest gain first; ties go to the earliest-created leaf.
            let mut pick: Option<usize> = None;
            for (i, entry) in open.iter().enumerate() {
                if let Some(c) = &entry.4 {
                    if pick.is_none_or(|p| c.gain > open[p].4.as_ref().unwrap().gain) {
                        pick = Some(i);
                    }
                }
            }
            let Some(i) = pick else { break };
            let (id, start, end, depth, c) = open.remove(i);
            let children = self.apply(id, start, end, c.as_ref().unwrap());
            for (child, s, e) in children {
                let c = self.candidate(s, e, depth + 1);
                open.push((child, s, e, depth + 1, c));
            }
            leaves += 1;
        }
    }

    fn candidate(&self, start: usize, end: usize, depth: usize) -> Option<Candidate> {
        if self.params.max_depth.is_some_and(|m| depth >= m) {
            return None;
        }
        let (g, h) = self.sums(start, end);
        self.best_split(start, end, g, h)
    }
}

fn log_loss(scores: &[f64], y: &[u8]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(y)
        .map(|(&s, &t)| {
            // log(1 + e^{-z}) for the true class, computed stably.
            let z = if t == 1 { s } else { -s };
            if z > 0.0 {
                (-z).exp().ln_1p()
            } else {
                -z + z.exp().ln_1p()
            }
        })
        .sum();
    total / y.len() as f64
}

impl GbdtParams {
    pub fn fit(&self, x: &Matrix, y: &[u8], rng: &mut Rng) -> Result<GbdtModel> {
        check_training_input(x, y)?;
        require_both_classes(y)?;
        self.validate()?;
        let (n, d) = (x.rows(), x.cols());
        let pos = y.iter().filter(|&&v| v == 1).count() as f64;
        let prior = pos / n as f64;
        let base_score = (prior / (1.0 - prior)).ln();

        let mut scores = vec![base_score; n];
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        let mut gains = vec![0.0; d];
        let mut trees = Vec::with_capacity(self.n_rounds);
        let mut train_loss = Vec::with_capacity(self.n_rounds + 1);
        train_loss.push(log_loss(&scores, y));

        let n_rows = ((self.subsample * n as f64).floor() as usize).clamp(1, n);
        let n_cols = ((self.colsample * d as f64).floor() as usize).clamp(1, d);

        for _ in 0..self.n_rounds {
            for i in 0..n {
                let p = logistic(scores[i]);
                grad[i] = p - f64::from(y[i]);
                hess[i] = p * (1.0 - p);
            }
            let rows: Vec<usize> = if n_rows < n {
                let mut r = rng.sample_indices(n, n_rows);
                r.sort_unstable();
                r
            } else {
                (0..n).collect()
            };
            let features: Vec<usize> = if n_cols < d {
                let mut f = rng.sample_indices(d, n_cols);
                f.sort_unstable();
                f
            } else {
                (0..d).collect()
            };

            let m = rows.len();
            let mut arena = Arena::default();
            let root = arena.push_leaf(0.0, m);
            let mut builder = TreeBuilder {
                params: self,
                grad: &grad,
                hess: &hess,
                features: &features,
                data: Presorted::new(x, rows),
                arena,
                gains: &mut gains,
            };
            let (g, h) = builder.sums(0, m);
            builder.arena.set_leaf_value(root, leaf_value(g, h, self.lambda));
            match self.growth {
                Growth::DepthWise => builder.grow_depth_wise(root, 0, m, 0),
                Growth::LeafWise => builder.grow_leaf_wise(root, m),
            }
            let tree = builder.arena.into_tree();
            for (i, s) in scores.iter_mut().enumerate() {
                *s += self.learning_rate * tree.predict(x.row(i));
            }
            train_loss.push(log_loss(&scores, y));
            trees.push(tree);
        }

        Ok(GbdtModel {
            params: self.clone(),
            base_score,
            trees,
            n_features: d,
            gain_importance: gains,
            train_loss,
        })
    }
}

impl GbdtModel {
    /// Raw log-odds for one row.
    pub fn decision(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        self.base_score + self.params.learning_rate * sum
    }

    pub fn decision_function(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_dims(self.n_features, x)?;
        Ok(x.iter_rows().map(|r| self.decision(r)).collect())
    }
}

impl Classifier for GbdtModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_positive(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(logistic)
            .collect())
    }

    fn feature_importances(&self) -> Option<Vec<f64>> {
        Some(normalize(self.gain_importance.clone()))
    }
}
