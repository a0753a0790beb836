//! Gini decision tree (CART) and the bagged random forest built on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::presort::{improves, midpoint, Presorted};
use super::tree::{Arena, Node};
use super::{check_dims, check_training_input, normalize, Classifier, Matrix};
use crate::error::{Error, Result};
use crate::numerics::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CartParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` means all of them.
    pub max_features: Option<usize>,
}

impl Default for CartParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: Node,
    pub n_features: usize,
    /// Unnormalised impurity-decrease importance per feature.
    pub importances: Vec<f64>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct CandidateSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

struct CartBuilder<'a, 'r> {
    params: &'a CartParams,
    y: &'a [u8],
    data: Presorted<'a>,
    arena: Arena,
    importances: Vec<f64>,
    total: f64,
    rng: &'r mut Rng,
}

impl CartBuilder<'_, '_> {
    fn label(&self, pos: u32) -> u8 {
        self.y[self.data.row_of[pos as usize]]
    }

    fn best_split(&mut self, start: usize, end: usize, n_pos: usize) -> Option<CandidateSplit> {
        let n = end - start;
        let d = self.importances.len();
        let features: Vec<usize> = match self.params.max_features {
            Some(k) if k < d => {
                let mut f = self.rng.sample_indices(d, k);
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        };
        let parent = gini(n_pos, n);
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<CandidateSplit> = None;
        for f in features {
            let order = self.data.sorted(f, start, end);
            let mut left_n = 0;
            let mut left_pos = 0;
            for i in 0..n - 1 {
                left_n += 1;
                left_pos += usize::from(self.label(order[i]) == 1);
                let v = self.data.value(order[i], f);
                let next = self.data.value(order[i + 1], f);
                if v == next || left_n < min_leaf || n - left_n < min_leaf {
                    continue;
                }
                let right_n = n - left_n;
                let right_pos = n_pos - left_pos;
                let child = (left_n as f64 * gini(left_pos, left_n)
                    + right_n as f64 * gini(right_pos, right_n))
                    / n as f64;
                let decrease = parent - child;
                if best.as_ref().is_none_or(|b| improves(decrease, b.decrease)) {
                    best = Some(CandidateSplit {
                        feature: f,
                        threshold: midpoint(v, next),
                        decrease,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, id: usize, start: usize, end: usize, depth: usize) {
        let n = end - start;
        let n_pos = self
            .data
            .members(start, end)
            .iter()
            .filter(|&&p| self.label(p) == 1)
            .count();
        self.arena.set_leaf_value(id, n_pos as f64 / n as f64);

        let pure = n_pos == 0 || n_pos == n;
        let depth_ok = self.params.max_depth.is_none_or(|m| depth < m);
        if pure || !depth_ok || n < 2 * self.params.min_samples_leaf.max(1) {
            return;
        }
        // Gini is concave, so any valid split has decrease >= 0. Impure nodes
        // split even at zero decrease (needed for XOR-like structure).
        let Some(split) = self.best_split(start, end, n_pos) else {
            return;
        };
        if split.decrease < -1e-12 {
            return;
        }
        let mid = self.data.split(start, end, split.feature, split.threshold);
        self.importances[split.feature] += (n as f64 / self.total) * split.decrease.max(0.0);
        let (l, r) = self
            .arena
            .split(id, split.feature, split.threshold, mid - start, end - mid);
        self.grow(l, start, mid, depth + 1);
        self.grow(r, mid, end, depth + 1);
    }
}

impl CartParams {
    pub fn fit(&self, x: &Matrix, y: &[u8], rng: &mut Rng) -> Result<TreeModel> {
        check_training_input(x, y)?;
        if x.rows() < 2 * self.min_samples_leaf.max(1) {
            return Err(Error::EmptyInput);
        }
        fit_on_rows(self, x, y, (0..x.rows()).collect(), rng)
    }
}

fn fit_on_rows(
    params: &CartParams,
    x: &Matrix,
    y: &[u8],
    rows: Vec<usize>,
    rng: &mut Rng,
) -> Result<TreeModel> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = rows.len();
    let mut arena = Arena::default();
    let root = arena.push_leaf(0.0, m);
    let mut builder = CartBuilder {
        params,
        y,
        data: Presorted::new(x, rows),
        arena,
        importances: vec![0.0; x.cols()],
        total: m as f64,
        rng,
    };
    builder.grow(root, 0, m, 0);
    Ok(TreeModel {
        root: builder.arena.into_tree(),
        n_features: x.cols(),
        importances: builder.importances,
    })
}

impl Classifier for TreeModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_positive(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_dims(self.n_features, x)?;
        Ok(x.iter_rows().map(|r| self.root.predict(r)).collect())
    }

    fn feature_importances(&self) -> Option<Vec<f64>> {
        Some(normalize(self.importances.clone()))
    }
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features per split; `None` means ⌈√d⌉.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
            bootstrap: true,
            max_depth: None,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub n_features: usize,
}

impl ForestParams {
    pub fn fit(&self, x: &Matrix, y: &[u8], rng: &mut Rng) -> Result<ForestModel> {
        check_training_input(x, y)?;
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be positive".into()));
        }
        let d = x.cols();
        let mtry = self
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d);
        let cart = CartParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: Some(mtry),
        };
        let seeds: Vec<u64> = (0..self.n_trees).map(|_| rng.child_seed()).collect();
        let n = x.rows();
        let trees = seeds
            .into_par_iter()
            .map(|seed| {
                let mut tree_rng = Rng::new(seed);
                let rows = if self.bootstrap {
                    (0..n).map(|_| tree_rng.below(n)).collect()
                } else {
                    (0..n).collect()
                };
                fit_on_rows(&cart, x, y, rows, &mut tree_rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ForestModel { trees, n_features: d })
    }
}

impl Classifier for ForestModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_positive(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_dims(self.n_features, x)?;
        let k = self.trees.len() as f64;
        Ok(x.iter_rows()
            .map(|r| self.trees.iter().map(|t| t.root.predict(r)).sum::<f64>() / k)
            .collect())
    }

    /// Per-tree importances averaged, then normalised to sum 1.
    fn feature_importances(&self) -> Option<Vec<f64>> {
        let mut mean = vec![0.0; self.n_features];
        for t in &self.trees {
            for (m, v) in mean.iter_mut().zip(&t.importances) {
                *m += v;
            }
        }
        let k = self.trees.len() as f64;
        mean.iter_mut().for_each(|m| *m /= k);
        Some(normalize(mean))
    }
}
