//! Two-base stacked ensemble: out-of-fold class-1 probabilities from a
//! depth-wise GBDT and a KNN feed a leaf-wise GBDT meta model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{complement, stratified_kfold};
use crate::learners::{check_dims, Classifier, GbdtModel, GbdtParams, KnnModel, KnnParams, Matrix};
use crate::numerics::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StackConfig {
    pub k_folds: usize,
    pub base_gbdt: GbdtParams,
    pub base_knn: KnnParams,
    pub meta: GbdtParams,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self {
            k_folds: 5,
            base_gbdt: GbdtParams::base(),
            base_knn: KnnParams::default(),
            meta: GbdtParams::meta(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldScheme {
    Stratified,
    /// Used when some class has fewer than k members.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackModel {
    pub config: StackConfig,
    pub seed: u64,
    pub n_features: usize,
    pub fold_scheme: FoldScheme,
    pub base_gbdt: GbdtModel,
    pub base_knn: KnnModel,
    pub meta: GbdtModel,
}

/// Seeds for everything random in one stack fit; none depend on labels.
#[derive(Debug, Clone)]
pub struct StackSeeds {
    pub folds: u64,
    pub per_fold: Vec<u64>,
    pub refit: u64,
    pub meta: u64,
}

impl StackSeeds {
    pub fn derive(seed: u64, k: usize) -> Self {
        let mut rng = Rng::new(seed);
        Self {
            folds: rng.child_seed(),
            per_fold: (0..k).map(|_| rng.child_seed()).collect(),
            refit: rng.child_seed(),
            meta: rng.child_seed(),
        }
    }
}

/// Fold partition for the stack. Stratified when every class has at least
/// `k` members, otherwise a seeded shuffle dealt round-robin.
pub fn stack_folds(y: &[u8], k: usize, seed: u64) -> Result<(FoldScheme, Vec<Vec<usize>>)> {
    if k < 2 || y.len() < k {
        return Err(Error::TooFewSamples {
            needed: k.max(2),
            found: y.len(),
        });
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos >= k && y.len() - pos >= k {
        return Ok((FoldScheme::Stratified, stratified_kfold(y, k, seed)?));
    }
    let mut idx: Vec<usize> = (0..y.len()).collect();
    Rng::new(seed).shuffle(&mut idx);
    let mut folds = vec![Vec::new(); k];
    for (j, i) in idx.into_iter().enumerate() {
        folds[j % k].push(i);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok((FoldScheme::RoundRobin, folds))
}

fn base_probabilities(gbdt: &GbdtModel, knn: &KnnModel, x: &Matrix) -> Result<Matrix> {
    let p1 = gbdt.predict_positive(x)?;
    let p2 = knn.predict_positive(x)?;
    let mut data = Vec::with_capacity(2 * x.rows());
    for (a, b) in p1.into_iter().zip(p2) {
        data.push(a);
        data.push(b);
    }
    Ok(Matrix::new(x.rows(), 2, data))
}

/// Out-of-fold meta-feature matrix: row i holds the class-1 probabilities
/// of both bases trained without the fold that contains i.
pub fn oof_predictions(
    x: &Matrix,
    y: &[u8],
    folds: &[Vec<usize>],
    config: &StackConfig,
    fold_seeds: &[u64],
) -> Result<Matrix> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch(x.rows(), y.len()));
    }
    if folds.len() != fold_seeds.len() {
        return Err(Error::LengthMismatch(folds.len(), fold_seeds.len()));
    }
    let parts: Vec<(Vec<usize>, Matrix)> = folds
        .par_iter()
        .zip(fold_seeds)
        .map(|(test, &seed)| {
            let train = complement(y.len(), test);
            let x_train = x.select_rows(&train);
            let y_train: Vec<u8> = train.iter().map(|&i| y[i]).collect();
            let gbdt = config.base_gbdt.fit(&x_train, &y_train, &mut Rng::new(seed))?;
            let knn = config.base_knn.fit(&x_train, &y_train)?;
            Ok((test.clone(), base_probabilities(&gbdt, &knn, &x.select_rows(test))?))
        })
        .collect::<Result<_>>()?;
    let mut out = Matrix::zeros(x.rows(), 2);
    let mut filled = vec![false; x.rows()];
    for (rows, p) in parts {
        for (k, &i) in rows.iter().enumerate() {
            if filled[i] {
                return Err(Error::InvalidParameter(format!("row {i} appears in two folds")));
            }
            filled[i] = true;
            out.set(i, 0, p.get(k, 0));
            out.set(i, 1, p.get(k, 1));
        }
    }
    if let Some(i) = filled.iter().position(|&f| !f) {
        return Err(Error::InvalidParameter(format!("row {i} is in no fold")));
    }
    Ok(out)
}

/// Fits the stack and also returns the out-of-fold meta-feature matrix.
pub fn fit_stack_with_oof(x: &Matrix, y: &[u8], config: &StackConfig, seed: u64) -> Result<(StackModel, Matrix)> {
    crate::learners::check_training_input(x, y)?;
    let seeds = StackSeeds::derive(seed, config.k_folds);
    let (fold_scheme, folds) = stack_folds(y, config.k_folds, seeds.folds)?;
    let oof = oof_predictions(x, y, &folds, config, &seeds.per_fold)?;
    let meta = config.meta.fit(&oof, y, &mut Rng::new(seeds.meta))?;
    let base_gbdt = config.base_gbdt.fit(x, y, &mut Rng::new(seeds.refit))?;
    let base_knn = config.base_knn.fit(x, y)?;
    let model = StackModel {
        config: config.clone(),
        seed,
        n_features: x.cols(),
        fold_scheme,
        base_gbdt,
        base_knn,
        meta,
    };
    Ok((model, oof))
}

pub fn fit_stack(x: &Matrix, y: &[u8], config: &StackConfig, seed: u64) -> Result<StackModel> {
    fit_stack_with_oof(x, y, config, seed).map(|(m, _)| m)
}

impl StackModel {
    /// Base-model class-1 probabilities, one column per base.
    pub fn meta_features(&self, x: &Matrix) -> Result<Matrix> {
        check_dims(self.n_features, x)?;
        base_probabilities(&self.base_gbdt, &self.base_knn, x)
    }
}

/// `[P(class 0), P(class 1)]` per row of `x`.
pub fn predict_stack(model: &StackModel, x: &Matrix) -> Result<Vec<[f64; 2]>> {
    model.predict_proba(x)
}

impl Classifier for StackModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_positive(&self, x: &Matrix) -> Result<Vec<f64>> {
        let meta_x = self.meta_features(x)?;
        self.meta.predict_positive(&meta_x)
    }
}
