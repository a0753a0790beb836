//! Recursive feature elimination with cross-validation, driven by random
//! forest importances.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{complement, stratified_kfold};
use crate::learners::{Classifier, ForestParams, Matrix};
use crate::numerics::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfecvParams {
    pub k_folds: usize,
    pub forest: ForestParams,
    /// Subset sizes whose accuracy is reported separately.
    pub report_sizes: Vec<usize>,
}

impl Default for RfecvParams {
    fn default() -> Self {
        Self {
            k_folds: 5,
            forest: ForestParams::default(),
            report_sizes: vec![3, 5, 7],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfecvIteration {
    /// Column indices into the original matrix, ascending.
    pub features: Vec<usize>,
    pub names: Vec<String>,
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    /// Full-data forest importances, aligned with `features`.
    pub importances: Vec<f64>,
    /// Feature eliminated after this iteration, if any.
    pub removed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfecvTrace {
    pub k_folds: usize,
    pub seed: u64,
    pub iterations: Vec<RfecvIteration>,
    /// Mean CV accuracy per iteration, largest subset first.
    pub accuracies: Vec<f64>,
    /// Accuracy at each of the requested report sizes that was reached.
    pub size_accuracy: BTreeMap<usize, f64>,
    pub best_features: Vec<usize>,
    pub best_names: Vec<String>,
    pub best_accuracy: f64,
}

impl RfecvTrace {
    pub fn iteration_of_size(&self, k: usize) -> Option<&RfecvIteration> {
        self.iterations.iter().find(|it| it.features.len() == k)
    }
}

/// Mean stratified k-fold accuracy of the forest on the given columns.
fn cv_accuracy(
    x: &Matrix,
    y: &[u8],
    folds: &[Vec<usize>],
    forest: &ForestParams,
    seeds: &[u64],
) -> Result<Vec<f64>> {
    folds
        .par_iter()
        .zip(seeds)
        .map(|(test, &seed)| {
            let train = complement(y.len(), test);
            let y_train: Vec<u8> = train.iter().map(|&i| y[i]).collect();
            let model = forest.fit(&x.select_rows(&train), &y_train, &mut Rng::new(seed))?;
            let pred = model.predict(&x.select_rows(test))?;
            let hits = test.iter().zip(&pred).filter(|(&i, &p)| y[i] == p).count();
            Ok(hits as f64 / test.len() as f64)
        })
        .collect()
}

pub fn rfecv(
    x: &Matrix,
    y: &[u8],
    names: &[String],
    params: &RfecvParams,
    seed: u64,
) -> Result<RfecvTrace> {
    let d = x.cols();
    if d < 2 {
        return Err(Error::TooFewFeatures { needed: 2, found: d });
    }
    if names.len() != d {
        return Err(Error::LengthMismatch(names.len(), d));
    }
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch(x.rows(), y.len()));
    }
    let folds = stratified_kfold(y, params.k_folds, seed)?;
    let mut rng = Rng::new(seed);
    let mut current: Vec<usize> = (0..d).collect();
    let mut iterations = Vec::with_capacity(d - 1);

    while current.len() > 1 {
        let xs = x.select_cols(&current);
        let fold_seeds: Vec<u64> = (0..folds.len()).map(|_| rng.child_seed()).collect();
        let fold_accuracies = cv_accuracy(&xs, y, &folds, &params.forest, &fold_seeds)?;
        let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;

        let full = params.forest.fit(&xs, y, &mut rng.child())?;
        let importances = full.feature_importances().unwrap_or_default();
        // Smallest importance; ties remove the higher original index.
        let mut drop = 0;
        for j in 1..current.len() {
            if importances[j] <= importances[drop] {
                drop = j;
            }
        }
        log::debug!(
            "rfecv: {} features, accuracy {mean_accuracy:.4}, dropping {}",
            current.len(),
            names[current[drop]]
        );
        iterations.push(RfecvIteration {
            features: current.clone(),
            names: current.iter().map(|&c| names[c].clone()).collect(),
            mean_accuracy,
            fold_accuracies,
            importances,
            removed: Some(names[current[drop]].clone()),
        });
        current.remove(drop);
    }

    let accuracies: Vec<f64> = iterations.iter().map(|it| it.mean_accuracy).collect();
    let size_accuracy = params
        .report_sizes
        .iter()
        .filter_map(|&s| {
            iterations
                .iter()
                .find(|it| it.features.len() == s)
                .map(|it| (s, it.mean_accuracy))
        })
        .collect();
    // Iterations run from large to small, so `>=` keeps the smaller subset on ties.
    let mut best = 0;
    for (i, it) in iterations.iter().enumerate() {
        if it.mean_accuracy >= iterations[best].mean_accuracy {
            best = i;
        }
    }
    let best_it = &iterations[best];
    Ok(RfecvTrace {
        k_folds: params.k_folds,
        seed,
        best_features: best_it.features.clone(),
        best_names: best_it.names.clone(),
        best_accuracy: best_it.mean_accuracy,
        accuracies,
        size_accuracy,
        iterations,
    })
}

/// Feature set of the iteration with exactly `k` features.
pub fn select_k(trace: &RfecvTrace, k: usize) -> Result<Vec<usize>> {
    trace
        .iteration_of_size(k)
        .map(|it| it.features.clone())
        .ok_or(Error::SizeNotRecorded(k))
}
