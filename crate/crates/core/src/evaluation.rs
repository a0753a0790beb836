//! Classification metrics, ROC analysis, stratified folds and timing.
//!
//! The positive class is label 1 throughout.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{Classifier, Matrix};
use crate::numerics::Rng;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    /// Number of samples whose true label is `class`.
    pub fn support(&self, class: u8) -> u64 {
        if class == 1 {
            self.tp + self.fn_
        } else {
            self.tn + self.fp
        }
    }

    /// Number of samples predicted as `class`.
    pub fn predicted(&self, class: u8) -> u64 {
        if class == 1 {
            self.tp + self.fp
        } else {
            self.tn + self.fn_
        }
    }

    pub fn errors(&self) -> u64 {
        self.fp + self.fn_
    }
}

fn check_binary(y: &[u8]) -> Result<()> {
    match y.iter().find(|&&v| v > 1) {
        Some(&v) => Err(Error::NonBinary(i64::from(v))),
        None => Ok(()),
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    check_binary(y_true)?;
    check_binary(y_pred)?;
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (0, 0) => cm.tn += 1,
            (0, _) => cm.fp += 1,
            (_, 0) => cm.fn_ += 1,
            _ => cm.tp += 1,
        }
    }
    Ok(cm)
}

/// Ratio with the 0/0 → 0 convention; the flag marks a zero denominator.
fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    pub precision_degenerate: bool,
    pub recall_degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averaged {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicMetrics {
    pub accuracy: f64,
    pub negative: ClassMetrics,
    /// Headline precision/recall/F1 refer to this class.
    pub positive: ClassMetrics,
    pub macro_avg: Averaged,
    pub weighted: Averaged,
}

pub fn basic_metrics(cm: &ConfusionMatrix) -> Result<BasicMetrics> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let class = |tp: u64, fp: u64, fn_: u64| {
        let (precision, pd) = ratio(tp, tp + fp);
        let (recall, rd) = ratio(tp, tp + fn_);
        ClassMetrics {
            precision,
            recall,
            f1: f1(precision, recall),
            support: tp + fn_,
            precision_degenerate: pd,
            recall_degenerate: rd,
        }
    };
    let positive = class(cm.tp, cm.fp, cm.fn_);
    let negative = class(cm.tn, cm.fn_, cm.fp);
    let macro_avg = Averaged {
        precision: (negative.precision + positive.precision) / 2.0,
        recall: (negative.recall + positive.recall) / 2.0,
        f1: (negative.f1 + positive.f1) / 2.0,
    };
    let (w0, w1) = (negative.support as f64 / n as f64, positive.support as f64 / n as f64);
    let weighted = Averaged {
        precision: w0 * negative.precision + w1 * positive.precision,
        recall: w0 * negative.recall + w1 * positive.recall,
        f1: w0 * negative.f1 + w1 * positive.f1,
    };
    Ok(BasicMetrics {
        accuracy: (cm.tn + cm.tp) as f64 / n as f64,
        negative,
        positive,
        macro_avg,
        weighted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub kappa: f64,
    /// Chance agreement was 1, so kappa was set to 0.
    pub degenerate: bool,
}

pub fn cohen_kappa(cm: &ConfusionMatrix) -> Result<Kappa> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n = n as f64;
    let p_o = (cm.tn + cm.tp) as f64 / n;
    let p_e = (cm.support(0) as f64 * cm.predicted(0) as f64
        + cm.support(1) as f64 * cm.predicted(1) as f64)
        / (n * n);
    if p_e == 1.0 {
        return Ok(Kappa {
            kappa: 0.0,
            degenerate: true,
        });
    }
    Ok(Kappa {
        kappa: (p_o - p_e) / (1.0 - p_e),
        degenerate: false,
    })
}

fn check_scores(y_true: &[u8], scores: &[f64]) -> Result<(u64, u64)> {
    if y_true.len() != scores.len() {
        return Err(Error::LengthMismatch(y_true.len(), scores.len()));
    }
    check_binary(y_true)?;
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::DomainError(format!("non-finite score {s}")));
    }
    let pos = y_true.iter().filter(|&&v| v == 1).count() as u64;
    let neg = y_true.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// Indices sorted by score, descending.
fn descending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Mann–Whitney AUC; tied positive/negative pairs count one half.
pub fn roc_auc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    let (pos, neg) = check_scores(y_true, scores)?;
    let order = descending(scores);
    // Twice the win count, so half-credit ties stay integral.
    let mut twice_wins: u128 = 0;
    let mut neg_below = neg;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut p, mut q) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == s {
            if y_true[order[i]] == 1 {
                p += 1;
            } else {
                q += 1;
            }
            i += 1;
        }
        neg_below -= q;
        twice_wins += 2 * u128::from(p) * u128::from(neg_below) + u128::from(p) * u128::from(q);
    }
    Ok(twice_wins as f64 / (2.0 * pos as f64 * neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Score at or above which samples are called positive; `None` for the
    /// origin point where nothing is positive.
    pub threshold: Option<f64>,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve over distinct score thresholds, descending.
pub fn roc_curve(y_true: &[u8], scores: &[f64]) -> Result<Vec<RocPoint>> {
    let (pos, neg) = check_scores(y_true, scores)?;
    let order = descending(scores);
    let mut points = vec![RocPoint {
        threshold: None,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if y_true[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: Some(s),
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(points)
}

/// Per-class seeded shuffle, then round-robin fold assignment. The fold
/// offset carries over from one class to the next so fold sizes stay
/// balanced overall. Each returned fold is sorted.
pub fn stratified_kfold(y: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    check_binary(y)?;
    let mut rng = Rng::new(seed);
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for class in 0..=1u8 {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < k {
            return Err(Error::ClassSmallerThanK {
                class,
                count: idx.len(),
                k,
            });
        }
        rng.shuffle(&mut idx);
        for (j, &i) in idx.iter().enumerate() {
            folds[(offset + j) % k].push(i);
        }
        offset = (offset + idx.len()) % k;
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Indices not in `fold`, ascending.
pub fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut in_fold = vec![false; n];
    fold.iter().for_each(|&i| in_fold[i] = true);
    (0..n).filter(|&i| !in_fold[i]).collect()
}

/// Runs `f` and returns its result with the elapsed wall time in seconds,
/// truncated to microseconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_micros() as f64 / 1e6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub train_seconds: f64,
    pub inference_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: u64,
    pub accuracy: f64,
    pub negative: ClassMetrics,
    pub positive: ClassMetrics,
    pub macro_avg: Averaged,
    pub weighted: Averaged,
    pub kappa: f64,
    pub kappa_degenerate: bool,
    pub auc: f64,
    pub confusion: ConfusionMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// Full report from class-1 probabilities, thresholded at 0.5 for the hard
/// labels.
pub fn evaluate(y_true: &[u8], proba: &[f64]) -> Result<MetricsReport> {
    let pred: Vec<u8> = proba.iter().map(|&p| u8::from(p >= 0.5)).collect();
    let cm = confusion(y_true, &pred)?;
    let basic = basic_metrics(&cm)?;
    let kappa = cohen_kappa(&cm)?;
    let auc = roc_auc(y_true, proba)?;
    Ok(MetricsReport {
        n: cm.total(),
        accuracy: basic.accuracy,
        negative: basic.negative,
        positive: basic.positive,
        macro_avg: basic.macro_avg,
        weighted: basic.weighted,
        kappa: kappa.kappa,
        kappa_degenerate: kappa.degenerate,
        auc,
        confusion: cm,
        timings: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (divisor k − 1); 0 for a single value.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldReport>,
    pub accuracy: MeanStd,
    pub auc: MeanStd,
}

/// Stratified k-fold cross-validation. `factory` trains a fresh model on
/// the training part of each fold, seeded by a per-fold child of `seed`.
pub fn cross_validate<M, F>(x: &Matrix, y: &[u8], k: usize, seed: u64, factory: F) -> Result<CvReport>
where
    M: Classifier,
    F: Fn(&Matrix, &[u8], &mut Rng) -> Result<M> + Sync,
{
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch(x.rows(), y.len()));
    }
    let folds = stratified_kfold(y, k, seed)?;
    let mut seeder = Rng::new(seed);
    let fold_seeds: Vec<u64> = (0..k).map(|_| seeder.child_seed()).collect();
    let folds: Vec<FoldReport> = folds
        .par_iter()
        .zip(fold_seeds)
        .enumerate()
        .map(|(fold, (test_idx, fold_seed))| {
            let train_idx = complement(y.len(), test_idx);
            let x_train = x.select_rows(&train_idx);
            let y_train: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
            let x_test = x.select_rows(test_idx);
            let y_test: Vec<u8> = test_idx.iter().map(|&i| y[i]).collect();
            let (model, train_seconds) = timed(|| factory(&x_train, &y_train, &mut Rng::new(fold_seed)));
            let (proba, inference_seconds) = timed(|| model?.predict_positive(&x_test));
            let mut report = evaluate(&y_test, &proba?)?;
            report.timings = Some(Timings {
                train_seconds,
                inference_seconds,
            });
            Ok(FoldReport {
                fold,
                train_size: train_idx.len(),
                test_size: test_idx.len(),
                report,
            })
        })
        .collect::<Result<_>>()?;
    let acc: Vec<f64> = folds.iter().map(|f| f.report.accuracy).collect();
    let auc: Vec<f64> = folds.iter().map(|f| f.report.auc).collect();
    Ok(CvReport {
        k,
        seed,
        accuracy: MeanStd::of(&acc),
        auc: MeanStd::of(&auc),
        folds,
    })
}
