//! Report documents written by the pipeline, and their CSV companions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stackliver::evaluation::{ConfusionMatrix, CvReport, MeanStd, MetricsReport, RocPoint};
use stackliver::explain::{
    lime_explain, log_odds, morris_ee, shap_global_ranking, LimeExplanation, MorrisResult, ShapGlobal,
};
use stackliver::numerics::{AnovaResult, Rng};
use stackliver::preprocess::PreprocessState;
use stackliver::selection::RfecvTrace;
use stackliver::{Classifier, ClassifierModel, Matrix};

use crate::bundle::ReferenceData;
use crate::canonical::format_f64;
use crate::config::ExplainConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub class_0: usize,
    pub class_1: usize,
    pub total: usize,
}

impl ClassCounts {
    pub fn of(labels: &[u8]) -> Self {
        let class_1 = labels.iter().filter(|&&v| v == 1).count();
        Self {
            class_0: labels.len() - class_1,
            class_1,
            total: labels.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub rows_read: usize,
    pub rows_after_drop: usize,
    pub predictors: Vec<String>,
    pub train: ClassCounts,
    pub undersampled: ClassCounts,
    pub test: ClassCounts,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaReport {
    pub alpha: f64,
    pub results: Vec<AnovaResult>,
    pub kept: Vec<String>,
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfecvReport {
    /// Which rows the elimination ran on.
    pub data: String,
    pub candidates: Vec<String>,
    pub trace: RfecvTrace,
    pub select_size: Option<usize>,
    pub selected: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub train: MetricsReport,
    pub test: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub k: usize,
    pub accuracy: MeanStd,
    pub auc: MeanStd,
    pub fold_accuracies: Vec<f64>,
    pub fold_aucs: Vec<f64>,
}

impl CvSummary {
    pub fn of(r: &CvReport) -> Self {
        Self {
            k: r.k,
            accuracy: r.accuracy,
            auc: r.auc,
            fold_accuracies: r.folds.iter().map(|f| f.report.accuracy).collect(),
            fold_aucs: r.folds.iter().map(|f| f.report.auc).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub features: Vec<String>,
    pub models: BTreeMap<String, SplitMetrics>,
    pub cv: Option<BTreeMap<String, CvSummary>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocEntry {
    pub auc: f64,
    pub points: Vec<RocPoint>,
}

/// ROC curves on the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    pub models: BTreeMap<String, RocEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionPair {
    pub train: ConfusionMatrix,
    pub test: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub models: BTreeMap<String, ConfusionPair>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelTiming {
    pub train_seconds: f64,
    pub inference_seconds: Option<f64>,
    /// Training result came from the stage cache.
    pub cached: bool,
}

/// Wall-clock timings; kept out of the deterministic reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub models: BTreeMap<String, ModelTiming>,
    pub stages: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStatus {
    pub stage: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u64,
    pub command: String,
    pub seed: u64,
    pub data_sha256: Option<String>,
    pub status: String,
    pub stages: Vec<StageStatus>,
    pub reports: Vec<String>,
}

// ---------------------------------------------------------------------------
// Explanations
// ---------------------------------------------------------------------------

/// A LIME feature with its bin edges mapped back to feature units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeUnits {
    pub name: String,
    pub value: f64,
    pub value_units: Option<f64>,
    pub lower_units: Option<f64>,
    pub upper_units: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeReport {
    pub row: usize,
    pub true_label: Option<u8>,
    pub explanation: LimeExplanation,
    pub units: Vec<LimeUnits>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapReport {
    pub output: String,
    pub n_background: usize,
    pub n_coalitions: usize,
    pub global: ShapGlobal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorrisRow {
    pub name: String,
    pub mu: f64,
    pub mu_star: f64,
    pub sigma: f64,
    pub mu_star_conf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorrisReport {
    pub output: String,
    pub table: Vec<MorrisRow>,
    pub bounds_units: Vec<(Option<f64>, Option<f64>)>,
    pub result: MorrisResult,
}

/// What the explainers need from a trained pipeline.
pub struct ExplainContext<'a> {
    pub model: &'a ClassifierModel,
    pub features: &'a [String],
    pub reference: &'a ReferenceData,
    pub preprocess: &'a PreprocessState,
    pub config: &'a ExplainConfig,
}

/// Per-method seeds drawn in a fixed order, so a method's output does not
/// depend on which other methods ran.
pub struct ExplainSeeds {
    pub lime: u64,
    pub shap: u64,
    pub morris: u64,
}

impl ExplainSeeds {
    pub fn derive(seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        Self {
            lime: rng.child_seed(),
            shap: rng.child_seed(),
            morris: rng.child_seed(),
        }
    }
}

fn positive<'a>(model: &'a ClassifierModel) -> impl Fn(&Matrix) -> stackliver::Result<Vec<f64>> + Sync + 'a {
    move |x: &Matrix| model.predict_positive(x)
}

impl ExplainContext<'_> {
    fn units(&self, j: usize, z: Option<f64>) -> Option<f64> {
        z.and_then(|z| self.preprocess.to_feature_units(&self.features[j], z))
    }

    /// LIME reports for `rows` of `x`; instance `i` uses the `i`-th child
    /// of the LIME seed.
    pub fn lime(&self, x: &Matrix, rows: &[usize], labels: Option<&[u8]>, seed: u64) -> CliResult<Vec<LimeReport>> {
        let mut seeder = Rng::new(seed);
        let mut out = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= x.rows() {
                return Err(CliError::Config(format!("row {r} out of range ({} rows)", x.rows())));
            }
            let mut rng = seeder.child();
            let instance = x.row(r);
            let explanation = lime_explain(
                positive(self.model),
                instance,
                r,
                self.features,
                &self.reference.stats,
                &self.config.lime,
                &mut rng,
            )?;
            let units = explanation
                .features
                .iter()
                .enumerate()
                .map(|(j, f)| LimeUnits {
                    name: f.name.clone(),
                    value: instance[j],
                    value_units: self.units(j, Some(instance[j])),
                    lower_units: self.units(j, f.lower),
                    upper_units: self.units(j, f.upper),
                })
                .collect();
            out.push(LimeReport {
                row: r,
                true_label: labels.map(|l| l[r]),
                explanation,
                units,
            });
        }
        Ok(out)
    }

    pub fn shap(&self, x: &Matrix, seed: u64) -> CliResult<ShapReport> {
        let background = &self.reference.background;
        let global = shap_global_ranking(
            log_odds(self.model),
            x,
            background,
            self.features,
            Some(self.config.shap_rows),
            &mut Rng::new(seed),
        )?;
        Ok(ShapReport {
            output: "log_odds".into(),
            n_background: background.rows(),
            n_coalitions: 1 << self.features.len(),
            global,
        })
    }

    pub fn morris(&self, seed: u64) -> CliResult<MorrisReport> {
        let result = morris_ee(
            positive(self.model),
            &self.reference.bounds,
            self.features,
            &self.config.morris,
            &mut Rng::new(seed),
        )?;
        let table = result
            .features
            .iter()
            .map(|f| MorrisRow {
                name: f.name.clone(),
                mu: f.mu,
                mu_star: f.mu_star,
                sigma: f.sigma,
                mu_star_conf: f.mu_star_conf,
            })
            .collect();
        let bounds_units = self
            .reference
            .bounds
            .iter()
            .enumerate()
            .map(|(j, &(lo, hi))| (self.units(j, Some(lo)), self.units(j, Some(hi))))
            .collect();
        Ok(MorrisReport {
            output: "class_1_probability".into(),
            table,
            bounds_units,
            result,
        })
    }
}

// ---------------------------------------------------------------------------
// CSV companions
// ---------------------------------------------------------------------------

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format_f64(v)
    } else {
        String::new()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Core(e.into()))?;
    let io = |e: csv::Error| CliError::Core(e.into());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn anova_rows(r: &AnovaReport) -> Vec<Vec<String>> {
    r.results
        .iter()
        .map(|a| {
            vec![
                a.feature.clone(),
                fmt(a.f_stat),
                fmt(a.p_value),
                r.kept.contains(&a.feature).to_string(),
            ]
        })
        .collect()
}

pub fn rfecv_rows(r: &RfecvReport) -> Vec<Vec<String>> {
    r.trace
        .iterations
        .iter()
        .map(|it| {
            vec![
                it.features.len().to_string(),
                fmt(it.mean_accuracy),
                it.names.join(";"),
                it.removed.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

pub fn metrics_rows(m: &MetricsFile) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (name, s) in &m.models {
        for (split, r) in [("train", &s.train), ("test", &s.test)] {
            rows.push(vec![
                name.clone(),
                split.to_string(),
                fmt(r.accuracy),
                fmt(r.weighted.precision),
                fmt(r.weighted.recall),
                fmt(r.weighted.f1),
                fmt(r.kappa),
                fmt(r.auc),
                r.confusion.errors().to_string(),
            ]);
        }
    }
    rows
}

pub fn roc_rows(r: &RocReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (name, e) in &r.models {
        for p in &e.points {
            rows.push(vec![name.clone(), fmt_opt(p.threshold), fmt(p.fpr), fmt(p.tpr)]);
        }
    }
    rows
}

pub fn shap_rows(r: &ShapReport) -> Vec<Vec<String>> {
    r.global
        .ranking
        .iter()
        .map(|(n, v)| vec![n.clone(), fmt(*v)])
        .collect()
}

pub fn morris_rows(r: &MorrisReport) -> Vec<Vec<String>> {
    r.table
        .iter()
        .map(|t| vec![t.name.clone(), fmt(t.mu), fmt(t.mu_star), fmt(t.sigma), fmt(t.mu_star_conf)])
        .collect()
}

pub fn lime_rows(r: &LimeReport) -> Vec<Vec<String>> {
    r.explanation
        .features
        .iter()
        .map(|f| vec![f.name.clone(), fmt(f.weight), f.condition.clone()])
        .collect()
}
