//! Pipeline configuration: one JSON document whose defaults reproduce the
//! reference experiment on the liver patient dataset.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stackliver::explain::{LimeParams, MorrisParams};
use stackliver::learners::{ForestParams, GbdtParams, KnnParams, MlpParams};
use stackliver::preprocess::PreprocessConfig;
use stackliver::selection::RfecvParams;
use stackliver::stacking::StackConfig;
use stackliver::tabular::{ColumnKind, ColumnSpec, CsvOptions, Schema};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub schema: Schema,
    /// Header text → schema column name.
    pub aliases: BTreeMap<String, String>,
    pub missing_tokens: BTreeSet<String>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: None,
            schema: liver_schema(),
            aliases: liver_aliases(),
            missing_tokens: CsvOptions::default().missing_tokens,
        }
    }
}

impl DataConfig {
    pub fn csv_options(&self, label_optional: bool) -> CsvOptions {
        CsvOptions {
            missing_tokens: self.missing_tokens.clone(),
            aliases: self.aliases.clone(),
            label_optional,
        }
    }
}

/// Column layout of the liver patient dataset, with short canonical names.
pub fn liver_schema() -> Schema {
    use ColumnKind::*;
    let cols = [
        ("Age", Numeric),
        ("Gender", Categorical),
        ("Total Bilirubin", Numeric),
        ("Direct Bilirubin", Numeric),
        ("Alkaline Phosphatase", Numeric),
        ("Alanine Aminotransferase", Numeric),
        ("Aspartate Aminotransferase", Numeric),
        ("Total Proteins", Numeric),
        ("Albumin", Numeric),
        ("A/G Ratio", Numeric),
        ("Result", Label),
    ];
    Schema::new(cols.iter().map(|&(n, k)| ColumnSpec::new(n, k)).collect(), 2)
        .expect("built-in schema is valid")
}

/// Header variants seen in circulating copies of the dataset.
pub fn liver_aliases() -> BTreeMap<String, String> {
    [
        ("Age of the patient", "Age"),
        ("Gender of the patient", "Gender"),
        ("TB", "Total Bilirubin"),
        ("DB", "Direct Bilirubin"),
        ("Alkphos", "Alkaline Phosphatase"),
        ("Alkphos Alkaline Phosphotase", "Alkaline Phosphatase"),
        ("Alkaline_Phosphotase", "Alkaline Phosphatase"),
        ("Sgpt", "Alanine Aminotransferase"),
        ("Sgpt Alamine Aminotransferase", "Alanine Aminotransferase"),
        ("Alamine_Aminotransferase", "Alanine Aminotransferase"),
        ("Sgot", "Aspartate Aminotransferase"),
        ("Sgot Aspartate Aminotransferase", "Aspartate Aminotransferase"),
        ("Aspartate_Aminotransferase", "Aspartate Aminotransferase"),
        ("TP", "Total Proteins"),
        ("Total Protiens", "Total Proteins"),
        ("Total_Protiens", "Total Proteins"),
        ("ALB", "Albumin"),
        ("ALB Albumin", "Albumin"),
        ("A/G Ratio Albumin and Globulin Ratio", "A/G Ratio"),
        ("Albumin_and_Globulin_Ratio", "A/G Ratio"),
        ("Total_Bilirubin", "Total Bilirubin"),
        ("Direct_Bilirubin", "Direct Bilirubin"),
        ("Selector", "Result"),
        ("Dataset", "Result"),
    ]
    .iter()
    .map(|&(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub stratified: bool,
    pub iqr_multiplier: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let p = PreprocessConfig::default();
        Self {
            train_fraction: p.train_fraction,
            stratified: p.stratified,
            iqr_multiplier: p.iqr_multiplier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnovaConfig {
    pub alpha: f64,
}

impl Default for AnovaConfig {
    fn default() -> Self {
        Self { alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub k_folds: usize,
    pub report_sizes: Vec<usize>,
    /// Subset size carried forward; `None` keeps the best-scoring subset.
    pub select_size: Option<usize>,
    pub forest: ForestParams,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        let r = RfecvParams::default();
        Self {
            k_folds: r.k_folds,
            report_sizes: r.report_sizes,
            select_size: Some(5),
            forest: r.forest,
        }
    }
}

impl SelectionConfig {
    pub fn rfecv_params(&self) -> RfecvParams {
        RfecvParams {
            k_folds: self.k_folds,
            forest: self.forest.clone(),
            report_sizes: self.report_sizes.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    Gbdt,
    Knn,
    Mlp,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Gbdt => "gbdt",
            Baseline::Knn => "knn",
            Baseline::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub enabled: Vec<Baseline>,
    pub gbdt: GbdtParams,
    pub knn: KnnParams,
    pub mlp: MlpParams,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            enabled: vec![Baseline::Gbdt, Baseline::Knn, Baseline::Mlp],
            gbdt: GbdtParams::base(),
            knn: KnnParams::default(),
            mlp: MlpParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub cv_folds: usize,
    /// Baselines cross-validated next to the stack.
    pub cv_baselines: Vec<Baseline>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            cv_folds: 5,
            cv_baselines: vec![Baseline::Gbdt, Baseline::Knn, Baseline::Mlp],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub lime: LimeParams,
    pub shap_rows: usize,
    pub shap_background: usize,
    pub morris: MorrisParams,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            lime: LimeParams::default(),
            shap_rows: 100,
            shap_background: 20,
            morris: MorrisParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataConfig,
    pub seed: u64,
    pub split: SplitConfig,
    pub anova: AnovaConfig,
    pub selection: SelectionConfig,
    pub stack: StackConfig,
    pub baselines: BaselineConfig,
    pub evaluation: EvaluationConfig,
    pub explain: ExplainConfig,
    pub output: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            data: DataConfig::default(),
            seed: 42,
            split: SplitConfig::default(),
            anova: AnovaConfig::default(),
            selection: SelectionConfig::default(),
            stack: StackConfig::default(),
            baselines: BaselineConfig::default(),
            evaluation: EvaluationConfig::default(),
            explain: ExplainConfig::default(),
            output: PathBuf::from("stackliver-out"),
        }
    }
}

impl PipelineConfig {
    /// Reads a config file; relative data paths resolve against the file's
    /// directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let (Some(p), Some(dir)) = (&config.data.path, path.parent()) {
            if p.is_relative() {
                config.data.path = Some(dir.join(p));
            }
        }
        Ok(config)
    }

    pub fn preprocess_config(&self) -> PreprocessConfig {
        PreprocessConfig {
            train_fraction: self.split.train_fraction,
            seed: self.seed,
            stratified: self.split.stratified,
            iqr_multiplier: self.split.iqr_multiplier,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        let f = self.split.train_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return bad(format!("train_fraction {f} outside (0, 1]"));
        }
        let a = self.anova.alpha;
        if !(a > 0.0 && a < 1.0) {
            return bad(format!("anova alpha {a} outside (0, 1)"));
        }
        if !(self.split.iqr_multiplier >= 0.0) {
            return bad("iqr_multiplier must be non-negative".into());
        }
        let names: BTreeSet<&str> = self.data.schema.columns().iter().map(|c| c.name.as_str()).collect();
        for target in self.data.aliases.values() {
            if !names.contains(target.as_str()) {
                return bad(format!("alias target `{target}` is not a schema column"));
            }
        }
        if self.selection.k_folds < 2 || self.evaluation.cv_folds < 2 || self.stack.k_folds < 2 {
            return bad("fold counts must be at least 2".into());
        }
        self.stack.base_gbdt.validate().map_err(CliError::from)?;
        self.stack.meta.validate().map_err(CliError::from)?;
        self.baselines.gbdt.validate().map_err(CliError::from)?;
        if self.explain.shap_background == 0 {
            return bad("shap_background must be positive".into());
        }
        Ok(())
    }

    /// Data path, or a config error when none was given.
    pub fn data_path(&self) -> CliResult<&Path> {
        self.data
            .path
            .as_deref()
            .ok_or_else(|| CliError::Config("no dataset path (set data.path or pass --data)".into()))
    }
}
