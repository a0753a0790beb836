//! Stage-by-stage pipeline behind `run-all` and the partial subcommands.
//!
//! Stages run in a fixed order: ingest, preprocess (split, winsorize,
//! standardize, undersample), anova, select, train, evaluate, cv, explain.
//! A subcommand runs every stage up to and including its own.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;
use stackliver::evaluation::{cross_validate, evaluate, roc_curve, timed, CvReport};
use stackliver::explain::TrainStats;
use stackliver::numerics::{significance_filter, Rng};
use stackliver::preprocess::{prepare, random_undersample};
use stackliver::selection::{rfecv, select_k};
use stackliver::stacking::fit_stack;
use stackliver::tabular::read_csv_from;
use stackliver::{Classifier, ClassifierModel, Matrix};

use crate::bundle::{restrict, ModelBundle, Provenance, ReferenceData, FORMAT_VERSION};
use crate::cache::{sha256_hex, stage_key, StageCache};
use crate::canonical::write_canonical;
use crate::config::{Baseline, PipelineConfig};
use crate::error::{CliError, CliResult, ErrorRecord};
use crate::reports::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Preprocess,
    Anova,
    Select,
    Train,
    Evaluate,
    Cv,
    Explain,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Preprocess,
        Stage::Anova,
        Stage::Select,
        Stage::Train,
        Stage::Evaluate,
        Stage::Cv,
        Stage::Explain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Anova => "anova",
            Stage::Select => "select",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Cv => "cv",
            Stage::Explain => "explain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    /// JSON plus CSV versions of the tabular reports.
    Csv,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub command: String,
    pub until: Stage,
    pub out: PathBuf,
    pub format: Format,
    pub use_cache: bool,
}

/// Fitted models keyed by name ("stack" plus the enabled baselines).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModels {
    pub models: BTreeMap<String, ClassifierModel>,
    pub train_seconds: BTreeMap<String, f64>,
}

pub fn train_models(config: &PipelineConfig, x: &Matrix, y: &[u8]) -> CliResult<TrainedModels> {
    let seed = config.seed;
    let mut models = BTreeMap::new();
    let mut train_seconds = BTreeMap::new();
    let (stack, secs) = timed(|| fit_stack(x, y, &config.stack, seed));
    models.insert("stack".to_string(), ClassifierModel::Stack(Box::new(stack?)));
    train_seconds.insert("stack".to_string(), secs);
    let enabled: BTreeSet<Baseline> = config.baselines.enabled.iter().copied().collect();
    for b in enabled {
        let b_cfg = &config.baselines;
        let (model, secs) = timed(|| match b {
            Baseline::Gbdt => b_cfg.gbdt.fit(x, y, &mut Rng::new(seed)).map(ClassifierModel::Gbdt),
            Baseline::Knn => b_cfg.knn.fit(x, y).map(ClassifierModel::Knn),
            Baseline::Mlp => b_cfg.mlp.fit(x, y, &mut Rng::new(seed)).map(ClassifierModel::Mlp),
        });
        log::info!("trained {} in {secs:.3} s", b.name());
        models.insert(b.name().to_string(), model?);
        train_seconds.insert(b.name().to_string(), secs);
    }
    Ok(TrainedModels { models, train_seconds })
}

/// Stratified CV of the stack and the configured baselines.
pub fn cross_validate_models(config: &PipelineConfig, x: &Matrix, y: &[u8]) -> CliResult<BTreeMap<String, CvReport>> {
    let k = config.evaluation.cv_folds;
    let seed = config.seed;
    let mut out = BTreeMap::new();
    let stack_cfg = &config.stack;
    out.insert(
        "stack".to_string(),
        cross_validate(x, y, k, seed, |x, y, rng| fit_stack(x, y, stack_cfg, rng.next_u64()))?,
    );
    let b = &config.baselines;
    let chosen: BTreeSet<Baseline> = config.evaluation.cv_baselines.iter().copied().collect();
    for base in chosen {
        let report = match base {
            Baseline::Gbdt => cross_validate(x, y, k, seed, |x, y, rng| b.gbdt.fit(x, y, rng))?,
            Baseline::Knn => cross_validate(x, y, k, seed, |x, y, _| b.knn.fit(x, y))?,
            Baseline::Mlp => cross_validate(x, y, k, seed, |x, y, rng| b.mlp.fit(x, y, rng))?,
        };
        out.insert(base.name().to_string(), report);
    }
    // Wall-clock fold timings stay out of the report.
    for report in out.values_mut() {
        report.folds.iter_mut().for_each(|f| f.report.timings = None);
    }
    Ok(out)
}

/// Explainer reference data drawn from the training matrix.
pub fn reference_data(x: &Matrix, background: usize, seed: u64) -> CliResult<ReferenceData> {
    let stats = TrainStats::from_matrix(x)?;
    let bounds = (0..x.cols())
        .map(|c| {
            let col = x.column(c);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();
    let mut rows = Rng::new(seed).sample_indices(x.rows(), background.min(x.rows()));
    rows.sort_unstable();
    Ok(ReferenceData {
        stats,
        bounds,
        background: x.select_rows(&rows),
    })
}

/// First row index of each class, class 0 first.
pub fn first_of_each_class(y: &[u8]) -> Vec<usize> {
    [0u8, 1]
        .iter()
        .filter_map(|&c| y.iter().position(|&v| v == c))
        .collect()
}

struct Runner<'a> {
    config: &'a PipelineConfig,
    opts: &'a RunOptions,
    cache: StageCache,
    status: BTreeMap<Stage, &'static str>,
    current: Option<(Stage, Instant)>,
    reports: BTreeSet<String>,
    timings: TimingReport,
    data_hash: Option<String>,
}

pub struct RunOutcome {
    pub manifest: Manifest,
    pub timings: TimingReport,
}

/// Runs the pipeline up to `opts.until`, writing reports, the stage
/// manifest and (on failure) `error.json` into `opts.out`.
pub fn run_pipeline(config: &PipelineConfig, opts: &RunOptions) -> CliResult<RunOutcome> {
    config.validate()?;
    std::fs::create_dir_all(&opts.out).map_err(|e| CliError::io(&opts.out, e))?;
    let mut runner = Runner {
        config,
        opts,
        cache: StageCache::new(&opts.out, opts.use_cache),
        status: BTreeMap::new(),
        current: None,
        reports: BTreeSet::new(),
        timings: TimingReport::default(),
        data_hash: None,
    };
    let result = runner.execute();
    let failed_stage = match &result {
        Err(_) => runner.current.map(|(s, _)| s),
        Ok(()) => None,
    };
    if let Some(s) = failed_stage {
        runner.status.insert(s, "failed");
    }
    if let Err(e) = &result {
        let record = ErrorRecord::new(e, failed_stage.map(Stage::name));
        write_canonical(&opts.out.join("error.json"), &record)?;
    } else {
        let _ = std::fs::remove_file(opts.out.join("error.json"));
    }
    write_canonical(&opts.out.join("timings.json"), &runner.timings)?;
    runner.reports.insert("timings.json".into());
    let manifest = runner.manifest(result.is_ok());
    write_canonical(&opts.out.join("manifest.json"), &manifest)?;
    result.map(|()| RunOutcome {
        manifest,
        timings: runner.timings,
    })
}

impl Runner<'_> {
    /// Starts `stage`; false when it lies beyond the requested one.
    fn enter(&mut self, stage: Stage) -> bool {
        if stage > self.opts.until {
            return false;
        }
        log::info!("stage {}", stage.name());
        self.current = Some((stage, Instant::now()));
        true
    }

    fn leave(&mut self) {
        if let Some((stage, t0)) = self.current.take() {
            self.status.insert(stage, "ok");
            self.timings
                .stages
                .insert(stage.name().to_string(), t0.elapsed().as_micros() as f64 / 1e6);
        }
    }

    fn write<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        write_canonical(&self.opts.out.join(name), value)?;
        self.reports.insert(name.to_string());
        Ok(())
    }

    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        if self.opts.format != Format::Csv {
            return Ok(());
        }
        let path = self.opts.out.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        write_table(&path, header, rows)?;
        self.reports.insert(name.to_string());
        Ok(())
    }

    fn manifest(&self, ok: bool) -> Manifest {
        Manifest {
            format_version: FORMAT_VERSION,
            command: self.opts.command.clone(),
            seed: self.config.seed,
            data_sha256: self.data_hash.clone(),
            status: if ok { "ok" } else { "failed" }.into(),
            stages: Stage::ALL
                .iter()
                .map(|s| StageStatus {
                    stage: s.name().into(),
                    status: self.status.get(s).copied().unwrap_or("not_run").into(),
                })
                .collect(),
            reports: self.reports.iter().cloned().collect(),
        }
    }

    fn execute(&mut self) -> CliResult<()> {
        let cfg = self.config;
        let seed = cfg.seed;

        self.enter(Stage::Ingest);
        let path = cfg.data_path()?.to_path_buf();
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let data_hash = sha256_hex(&bytes);
        self.data_hash = Some(data_hash.clone());
        let raw = read_csv_from(&bytes[..], &cfg.data.schema, &cfg.data.csv_options(false))?;
        self.leave();

        if !self.enter(Stage::Preprocess) {
            return Ok(());
        }
        let prepared = prepare(&raw, &cfg.preprocess_config())?;
        let balanced = random_undersample(&prepared.train, seed)?;
        let y_bal = balanced.binary_labels()?;
        let y_test = prepared.test.binary_labels()?;
        let predictors = cfg.data.schema.predictor_names();
        let pre = PreprocessReport {
            rows_read: prepared.report.rows_read,
            rows_after_drop: prepared.report.rows_after_drop,
            predictors: predictors.clone(),
            train: ClassCounts::of(&prepared.train.binary_labels()?),
            undersampled: ClassCounts::of(&y_bal),
            test: ClassCounts::of(&y_test),
            warnings: prepared.report.warnings.clone(),
        };
        self.write("preprocess.json", &pre)?;
        let count_row = |split: &str, c: &ClassCounts| {
            vec![split.to_string(), c.class_0.to_string(), c.class_1.to_string(), c.total.to_string()]
        };
        self.table(
            "preprocess.csv",
            &["split", "class_0", "class_1", "total"],
            &[
                count_row("train", &pre.train),
                count_row("undersampled", &pre.undersampled),
                count_row("test", &pre.test),
            ],
        )?;
        self.leave();

        if !self.enter(Stage::Anova) {
            return Ok(());
        }
        let (kept, results) = significance_filter(&prepared.train, &predictors, cfg.anova.alpha)?;
        let anova = AnovaReport {
            alpha: cfg.anova.alpha,
            results,
            dropped: predictors.iter().filter(|p| !kept.contains(p)).cloned().collect(),
            kept: kept.clone(),
        };
        self.write("anova.json", &anova)?;
        self.table("anova.csv", &["feature", "f_stat", "p_value", "kept"], &anova_rows(&anova))?;
        self.leave();

        if !self.enter(Stage::Select) {
            return Ok(());
        }
        let base_key = json!({
            "data_sha256": data_hash,
            "schema": cfg.data.schema,
            "aliases": cfg.data.aliases,
            "missing_tokens": cfg.data.missing_tokens,
            "seed": seed,
            "split": cfg.split,
            "anova": cfg.anova,
        });
        let params = cfg.selection.rfecv_params();
        let rfecv_key = stage_key("rfecv", &json!({"base": base_key, "rfecv": params}))?;
        let x_kept = balanced.feature_matrix(&kept)?;
        let (trace, _) = self
            .cache
            .get_or_compute("rfecv", &rfecv_key, || Ok(rfecv(&x_kept, &y_bal, &kept, &params, seed)?))?;
        let mut warnings = Vec::new();
        let chosen = match cfg.selection.select_size {
            Some(k) => match select_k(&trace, k) {
                Ok(f) => f,
                Err(stackliver::Error::SizeNotRecorded(_)) => {
                    let msg = format!(
                        "no subset of size {k} among {} candidates; using the best subset ({} features)",
                        kept.len(),
                        trace.best_features.len()
                    );
                    log::warn!("{msg}");
                    warnings.push(msg);
                    trace.best_features.clone()
                }
                Err(e) => return Err(e.into()),
            },
            None => trace.best_features.clone(),
        };
        let selected: Vec<String> = chosen.iter().map(|&i| kept[i].clone()).collect();
        let rfe = RfecvReport {
            data: "undersampled_train".into(),
            candidates: kept.clone(),
            trace,
            select_size: cfg.selection.select_size,
            selected: selected.clone(),
            warnings,
        };
        self.write("rfecv.json", &rfe)?;
        self.table(
            "rfecv.csv",
            &["n_features", "mean_accuracy", "features", "removed"],
            &rfecv_rows(&rfe),
        )?;
        self.leave();

        if !self.enter(Stage::Train) {
            return Ok(());
        }
        let x_train = balanced.feature_matrix(&selected)?;
        let x_test = prepared.test.feature_matrix(&selected)?;
        let train_key = stage_key(
            "train",
            &json!({
                "rfecv": rfecv_key,
                "features": selected,
                "seed": seed,
                "stack": cfg.stack,
                "baselines": cfg.baselines,
            }),
        )?;
        let (trained, hit) = self
            .cache
            .get_or_compute("train", &train_key, || train_models(cfg, &x_train, &y_bal))?;
        for (name, &secs) in &trained.train_seconds {
            self.timings.models.insert(
                name.clone(),
                ModelTiming {
                    train_seconds: secs,
                    inference_seconds: None,
                    cached: hit,
                },
            );
        }
        let (preprocess, schema) = restrict(&prepared.state, &cfg.data.schema, &selected)?;
        let bundle = ModelBundle {
            format_version: FORMAT_VERSION,
            schema,
            preprocess,
            features: selected.clone(),
            model: trained.models["stack"].clone(),
            reference: reference_data(&x_train, cfg.explain.shap_background, seed)?,
            config: cfg.clone(),
            provenance: Provenance {
                seed,
                created_unix: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                library_version: env!("CARGO_PKG_VERSION").to_string(),
            },
        };
        bundle.save(&self.opts.out.join("model.json"))?;
        self.reports.insert("model.json".into());
        self.leave();

        if !self.enter(Stage::Evaluate) {
            return Ok(());
        }
        let mut models = BTreeMap::new();
        let mut roc = BTreeMap::new();
        let mut confusion = BTreeMap::new();
        for (name, model) in &trained.models {
            let p_train = model.predict_positive(&x_train)?;
            let (p_test, secs) = timed(|| model.predict_positive(&x_test));
            let p_test = p_test?;
            let train = evaluate(&y_bal, &p_train)?;
            let test = evaluate(&y_test, &p_test)?;
            roc.insert(
                name.clone(),
                RocEntry {
                    auc: test.auc,
                    points: roc_curve(&y_test, &p_test)?,
                },
            );
            confusion.insert(
                name.clone(),
                ConfusionPair {
                    train: train.confusion,
                    test: test.confusion,
                },
            );
            if let Some(t) = self.timings.models.get_mut(name) {
                t.inference_seconds = Some(secs);
            }
            models.insert(name.clone(), SplitMetrics { train, test });
        }
        let mut metrics = MetricsFile {
            features: selected.clone(),
            models,
            cv: None,
        };
        let roc = RocReport { models: roc };
        self.write("metrics.json", &metrics)?;
        self.write("roc.json", &roc)?;
        self.write("confusion.json", &ConfusionReport { models: confusion })?;
        let metric_header = [
            "model", "split", "accuracy", "precision", "recall", "f1", "kappa", "auc", "errors",
        ];
        self.table("metrics.csv", &metric_header, &metrics_rows(&metrics))?;
        self.table("roc.csv", &["model", "threshold", "fpr", "tpr"], &roc_rows(&roc))?;
        self.leave();

        if !self.enter(Stage::Cv) {
            return Ok(());
        }
        let cv_key = stage_key("cv", &json!({"train": train_key, "evaluation": cfg.evaluation}))?;
        let (cv, _) = self
            .cache
            .get_or_compute("cv", &cv_key, || cross_validate_models(cfg, &x_train, &y_bal))?;
        metrics.cv = Some(cv.iter().map(|(k, r)| (k.clone(), CvSummary::of(r))).collect());
        self.write("cv.json", &cv)?;
        self.write("metrics.json", &metrics)?;
        self.leave();

        if !self.enter(Stage::Explain) {
            return Ok(());
        }
        let ctx = ExplainContext {
            model: &bundle.model,
            features: &selected,
            reference: &bundle.reference,
            preprocess: &bundle.preprocess,
            config: &cfg.explain,
        };
        let seeds = ExplainSeeds::derive(seed);
        for lime in ctx.lime(&x_test, &first_of_each_class(&y_test), Some(&y_test), seeds.lime)? {
            let stem = format!(
                "lime/class_{}_row_{}",
                lime.true_label.unwrap_or_default(),
                lime.row
            );
            self.write(&format!("{stem}.json"), &lime)?;
            self.table(&format!("{stem}.csv"), &["feature", "weight", "condition"], &lime_rows(&lime))?;
        }
        let shap = ctx.shap(&x_test, seeds.shap)?;
        self.write("shap.json", &shap)?;
        self.table("shap.csv", &["feature", "mean_abs_shap"], &shap_rows(&shap))?;
        let morris = ctx.morris(seeds.morris)?;
        self.write("morris.json", &morris)?;
        self.table(
            "morris.csv",
            &["feature", "mu", "mu_star", "sigma", "mu_star_conf"],
            &morris_rows(&morris),
        )?;
        self.leave();
        Ok(())
    }
}

/// Output directory: `STACKLIVER_OUT`, then the flag, then the config.
pub fn resolve_out(flag: Option<&Path>, config: &PipelineConfig) -> PathBuf {
    if let Some(env) = std::env::var_os("STACKLIVER_OUT").filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    flag.map(Path::to_path_buf).unwrap_or_else(|| config.output.clone())
}
