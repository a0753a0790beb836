//! Bundle-based subcommands: `predict` and `explain`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use stackliver::evaluation::timed;
use stackliver::tabular::{read_csv_from, Frame};
use stackliver::{Classifier, Matrix};

use crate::bundle::ModelBundle;
use crate::canonical::write_canonical;
use crate::error::{CliError, CliResult};
use crate::pipeline::first_of_each_class;
use crate::reports::{ExplainContext, ExplainSeeds, LimeReport, MorrisReport, ShapReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Lime,
    Shap,
    Morris,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictSummary {
    pub rows: usize,
    pub seconds: f64,
}

/// Reads `data` with the bundle's column subset; `None` for a file without
/// data rows.
fn read_input(bundle: &ModelBundle, data: &Path) -> CliResult<Option<Frame>> {
    let bytes = std::fs::read(data).map_err(|e| CliError::io(data, e))?;
    match read_csv_from(&bytes[..], &bundle.schema, &bundle.config.data.csv_options(true)) {
        Ok(f) => Ok(Some(f)),
        Err(stackliver::Error::EmptyFile) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Class-1 probabilities for every row of `data`.
pub fn predict_probabilities(bundle: &ModelBundle, data: &Path) -> CliResult<Vec<f64>> {
    match read_input(bundle, data)? {
        Some(frame) => Ok(bundle.model.predict_positive(&bundle.transform(&frame)?)?),
        None => Ok(Vec::new()),
    }
}

/// Writes `row,probability,label` per input row. Probabilities use the
/// shortest representation that parses back to the same value.
pub fn predict(bundle_path: &Path, data: &Path, output: &Path) -> CliResult<PredictSummary> {
    let bundle = ModelBundle::load(bundle_path)?;
    let (proba, seconds) = timed(|| predict_probabilities(&bundle, data));
    let proba = proba?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut text = String::from("row,probability,label\n");
    for (i, p) in proba.iter().enumerate() {
        text.push_str(&format!("{i},{p},{}\n", u8::from(*p >= 0.5)));
    }
    let mut file = std::fs::File::create(output).map_err(|e| CliError::io(output, e))?;
    file.write_all(text.as_bytes()).map_err(|e| CliError::io(output, e))?;
    Ok(PredictSummary {
        rows: proba.len(),
        seconds,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ExplainOutput {
    Lime { reports: Vec<LimeReport> },
    Shap(ShapReport),
    Morris(MorrisReport),
}

/// Runs one explainer against the bundle's model. LIME explains `rows`, or
/// the first row of each class when rows is empty and labels are present
/// (row 0 otherwise).
pub fn explain(
    bundle_path: &Path,
    data: Option<&Path>,
    method: Method,
    rows: &[usize],
    seed: Option<u64>,
) -> CliResult<ExplainOutput> {
    let bundle = ModelBundle::load(bundle_path)?;
    let seeds = ExplainSeeds::derive(seed.unwrap_or(bundle.provenance.seed));
    let ctx = ExplainContext {
        model: &bundle.model,
        features: &bundle.features,
        reference: &bundle.reference,
        preprocess: &bundle.preprocess,
        config: &bundle.config.explain,
    };
    if method == Method::Morris {
        return Ok(ExplainOutput::Morris(ctx.morris(seeds.morris)?));
    }
    let data = data.ok_or_else(|| CliError::Config(format!("{method:?} needs --data")))?;
    let raw = read_input(&bundle, data)?.ok_or(stackliver::Error::EmptyFile)?;
    let frame = bundle.preprocess.apply(&raw)?;
    let x: Matrix = frame.feature_matrix(&bundle.features)?;
    match method {
        Method::Shap => Ok(ExplainOutput::Shap(ctx.shap(&x, seeds.shap)?)),
        Method::Lime => {
            let (_, missing) = frame.labels();
            let labels = if missing.iter().any(|&m| m) {
                None
            } else {
                Some(frame.binary_labels()?)
            };
            let rows = if !rows.is_empty() {
                rows.to_vec()
            } else if let Some(y) = &labels {
                first_of_each_class(y)
            } else {
                vec![0]
            };
            let reports = ctx.lime(&x, &rows, labels.as_deref(), seeds.lime)?;
            Ok(ExplainOutput::Lime { reports })
        }
        Method::Morris => unreachable!("handled above"),
    }
}

pub fn write_explanation(output: &Path, value: &ExplainOutput) -> CliResult<()> {
    write_canonical(output, value)
}
