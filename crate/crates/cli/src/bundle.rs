//! Saved model bundle: everything `predict` and `explain` need to replay the
//! pipeline on new raw rows.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stackliver::explain::TrainStats;
use stackliver::preprocess::PreprocessState;
use stackliver::tabular::{ColumnKind, Frame, Schema};
use stackliver::{ClassifierModel, Matrix};

use crate::canonical::write_canonical;
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u64 = 1;

/// Training-set statistics in model input space, used by the explainers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceData {
    pub stats: TrainStats,
    /// Per-feature (min, max) over the training rows.
    pub bounds: Vec<(f64, f64)>,
    pub background: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub created_unix: u64,
    pub library_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u64,
    /// Schema restricted to the selected features and the label.
    pub schema: Schema,
    pub preprocess: PreprocessState,
    pub features: Vec<String>,
    pub model: ClassifierModel,
    pub reference: ReferenceData,
    pub config: PipelineConfig,
    pub provenance: Provenance,
}

/// Restricts a fitted preprocessing state and schema to `features` (plus the
/// label), so prediction inputs only need the selected columns.
pub fn restrict(state: &PreprocessState, schema: &Schema, features: &[String]) -> CliResult<(PreprocessState, Schema)> {
    let keep = |name: &String| features.contains(name);
    let mut s = state.clone();
    s.categorical.retain(|k, _| keep(k));
    s.fences.retain(|k, _| keep(k));
    s.standardizer.scales.retain(|k, _| keep(k));
    let columns = schema
        .columns()
        .iter()
        .filter(|c| c.kind == ColumnKind::Label || features.contains(&c.name))
        .cloned()
        .collect();
    let schema = Schema::new(columns, schema.label_positive())?;
    for f in features {
        if schema.position(f).is_none() {
            return Err(CliError::Config(format!("selected feature `{f}` is not in the schema")));
        }
    }
    Ok((s, schema))
}

impl ModelBundle {
    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_canonical(path, self)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Bundle(format!("{}: {e}", path.display())))?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| CliError::Bundle("missing format_version".into()))?;
        if version > FORMAT_VERSION {
            return Err(CliError::VersionMismatch {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        serde_json::from_value(value).map_err(|e| CliError::Bundle(format!("{}: {e}", path.display())))
    }

    /// Applies the saved preprocessing and returns the model matrix.
    pub fn transform(&self, raw: &Frame) -> CliResult<Matrix> {
        let frame = self.preprocess.apply(raw)?;
        Ok(frame.feature_matrix(&self.features)?)
    }
}
