//! Stacked GBDT + KNN ensemble for binary tabular classification.
//!
//! The pipeline runs raw CSV ingestion ([`tabular`]), cleaning, splitting and
//! scaling ([`preprocess`]), ANOVA screening ([`numerics`]), recursive
//! feature elimination ([`selection`]), the stacked ensemble ([`stacking`])
//! built from the base [`learners`], metrics and cross-validation
//! ([`evaluation`]) and post-hoc explanations ([`explain`]).

pub mod error;
pub mod evaluation;
pub mod explain;
pub mod learners;
pub mod model;
pub mod numerics;
pub mod preprocess;
pub mod selection;
pub mod stacking;
pub mod synth;
pub mod tabular;

pub use error::{Error, ErrorKind, Result};
pub use learners::{Classifier, Matrix};
pub use model::ClassifierModel;
