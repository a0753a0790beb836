//! Model-agnostic explainers. None of them mutate the model; each consumes
//! a batch evaluation function over rows in the model's input space.
//!
//! * [`lime`]: local weighted ridge surrogate around one instance.
//! * [`shapley`]: exact Shapley values by coalition enumeration.
//! * [`morris`]: elementary-effects screening over randomized trajectories.

pub mod lime;
pub mod morris;
pub mod shapley;

pub use lime::{lime_design, lime_explain, weighted_ridge, LimeDesign, LimeExplanation, LimeFeature, LimeParams, TrainStats};
pub use morris::{morris_ee, MorrisFeature, MorrisParams, MorrisResult, Trajectory};
pub use shapley::{log_odds, shap_global_ranking, shapley_exact, ShapGlobal, ShapleyValues, MAX_EXACT_FEATURES};
