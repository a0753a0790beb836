//! Any fitted learner behind one serializable type.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::learners::{Classifier, ForestModel, GbdtModel, KnnModel, Matrix, MlpModel, TreeModel};
use crate::stacking::StackModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum ClassifierModel {
    Cart(TreeModel),
    Forest(ForestModel),
    Gbdt(GbdtModel),
    Knn(KnnModel),
    Mlp(MlpModel),
    Stack(Box<StackModel>),
}

impl ClassifierModel {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Cart(_) => "cart",
            Self::Forest(_) => "forest",
            Self::Gbdt(_) => "gbdt",
            Self::Knn(_) => "knn",
            Self::Mlp(_) => "mlp",
            Self::Stack(_) => "stack",
        }
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            Self::Cart(m) => m,
            Self::Forest(m) => m,
            Self::Gbdt(m) => m,
            Self::Knn(m) => m,
            Self::Mlp(m) => m,
            Self::Stack(m) => m.as_ref(),
        }
    }
}

impl Classifier for ClassifierModel {
    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn predict_positive(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.inner().predict_positive(x)
    }

    fn feature_importances(&self) -> Option<Vec<f64>> {
        self.inner().feature_importances()
    }
}
