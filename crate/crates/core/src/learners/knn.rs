//! Inverse-distance-weighted k nearest neighbours (Euclidean, exhaustive scan).

use serde::{Deserialize, Serialize};

use super::{check_dims, check_training_input, Classifier, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub x: Matrix,
    pub y: Vec<u8>,
}

impl KnnParams {
    pub fn fit(&self, x: &Matrix, y: &[u8]) -> Result<KnnModel> {
        check_training_input(x, y)?;
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if self.k > x.rows() {
            return Err(Error::KTooLarge { k: self.k, n: x.rows() });
        }
        Ok(KnnModel {
            k: self.k,
            x: x.clone(),
            y: y.to_vec(),
        })
    }
}

impl KnnModel {
    fn positive_for(&self, query: &[f64], scratch: &mut Vec<(f64, usize)>) -> f64 {
        scratch.clear();
        scratch.extend(self.x.iter_rows().enumerate().map(|(i, r)| {
            let d2: f64 = r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        }));
        // Ties at equal distance resolve to the lower training index.
        let key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = self.k;
        if k < scratch.len() {
            scratch.select_nth_unstable_by(k - 1, key);
        }
        let neighbours = &scratch[..k];

        let zeros: Vec<usize> = neighbours
            .iter()
            .filter(|(d2, _)| *d2 == 0.0)
            .map(|&(_, i)| i)
            .collect();
        if !zeros.is_empty() {
            let pos = zeros.iter().filter(|&&i| self.y[i] == 1).count();
            return pos as f64 / zeros.len() as f64;
        }
        let mut score = [0.0f64; 2];
        for &(d2, i) in neighbours {
            score[self.y[i] as usize] += 1.0 / d2.sqrt();
        }
        score[1] / (score[0] + score[1])
    }
}

impl Classifier for KnnModel {
    fn n_features(&self) -> usize {
        self.x.cols()
    }

    fn predict_positive(&self, x: &Matrix) -> Result<Vec<f64>> {
        if self.x.rows() == 0 {
            return Err(Error::NotFitted);
        }
        if self.k > self.x.rows() {
            return Err(Error::KTooLarge {
                k: self.k,
                n: self.x.rows(),
            });
        }
        check_dims(self.x.cols(), x)?;
        let mut scratch = Vec::with_capacity(self.x.rows());
        Ok(x.iter_rows()
            .map(|q| self.positive_for(q, &mut scratch))
            .collect())
    }
}
