//! Base learners behind a common probability-output contract.
//!
//! * [`cart`]: Gini decision tree and the bagged random forest built on it.
//! * [`gbdt`]: second-order gradient boosting with depth-wise or leaf-wise
//!   tree growth.
//! * [`knn`]: inverse-distance-weighted k nearest neighbours.
//! * [`mlp`]: two-hidden-layer ReLU network trained with Adam.

pub mod cart;
pub mod gbdt;
pub mod knn;
pub mod mlp;
mod presort;
pub mod tree;

pub use cart::{CartParams, ForestModel, ForestParams, TreeModel};
pub use gbdt::{gbdt_split_gain, GbdtModel, GbdtParams, Growth};
pub use knn::{KnnModel, KnnParams};
pub use mlp::{MlpModel, MlpParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix::new(rows.len(), self.cols, data)
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Matrix::new(self.rows, cols.len(), data)
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |r| self.row(r))
    }
}

/// A fitted binary classifier.
pub trait Classifier: Send + Sync {
    fn n_features(&self) -> usize;

    /// Class-1 probability for every row of `x`.
    fn predict_positive(&self, x: &Matrix) -> Result<Vec<f64>>;

    /// `[P(class 0), P(class 1)]` per row.
    fn predict_proba(&self, x: &Matrix) -> Result<Vec<[f64; 2]>> {
        Ok(self
            .predict_positive(x)?
            .into_iter()
            .map(|p| [1.0 - p, p])
            .collect())
    }

    /// Hard labels at the 0.5 threshold.
    fn predict(&self, x: &Matrix) -> Result<Vec<u8>> {
        Ok(self
            .predict_positive(x)?
            .into_iter()
            .map(|p| u8::from(p >= 0.5))
            .collect())
    }

    /// Normalised importances summing to 1, when the model defines them.
    fn feature_importances(&self) -> Option<Vec<f64>> {
        None
    }
}

pub fn check_dims(expected: usize, x: &Matrix) -> Result<()> {
    if x.cols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.cols(),
        });
    }
    Ok(())
}

pub fn check_training_input(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::EmptyInput);
    }
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch(x.rows(), y.len()));
    }
    if let Some(&bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::NonBinary(bad as i64));
    }
    Ok(())
}

pub(crate) fn require_both_classes(y: &[u8]) -> Result<()> {
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Normalises non-negative scores to sum 1; all-zero input becomes uniform.
pub(crate) fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    } else if !v.is_empty() {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
    v
}
