//! Exact Shapley values over all 2^d coalitions, with interventional
//! (background-averaged) coalition values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{Classifier, Matrix};
use crate::numerics::{logit, Rng};

pub const MAX_EXACT_FEATURES: usize = 12;

/// Log-odds of a classifier's class-1 probability, as a batch value function.
pub fn log_odds<'a, M: Classifier + ?Sized>(model: &'a M) -> impl Fn(&Matrix) -> Result<Vec<f64>> + Sync + 'a {
    move |x: &Matrix| Ok(model.predict_positive(x)?.into_iter().map(logit).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyValues {
    pub phi: Vec<f64>,
    /// Mean model output over the background rows.
    pub base_value: f64,
    /// Model output at the explained instance.
    pub fx: f64,
}

impl ShapleyValues {
    /// |Σφ − (f(x) − E[f])|.
    pub fn efficiency_residual(&self) -> f64 {
        (self.phi.iter().sum::<f64>() - (self.fx - self.base_value)).abs()
    }
}

/// Coalition weights |S|!(d−|S|−1)!/d! indexed by |S|.
fn coalition_weights(d: usize) -> Vec<f64> {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    (0..d).map(|s| fact(s) * fact(d - s - 1) / fact(d)).collect()
}

pub fn shapley_exact<F>(value: F, x: &[f64], background: &Matrix, max_features: usize) -> Result<ShapleyValues>
where
    F: Fn(&Matrix) -> Result<Vec<f64>>,
{
    let d = x.len();
    if d > max_features.min(MAX_EXACT_FEATURES) {
        return Err(Error::TooManyFeatures {
            max: max_features.min(MAX_EXACT_FEATURES),
            found: d,
        });
    }
    if background.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: background.cols(),
        });
    }
    let b = background.rows();
    if b == 0 || d == 0 {
        return Err(Error::EmptyInput);
    }
    let n_coalitions = 1usize << d;
    // Row (mask, k): the instance on coalition members, background row k elsewhere.
    let mut data = Vec::with_capacity(n_coalitions * b * d);
    for mask in 0..n_coalitions {
        for row in background.iter_rows() {
            data.extend((0..d).map(|j| if mask >> j & 1 == 1 { x[j] } else { row[j] }));
        }
    }
    let out = value(&Matrix::new(n_coalitions * b, d, data))?;
    if out.len() != n_coalitions * b {
        return Err(Error::LengthMismatch(out.len(), n_coalitions * b));
    }
    let v: Vec<f64> = out
        .chunks(b)
        .map(|c| c.iter().sum::<f64>() / b as f64)
        .collect();

    let w = coalition_weights(d);
    let mut phi = vec![0.0; d];
    for (j, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << j;
        for mask in (0..n_coalitions).filter(|m| m & bit == 0) {
            *p += w[mask.count_ones() as usize] * (v[mask | bit] - v[mask]);
        }
    }
    Ok(ShapleyValues {
        phi,
        base_value: v[0],
        fx: v[n_coalitions - 1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapGlobal {
    pub names: Vec<String>,
    /// Mean |φ| per feature, in input order.
    pub mean_abs: Vec<f64>,
    /// `(feature, mean |φ|)`, largest first; ties keep input order.
    pub ranking: Vec<(String, f64)>,
    pub base_value: f64,
    /// Dataset rows that were explained.
    pub rows: Vec<usize>,
    pub phi: Vec<Vec<f64>>,
    pub max_efficiency_residual: f64,
}

/// Mean |φ| ranking over `dataset`, optionally on a seeded subsample of at
/// most `max_rows` rows.
pub fn shap_global_ranking<F>(
    value: F,
    dataset: &Matrix,
    background: &Matrix,
    names: &[String],
    max_rows: Option<usize>,
    rng: &mut Rng,
) -> Result<ShapGlobal>
where
    F: Fn(&Matrix) -> Result<Vec<f64>> + Sync,
{
    let d = dataset.cols();
    if names.len() != d {
        return Err(Error::LengthMismatch(names.len(), d));
    }
    if dataset.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    let rows: Vec<usize> = match max_rows {
        Some(m) if m < dataset.rows() => {
            let mut r = rng.sample_indices(dataset.rows(), m);
            r.sort_unstable();
            r
        }
        _ => (0..dataset.rows()).collect(),
    };
    let values: Vec<ShapleyValues> = rows
        .par_iter()
        .map(|&r| shapley_exact(&value, dataset.row(r), background, MAX_EXACT_FEATURES))
        .collect::<Result<_>>()?;
    let mut mean_abs = vec![0.0; d];
    for v in &values {
        for (m, p) in mean_abs.iter_mut().zip(&v.phi) {
            *m += p.abs();
        }
    }
    mean_abs.iter_mut().for_each(|m| *m /= values.len() as f64);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| mean_abs[b].total_cmp(&mean_abs[a]).then(a.cmp(&b)));
    Ok(ShapGlobal {
        names: names.to_vec(),
        ranking: order.iter().map(|&j| (names[j].clone(), mean_abs[j])).collect(),
        mean_abs,
        base_value: values[0].base_value,
        max_efficiency_residual: values
            .iter()
            .map(ShapleyValues::efficiency_residual)
            .fold(0.0, f64::max),
        phi: values.into_iter().map(|v| v.phi).collect(),
        rows,
    })
}
