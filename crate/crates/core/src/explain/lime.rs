//! LIME for tabular data: Gaussian perturbations around the training
//! distribution, an exponential kernel on standardized distance, and a
//! weighted ridge surrogate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::Matrix;
use crate::numerics::{mean_std, Rng};

/// Kernel weight mass below which the neighbourhood counts as empty.
const KERNEL_FLOOR: f64 = 1e-12;

/// Quartile points of the standard normal.
const NORMAL_QUARTILE: f64 = 0.674_489_750_196_081_7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub means: Vec<f64>,
    /// Population standard deviations.
    pub stds: Vec<f64>,
}

impl TrainStats {
    pub fn from_matrix(x: &Matrix) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::EmptyInput);
        }
        let (means, stds) = (0..x.cols())
            .map(|c| mean_std(&x.column(c)).unwrap_or((0.0, 0.0)))
            .unzip();
        Ok(Self { means, stds })
    }

    fn scale(&self, j: usize) -> f64 {
        if self.stds[j] > 0.0 {
            self.stds[j]
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimeParams {
    pub n_samples: usize,
    /// Kernel width; `None` means 0.75·√d.
    pub kernel_width: Option<f64>,
    pub ridge: f64,
}

impl Default for LimeParams {
    fn default() -> Self {
        Self {
            n_samples: 5000,
            kernel_width: None,
            ridge: 1.0,
        }
    }
}

/// Everything the surrogate regression sees.
#[derive(Debug, Clone)]
pub struct LimeDesign {
    /// Perturbations in the model's input space.
    pub samples: Matrix,
    /// Perturbations standardized by the training statistics.
    pub standardized: Matrix,
    /// Model class-1 probability per sample.
    pub targets: Vec<f64>,
    pub weights: Vec<f64>,
    pub kernel_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeFeature {
    pub name: String,
    /// Surrogate coefficient per training standard deviation.
    pub weight: f64,
    /// Quartile bin holding the instance value, in model input units.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub condition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeExplanation {
    pub instance: usize,
    pub predicted_class: u8,
    pub predicted_proba: f64,
    pub intercept: f64,
    pub kernel_width: f64,
    pub n_samples: usize,
    /// Weighted R² of the surrogate; `None` when the targets are constant.
    pub fidelity: Option<f64>,
    pub features: Vec<LimeFeature>,
}

/// Draws the perturbations, queries the model and computes kernel weights.
pub fn lime_design<F>(predict: F, x: &[f64], stats: &TrainStats, params: &LimeParams, rng: &mut Rng) -> Result<LimeDesign>
where
    F: Fn(&Matrix) -> Result<Vec<f64>>,
{
    let d = x.len();
    if stats.means.len() != d || stats.stds.len() != d {
        return Err(Error::DimensionMismatch {
            expected: stats.means.len(),
            found: d,
        });
    }
    if params.n_samples < 2 {
        return Err(Error::InvalidParameter("LIME needs at least 2 samples".into()));
    }
    let width = params
        .kernel_width
        .unwrap_or_else(|| 0.75 * (d as f64).sqrt());
    if !(width > 0.0) {
        return Err(Error::InvalidParameter("kernel width must be positive".into()));
    }
    let n = params.n_samples;
    let mut samples = Vec::with_capacity(n * d);
    for _ in 0..n {
        for j in 0..d {
            samples.push(stats.means[j] + stats.stds[j] * rng.normal());
        }
    }
    let samples = Matrix::new(n, d, samples);
    let mut standardized = Matrix::zeros(n, d);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut dist2 = 0.0;
        for j in 0..d {
            let s = stats.scale(j);
            let v = samples.get(i, j);
            standardized.set(i, j, (v - stats.means[j]) / s);
            let diff = (v - x[j]) / s;
            dist2 += diff * diff;
        }
        weights.push((-dist2 / (width * width)).exp());
    }
    let total: f64 = weights.iter().sum();
    if !(total > KERNEL_FLOOR) || !total.is_finite() {
        return Err(Error::DegenerateKernel);
    }
    let targets = predict(&samples)?;
    if targets.len() != n {
        return Err(Error::LengthMismatch(targets.len(), n));
    }
    Ok(LimeDesign {
        samples,
        standardized,
        targets,
        weights,
        kernel_width: width,
    })
}

/// Weighted ridge regression with an unpenalised intercept. Returns
/// `(intercept, coefficients)`.
pub fn weighted_ridge(x: &Matrix, t: &[f64], w: &[f64], penalty: f64) -> Result<(f64, Vec<f64>)> {
    let (n, d) = (x.rows(), x.cols());
    if t.len() != n || w.len() != n {
        return Err(Error::LengthMismatch(n, t.len().min(w.len())));
    }
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return Err(Error::DegenerateKernel);
    }
    let mut xm = vec![0.0; d];
    let mut tm = 0.0;
    for i in 0..n {
        for j in 0..d {
            xm[j] += w[i] * x.get(i, j);
        }
        tm += w[i] * t[i];
    }
    xm.iter_mut().for_each(|v| *v /= sw);
    tm /= sw;

    // Normal equations on weighted-centred data.
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d];
    let mut xc = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            xc[j] = x.get(i, j) - xm[j];
        }
        let tc = t[i] - tm;
        for j in 0..d {
            let wx = w[i] * xc[j];
            b[j] += wx * tc;
            for k in j..d {
                a[j * d + k] += wx * xc[k];
            }
        }
    }
    for j in 0..d {
        a[j * d + j] += penalty;
        for k in 0..j {
            a[j * d + k] = a[k * d + j];
        }
    }
    let coef = solve(a, b, d)?;
    let intercept = tm - coef.iter().zip(&xm).map(|(c, m)| c * m).sum::<f64>();
    Ok((intercept, coef))
}

/// Gaussian elimination with partial pivoting on a dense `d × d` system.
fn solve(mut a: Vec<f64>, mut b: Vec<f64>, d: usize) -> Result<Vec<f64>> {
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&p, &q| a[p * d + col].abs().total_cmp(&a[q * d + col].abs()))
            .unwrap();
        if a[pivot * d + col].abs() < 1e-300 {
            return Err(Error::DomainError("singular ridge system".into()));
        }
        if pivot != col {
            for k in 0..d {
                a.swap(pivot * d + k, col * d + k);
            }
            b.swap(pivot, col);
        }
        for r in col + 1..d {
            let f = a[r * d + col] / a[col * d + col];
            if f != 0.0 {
                for k in col..d {
                    a[r * d + k] -= f * a[col * d + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; d];
    for r in (0..d).rev() {
        let s: f64 = (r + 1..d).map(|k| a[r * d + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * d + r];
    }
    Ok(x)
}

fn weighted_r2(x: &Matrix, t: &[f64], w: &[f64], intercept: f64, coef: &[f64]) -> Option<f64> {
    if t.iter().all(|&v| v == t[0]) {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let tm = t.iter().zip(w).map(|(t, w)| t * w).sum::<f64>() / sw;
    let mut ss_tot = 0.0;
    let mut ss_res = 0.0;
    for (i, row) in x.iter_rows().enumerate() {
        let fit = intercept + row.iter().zip(coef).map(|(a, b)| a * b).sum::<f64>();
        ss_res += w[i] * (t[i] - fit).powi(2);
        ss_tot += w[i] * (t[i] - tm).powi(2);
    }
    if !(ss_tot > 0.0) {
        return None;
    }
    Some((1.0 - ss_res / ss_tot).clamp(0.0, 1.0))
}

fn bin_for(v: f64, mean: f64, std: f64) -> (Option<f64>, Option<f64>) {
    let cuts = [
        mean - NORMAL_QUARTILE * std,
        mean,
        mean + NORMAL_QUARTILE * std,
    ];
    match cuts.iter().position(|&c| v <= c) {
        Some(0) => (None, Some(cuts[0])),
        Some(i) => (Some(cuts[i - 1]), Some(cuts[i])),
        None => (Some(cuts[2]), None),
    }
}

fn condition_text(name: &str, lower: Option<f64>, upper: Option<f64>) -> String {
    match (lower, upper) {
        (None, Some(u)) => format!("{name} <= {u:.4}"),
        (Some(l), Some(u)) => format!("{l:.4} < {name} <= {u:.4}"),
        (Some(l), None) => format!("{name} > {l:.4}"),
        (None, None) => name.to_string(),
    }
}

/// Explains the model's class-1 probability around `x`.
pub fn lime_explain<F>(
    predict: F,
    x: &[f64],
    instance: usize,
    names: &[String],
    stats: &TrainStats,
    params: &LimeParams,
    rng: &mut Rng,
) -> Result<LimeExplanation>
where
    F: Fn(&Matrix) -> Result<Vec<f64>>,
{
    if names.len() != x.len() {
        return Err(Error::LengthMismatch(names.len(), x.len()));
    }
    let p = predict(&Matrix::new(1, x.len(), x.to_vec()))?[0];
    let design = lime_design(&predict, x, stats, params, rng)?;
    let (intercept, coef) = weighted_ridge(&design.standardized, &design.targets, &design.weights, params.ridge)?;
    let fidelity = weighted_r2(&design.standardized, &design.targets, &design.weights, intercept, &coef);
    let features = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (lower, upper) = bin_for(x[j], stats.means[j], stats.stds[j]);
            LimeFeature {
                name: name.clone(),
                weight: coef[j],
                lower,
                upper,
                condition: condition_text(name, lower, upper),
            }
        })
        .collect();
    Ok(LimeExplanation {
        instance,
        predicted_class: u8::from(p >= 0.5),
        predicted_proba: p,
        intercept,
        kernel_width: design.kernel_width,
        n_samples: params.n_samples,
        fidelity,
        features,
    })
}
