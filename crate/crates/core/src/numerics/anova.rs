//! One-way ANOVA of a feature against the binary class label.

use serde::{Deserialize, Serialize};

use super::special::f_sf;
use crate::error::{Error, Result};
use crate::tabular::Frame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub feature: String,
    /// `+inf` when the within-group sum of squares vanishes.
    pub f_stat: f64,
    pub p_value: f64,
    pub df_between: u64,
    pub df_within: u64,
    /// Set when SSW = 0 (the F statistic is reported as +inf, p as 0).
    pub degenerate: bool,
}

/// F-test of `values` grouped by `labels` (k = 2 groups).
pub fn one_way_anova(feature: &str, values: &[f64], labels: &[u8]) -> Result<AnovaResult> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch(values.len(), labels.len()));
    }
    let n = values.len();
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for (&v, &y) in values.iter().zip(labels) {
        if y > 1 {
            return Err(Error::NonBinary(y as i64));
        }
        sums[y as usize] += v;
        counts[y as usize] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::SingleClass);
    }
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, found: n });
    }
    let group_means = [sums[0] / counts[0] as f64, sums[1] / counts[1] as f64];
    let grand = (sums[0] + sums[1]) / n as f64;
    let ssb: f64 = (0..2)
        .map(|g| counts[g] as f64 * (group_means[g] - grand).powi(2))
        .sum();
    let ssw: f64 = values
        .iter()
        .zip(labels)
        .map(|(&v, &y)| (v - group_means[y as usize]).powi(2))
        .sum();

    let df_between = 1u64;
    let df_within = (n - 2) as u64;
    if ssw == 0.0 {
        return Ok(AnovaResult {
            feature: feature.to_string(),
            f_stat: f64::INFINITY,
            p_value: 0.0,
            df_between,
            df_within,
            degenerate: true,
        });
    }
    let f_stat = (ssb / df_between as f64) / (ssw / df_within as f64);
    let p_value = f_sf(f_stat, df_between, df_within)?;
    Ok(AnovaResult {
        feature: feature.to_string(),
        f_stat,
        p_value,
        df_between,
        df_within,
        degenerate: false,
    })
}

/// Runs the ANOVA on every named numeric column (over its non-missing rows)
/// and keeps the features with p < `alpha`. Returns the kept names in input
/// order plus the full result table.
pub fn significance_filter(
    frame: &Frame,
    features: &[String],
    alpha: f64,
) -> Result<(Vec<String>, Vec<AnovaResult>)> {
    let labels = frame.binary_labels()?;
    let mut kept = Vec::new();
    let mut results = Vec::with_capacity(features.len());
    for name in features {
        let (values, missing) = frame.numeric(name)?;
        let (v, y): (Vec<f64>, Vec<u8>) = values
            .iter()
            .zip(&labels)
            .zip(missing)
            .filter(|(_, &m)| !m)
            .map(|((&v, &y), _)| (v, y))
            .unzip();
        let res = one_way_anova(name, &v, &y)?;
        if res.p_value < alpha {
            kept.push(name.clone());
        }
        results.push(res);
    }
    Ok((kept, results))
}
