//! Numerical kernels: quantiles, the seeded generator, special functions and
//! the one-way ANOVA screen.

mod anova;
mod rng;
mod special;

pub use anova::{one_way_anova, significance_filter, AnovaResult};
pub use rng::{Rng, SplitMix64};
pub use special::{f_sf, ln_beta, ln_gamma, reg_inc_beta};

use crate::error::{Error, Result};

/// Linear-interpolation quantile of an ascending array, using fractional
/// index h = q·(n − 1).
pub fn quantile(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Empty);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::QOutOfRange(q));
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return Ok(sorted[sorted.len() - 1]);
    }
    let frac = h - lo as f64;
    Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

/// Mean and population standard deviation (divisor N), two-pass.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Log-odds of a probability clamped into [1e-12, 1 − 1e-12].
pub fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}
