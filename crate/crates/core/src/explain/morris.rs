//! Morris elementary-effects screening on a p-level grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::Matrix;
use crate::numerics::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MorrisParams {
    pub trajectories: usize,
    pub levels: usize,
    pub bootstrap: usize,
}

impl Default for MorrisParams {
    fn default() -> Self {
        Self {
            trajectories: 20,
            levels: 4,
            bootstrap: 1000,
        }
    }
}

impl MorrisParams {
    /// Grid step in unit space, p / (2(p − 1)).
    pub fn delta(&self) -> f64 {
        self.levels as f64 / (2.0 * (self.levels as f64 - 1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// d + 1 points in the model's input space.
    pub points: Vec<Vec<f64>>,
    /// Feature moved at each step.
    pub order: Vec<usize>,
    /// Model output at each point.
    pub outputs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorrisFeature {
    pub name: String,
    pub mu: f64,
    pub mu_star: f64,
    /// Sample standard deviation of the effects.
    pub sigma: f64,
    /// 95% bootstrap half-width for μ*.
    pub mu_star_conf: f64,
    pub effects: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorrisResult {
    pub trajectories: usize,
    pub levels: usize,
    pub delta: f64,
    pub bounds: Vec<(f64, f64)>,
    pub features: Vec<MorrisFeature>,
    pub paths: Vec<Trajectory>,
}

/// Unit-space level index grid point to model input space.
fn to_input(level: usize, levels: usize, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * (level as f64 / (levels - 1) as f64)
}

pub fn morris_ee<F>(
    f: F,
    bounds: &[(f64, f64)],
    names: &[String],
    params: &MorrisParams,
    rng: &mut Rng,
) -> Result<MorrisResult>
where
    F: Fn(&Matrix) -> Result<Vec<f64>>,
{
    let d = bounds.len();
    if names.len() != d {
        return Err(Error::LengthMismatch(names.len(), d));
    }
    if d == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(j) = bounds
        .iter()
        .position(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(Error::UnboundedFeature(j));
    }
    let p = params.levels;
    if p < 2 || p % 2 != 0 {
        return Err(Error::InvalidParameter("levels must be an even number >= 2".into()));
    }
    let r = params.trajectories;
    if r < 2 {
        return Err(Error::InvalidParameter("need at least 2 trajectories".into()));
    }
    // Δ expressed in grid steps: p/(2(p−1)) · (p−1) = p/2.
    let jump = p / 2;

    let mut levels = Vec::with_capacity(r);
    let mut orders = Vec::with_capacity(r);
    let mut all_points = Vec::with_capacity(r * (d + 1) * d);
    for _ in 0..r {
        let up: Vec<bool> = (0..d).map(|_| rng.below(2) == 1).collect();
        // Start levels that leave room for the jump in the chosen direction.
        let mut current: Vec<usize> = up
            .iter()
            .map(|&u| {
                let base = rng.below(p - jump);
                if u {
                    base
                } else {
                    base + jump
                }
            })
            .collect();
        let mut order: Vec<usize> = (0..d).collect();
        rng.shuffle(&mut order);
        let mut path = vec![current.clone()];
        for &j in &order {
            current[j] = if up[j] { current[j] + jump } else { current[j] - jump };
            path.push(current.clone());
        }
        for point in &path {
            all_points.extend(point.iter().enumerate().map(|(j, &l)| to_input(l, p, bounds[j])));
        }
        levels.push(path);
        orders.push(order);
    }
    let outputs = f(&Matrix::new(r * (d + 1), d, all_points.clone()))?;
    if outputs.len() != r * (d + 1) {
        return Err(Error::LengthMismatch(outputs.len(), r * (d + 1)));
    }

    let delta = params.delta();
    let mut effects = vec![Vec::with_capacity(r); d];
    let mut paths = Vec::with_capacity(r);
    for t in 0..r {
        let base = t * (d + 1);
        let point = |s: usize| &all_points[(base + s) * d..(base + s + 1) * d];
        for (step, &j) in orders[t].iter().enumerate() {
            let (before, after) = (point(step)[j], point(step + 1)[j]);
            let range = bounds[j].1 - bounds[j].0;
            // Realised unit-space step; equals ±Δ up to rounding.
            let step_unit = if range > 0.0 {
                (after - before) / range
            } else if levels[t][step + 1][j] > levels[t][step][j] {
                delta
            } else {
                -delta
            };
            effects[j].push((outputs[base + step + 1] - outputs[base + step]) / step_unit);
        }
        paths.push(Trajectory {
            points: (0..=d).map(|s| point(s).to_vec()).collect(),
            order: orders[t].clone(),
            outputs: outputs[base..base + d + 1].to_vec(),
        });
    }

    let features = effects
        .into_iter()
        .zip(names)
        .map(|(e, name)| {
            let n = e.len() as f64;
            let mu = e.iter().sum::<f64>() / n;
            let mu_star = e.iter().map(|v| v.abs()).sum::<f64>() / n;
            let sigma = (e.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let mu_star_conf = bootstrap_conf(&e, params.bootstrap, rng);
            MorrisFeature {
                name: name.clone(),
                mu,
                mu_star,
                sigma,
                mu_star_conf,
                effects: e,
            }
        })
        .collect();
    Ok(MorrisResult {
        trajectories: r,
        levels: p,
        delta,
        bounds: bounds.to_vec(),
        features,
        paths,
    })
}

/// 1.96 × the standard deviation of bootstrap μ* values.
fn bootstrap_conf(effects: &[f64], resamples: usize, rng: &mut Rng) -> f64 {
    if resamples == 0 {
        return 0.0;
    }
    let n = effects.len();
    let stats: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| effects[rng.below(n)].abs()).sum::<f64>() / n as f64)
        .collect();
    let m = stats.iter().sum::<f64>() / resamples as f64;
    let var = stats.iter().map(|s| (s - m).powi(2)).sum::<f64>() / resamples as f64;
    1.96 * var.sqrt()
}
