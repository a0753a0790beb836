//! Fully connected ReLU network with a two-way softmax head, trained by
//! minibatch Adam on L2-penalised cross-entropy.

use serde::{Deserialize, Serialize};

use super::{check_dims, check_training_input, require_both_classes, Classifier, Matrix};
use crate::error::{Error, Result};
use crate::numerics::{logistic, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    /// L2 penalty on weights (biases are not penalised).
    pub alpha: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub tol: f64,
    pub n_iter_no_change: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: vec![100, 50],
            alpha: 1e-4,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 200,
            max_epochs: 300,
            tol: 1e-4,
            n_iter_no_change: 10,
        }
    }
}

/// Dense layer; `weights` is `n_out × n_in`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            bias: vec![0.0; n_out],
        }
    }

    /// He-uniform weights, zero bias.
    fn he_uniform(n_in: usize, n_out: usize, rng: &mut Rng) -> Self {
        let limit = (6.0 / n_in as f64).sqrt();
        let mut l = Self::zeros(n_in, n_out);
        l.weights.iter_mut().for_each(|w| *w = rng.uniform(-limit, limit));
        l
    }

    fn forward(&self, input: &[f64], batch: usize, relu: bool) -> Vec<f64> {
        // Transposed copy so the inner loop is a contiguous axpy.
        let mut wt = vec![0.0; self.n_in * self.n_out];
        for o in 0..self.n_out {
            for i in 0..self.n_in {
                wt[i * self.n_out + o] = self.weights[o * self.n_in + i];
            }
        }
        let mut out = vec![0.0; batch * self.n_out];
        for b in 0..batch {
            let x = &input[b * self.n_in..(b + 1) * self.n_in];
            let o_row = &mut out[b * self.n_out..(b + 1) * self.n_out];
            o_row.copy_from_slice(&self.bias);
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let w = &wt[i * self.n_out..(i + 1) * self.n_out];
                for (slot, &wv) in o_row.iter_mut().zip(w) {
                    *slot += xi * wv;
                }
            }
            if relu {
                o_row.iter_mut().for_each(|z| *z = z.max(0.0));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub n_features: usize,
    pub layers: Vec<Layer>,
    /// Mean training loss per completed epoch.
    pub loss_curve: Vec<f64>,
}

impl MlpParams {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.hidden.contains(&0) {
            return Err(Error::InvalidParameter(
                "batch size and layer widths must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(
                "learning rate must be positive, alpha non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Randomly initialised, untrained network.
    pub fn init(&self, n_features: usize, rng: &mut Rng) -> Result<MlpModel> {
        self.validate()?;
        if n_features == 0 {
            return Err(Error::EmptyInput);
        }
        let mut sizes = vec![n_features];
        sizes.extend(&self.hidden);
        sizes.push(2);
        let layers = sizes
            .windows(2)
            .map(|w| Layer::he_uniform(w[0], w[1], rng))
            .collect();
        Ok(MlpModel {
            n_features,
            layers,
            loss_curve: Vec::new(),
        })
    }

    pub fn fit(&self, x: &Matrix, y: &[u8], rng: &mut Rng) -> Result<MlpModel> {
        check_training_input(x, y)?;
        require_both_classes(y)?;
        let mut model = self.init(x.cols(), rng)?;
        let n = x.rows();
        let d = x.cols();
        let batch = self.batch_size.min(n);
        let mut m: Vec<Layer> = model.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect();
        let mut v = m.clone();
        let mut step = 0i32;
        let mut order: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        let mut stale = 0;
        let mut xb = Vec::with_capacity(batch * d);
        let mut yb = Vec::with_capacity(batch);

        for _ in 0..self.max_epochs {
            rng.shuffle(&mut order);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(batch) {
                xb.clear();
                yb.clear();
                for &r in chunk {
                    xb.extend_from_slice(x.row(r));
                    yb.push(y[r]);
                }
                let (loss, grads) = model.batch_loss_and_grad(&xb, &yb, self.alpha);
                epoch_loss += loss * chunk.len() as f64;
                step += 1;
                let lr = self.learning_rate * (1.0 - self.beta2.powi(step)).sqrt()
                    / (1.0 - self.beta1.powi(step));
                for (((layer, g), m), v) in model.layers.iter_mut().zip(&grads).zip(&mut m).zip(&mut v) {
                    adam(&mut layer.weights, &g.weights, &mut m.weights, &mut v.weights, lr, self);
                    adam(&mut layer.bias, &g.bias, &mut m.bias, &mut v.bias, lr, self);
                }
            }
            let epoch_loss = epoch_loss / n as f64;
            model.loss_curve.push(epoch_loss);
            if epoch_loss > best - self.tol {
                stale += 1;
            } else {
                stale = 0;
            }
            best = best.min(epoch_loss);
            if stale >= self.n_iter_no_change {
                break;
            }
        }
        Ok(model)
    }
}

fn adam(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], lr: f64, c: &MlpParams) {
    for i in 0..p.len() {
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
        p[i] -= lr * m[i] / (v[i].sqrt() + c.epsilon);
    }
}

impl MlpModel {
    /// Mean cross-entropy plus `(α/2)‖W‖²`, and its gradient per layer.
    pub fn loss_and_grad(&self, x: &Matrix, y: &[u8], alpha: f64) -> Result<(f64, Vec<Layer>)> {
        check_training_input(x, y)?;
        check_dims(self.n_features, x)?;
        Ok(self.batch_loss_and_grad(x.data(), y, alpha))
    }

    fn batch_loss_and_grad(&self, xb: &[f64], yb: &[u8], alpha: f64) -> (f64, Vec<Layer>) {
        let batch = yb.len();
        let last = self.layers.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        acts.push(xb.to_vec());
        for (i, l) in self.layers.iter().enumerate() {
            let a = l.forward(acts.last().unwrap(), batch, i != last);
            acts.push(a);
        }

        let logits = &acts[last + 1];
        let mut ce = 0.0;
        let mut delta = vec![0.0; batch * 2];
        for b in 0..batch {
            let margin = logits[2 * b + 1] - logits[2 * b];
            let p1 = logistic(margin);
            // −log softmax of the true class, computed from the margin.
            let z = if yb[b] == 1 { margin } else { -margin };
            ce += if z > 0.0 {
                (-z).exp().ln_1p()
            } else {
                -z + z.exp().ln_1p()
            };
            let t = f64::from(yb[b]);
            delta[2 * b] = ((1.0 - p1) - (1.0 - t)) / batch as f64;
            delta[2 * b + 1] = (p1 - t) / batch as f64;
        }
        let sq: f64 = self
            .layers
            .iter()
            .flat_map(|l| &l.weights)
            .map(|w| w * w)
            .sum();
        let loss = ce / batch as f64 + 0.5 * alpha * sq;

        let mut grads: Vec<Layer> = self.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect();
        for li in (0..self.layers.len()).rev() {
            let l = &self.layers[li];
            let input = &acts[li];
            let g = &mut grads[li];
            let mut d_in = vec![0.0; batch * l.n_in];
            for b in 0..batch {
                let x = &input[b * l.n_in..(b + 1) * l.n_in];
                let dx = &mut d_in[b * l.n_in..(b + 1) * l.n_in];
                for o in 0..l.n_out {
                    let dv = delta[b * l.n_out + o];
                    if dv == 0.0 {
                        continue;
                    }
                    g.bias[o] += dv;
                    let gw = &mut g.weights[o * l.n_in..(o + 1) * l.n_in];
                    let w = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                    for (g, &xi) in gw.iter_mut().zip(x) {
                        *g += dv * xi;
                    }
                    if li > 0 {
                        for (d, &wi) in dx.iter_mut().zip(w) {
                            *d += dv * wi;
                        }
                    }
                }
            }
            for (gw, w) in g.weights.iter_mut().zip(&l.weights) {
                *gw += alpha * w;
            }
            if li > 0 {
                // ReLU derivative, read off the stored post-activation.
                for (dx, &a) in d_in.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *dx = 0.0;
                    }
                }
            }
            delta = d_in;
        }
        (loss, grads)
    }
}

impl Classifier for MlpModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_positive(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_dims(self.n_features, x)?;
        let last = self.layers.len() - 1;
        let mut out = Vec::with_capacity(x.rows());
        for start in (0..x.rows()).step_by(512) {
            let end = (start + 512).min(x.rows());
            let batch = end - start;
            let mut a = x.data()[start * x.cols()..end * x.cols()].to_vec();
            for (i, l) in self.layers.iter().enumerate() {
                a = l.forward(&a, batch, i != last);
            }
            out.extend((0..batch).map(|b| logistic(a[2 * b + 1] - a[2 * b])));
        }
        Ok(out)
    }
}
