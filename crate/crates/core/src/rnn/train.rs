use serde::{Deserialize, Serialize};

use super::{Genome, Network, Result, RnnError};
use crate::market_data::Series;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Gradients with a smaller norm are boosted up to this norm.
    pub clip_low: f64,
    /// Gradients with a larger norm are scaled down to this norm.
    pub clip_high: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            learning_rate: 0.001,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            clip_low: 0.05,
            clip_high: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(RnnError::Config(m.to_string()));
        if !(self.learning_rate > 0.0) {
            return err("learning_rate must be positive");
        }
        if !(self.clip_low > 0.0 && self.clip_low < self.clip_high) {
            return err("need 0 < clip_low < clip_high");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return err("Adam betas must lie in [0, 1)");
        }
        if !(self.adam_epsilon > 0.0) {
            return err("adam_epsilon must be positive");
        }
        Ok(())
    }
}

/// Rescales a gradient so its L2 norm lies in `[clip_low, clip_high]`.
///
/// Norms above `clip_high` are scaled down, nonzero norms below `clip_low`
/// are boosted; in-band and all-zero gradients are left untouched.
pub fn gradient_rescale(gradient: &mut [f64], clip_low: f64, clip_high: f64) {
    let norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    let factor = if norm > clip_high {
        clip_high / norm
    } else if norm > 0.0 && norm < clip_low {
        clip_low / norm
    } else {
        return;
    };
    for g in gradient {
        *g *= factor;
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    pub fn new(n: usize, config: &TrainConfig) -> Self {
        Self {
            lr: config.learning_rate,
            beta1: config.adam_beta1,
            beta2: config.adam_beta2,
            eps: config.adam_epsilon,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for (i, (p, &g)) in params.iter_mut().zip(grad).enumerate() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Trains every weight and cell parameter by full-sequence backpropagation
/// through time: one forward/backward pass, one gradient rescale and one Adam
/// update per epoch. Returns the trained genome and the loss measured at the
/// start of each epoch.
pub fn bptt_train(genome: &Genome, train: &Series, config: &TrainConfig) -> Result<(Genome, Vec<f64>)> {
    config.validate()?;
    let net = Network::compile(genome)?;
    if config.epochs == 0 {
        return Ok((genome.clone(), Vec::new()));
    }
    if train.len() < 2 {
        return Err(RnnError::TooShort {
            needed: 2,
            got: train.len(),
        });
    }

    let mut params = genome.parameters();
    let mut adam = Adam::new(params.len(), config);
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (loss, mut grad) = net.loss_and_gradient(&params, train)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(RnnError::NanLoss { epoch });
        }
        trace.push(loss);
        gradient_rescale(&mut grad, config.clip_low, config.clip_high);
        adam.step(&mut params, &grad);
    }

    let mut trained = genome.clone();
    trained.set_parameters(&params);
    trained.fitness = None;
    Ok((trained, trace))
}

/// Mean squared error of the genome's predictions on `split`.
pub fn evaluate(genome: &Genome, split: &Series) -> Result<f64> {
    if split.is_empty() {
        return Err(RnnError::EmptySeries);
    }
    let preds = super::forward_pass(genome, &split.inputs, split.width)?;
    let sum: f64 = preds
        .iter()
        .zip(&split.targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / split.len() as f64)
}

/// [`evaluate`] on the validation split, recording the result as fitness.
pub fn evaluate_validation(genome: &mut Genome, valid: &Series) -> Result<f64> {
    let mse = evaluate(genome, valid)?;
    genome.fitness = Some(mse);
    Ok(mse)
}
