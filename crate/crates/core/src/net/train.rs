use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamParams, AdamState};
use super::mlp::Mlp;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamParams::default();
        TrainConfig {
            epochs: 90,
            batch_size: 64,
            learning_rate: adam.learning_rate,
            seed: 0,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamParams {
        AdamParams {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean training loss per epoch, accumulated over that epoch's batches
    /// before each update.
    pub epoch_losses: Vec<f64>,
}

impl TrainHistory {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_losses.last().copied()
    }
}

/// Mini-batch Adam on mean binary cross-entropy. The sample order is
/// reshuffled every epoch from a generator seeded with `cfg.seed`.
pub fn train(model: &mut Mlp, x: &Matrix, y: &[u8], cfg: &TrainConfig) -> Result<TrainHistory> {
    cfg.validate()?;
    if x.rows() == 0 {
        return Err(Error::Config("cannot train on an empty dataset".into()));
    }
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "targets",
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::for_model(model, cfg.adam());
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut history = TrainHistory::default();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grads) = model.backward_rows(x, y, batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    learning_rate: cfg.learning_rate,
                });
            }
            total += loss * batch.len() as f64;
            adam.step_model(model, &grads);
        }
        let mean = total / x.rows() as f64;
        if !mean.is_finite() || !model.is_finite() {
            return Err(Error::Diverged {
                epoch,
                learning_rate: cfg.learning_rate,
            });
        }
        log::debug!("epoch {epoch}: loss {mean:.6}");
        history.epoch_losses.push(mean);
    }
    Ok(history)
}

/// First epoch (1-based) whose loss is within 10% of the overall drop from
/// the final loss. Reported only; nothing asserts on it.
pub fn epochs_to_converge(losses: &[f64]) -> Option<usize> {
    let first = *losses.first()?;
    let last = *losses.last()?;
    let band = 0.1 * (first - last).max(0.0);
    losses.iter().position(|&l| l <= last + band).map(|i| i + 1)
}
