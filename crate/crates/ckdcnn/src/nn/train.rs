//! Mini-batch training loop with per-epoch seeded shuffles and Adam updates.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgdata::LabeledSet;
use crate::nn::model::{batch_item, Model, ParamGrads};
use crate::nn::{sparse_ce_loss, AdamHyper};
use crate::seeds::derive_seed_indexed;

/// Training hyperparameters. Defaults: 20 epochs, batch 42, Adam at
/// lr=0.001 with the standard betas, seed 42.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamHyper::default();
        Self {
            epochs: 20,
            batch_size: 42,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            seed: 42,
        }
    }
}

impl TrainConfig {
    fn adam(&self) -> AdamHyper {
        AdamHyper {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// Per-epoch loss/accuracy curves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub train_loss: Vec<f32>,
    pub train_acc: Vec<f32>,
    pub val_loss: Vec<f32>,
    pub val_acc: Vec<f32>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.train_loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_loss.is_empty()
    }

    /// Appends another history (e.g. from a continued training run).
    pub fn extend(&mut self, other: &TrainHistory) {
        self.train_loss.extend_from_slice(&other.train_loss);
        self.train_acc.extend_from_slice(&other.train_acc);
        self.val_loss.extend_from_slice(&other.val_loss);
        self.val_acc.extend_from_slice(&other.val_acc);
    }

    /// CSV with columns epoch, train_loss, train_acc, val_loss, val_acc.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,train_acc,val_loss,val_acc\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i + 1,
                self.train_loss[i],
                self.train_acc[i],
                self.val_loss[i],
                self.val_acc[i]
            ));
        }
        out
    }
}

/// Mean cross-entropy loss and accuracy of a model over a labeled set.
pub fn evaluate(model: &Model, set: &LabeledSet) -> Result<(f32, f32)> {
    let probs = model.predict_proba(&set.images)?;
    let (loss, _) = sparse_ce_loss(&probs, &set.labels)?;
    let preds = probs.argmax_last_axis()?;
    let correct = preds.iter().zip(&set.labels).filter(|(p, l)| p == l).count();
    Ok((loss, correct as f32 / set.len() as f32))
}

/// Trains the model in place: per-epoch seeded shuffle, mini-batches of
/// `batch_size` (last batch may be smaller), one Adam update per batch.
/// Returns one history row per epoch; train loss/accuracy are averaged over
/// the batches as they were visited, validation is evaluated at epoch end.
pub fn fit(
    model: &mut Model,
    train: &LabeledSet,
    val: &LabeledSet,
    config: &TrainConfig,
) -> Result<TrainHistory> {
    if train.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::Config(
            "epochs and batch_size must be at least 1".into(),
        ));
    }

    let hp = config.adam();
    let n = train.len();
    let mut history = TrainHistory::default();

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed_indexed(config.seed, "epoch-shuffle", epoch as u64));
        order.shuffle(&mut rng);

        let mut loss_sum = 0f64;
        let mut correct = 0usize;
        for chunk in order.chunks(config.batch_size) {
            // Items are independent; evaluate them in parallel and reduce
            // the gradients in index order so the sum is deterministic.
            let results: Vec<(f32, usize, ParamGrads)> = chunk
                .par_iter()
                .map(|&idx| {
                    let image = batch_item(&train.images, idx);
                    let trace = model.forward_trace(&image)?;
                    let (loss, grads) = model.backward_from_trace(&trace, train.labels[idx])?;
                    let pred = trace.probs.argmax_last_axis()?[0];
                    Ok((loss, pred, grads))
                })
                .collect::<Result<_>>()?;

            let mut batch_grads = ParamGrads::zeros_like(model);
            for ((loss, pred, grads), &idx) in results.iter().zip(chunk) {
                batch_grads.add_assign(grads);
                loss_sum += *loss as f64;
                if *pred == train.labels[idx] {
                    correct += 1;
                }
            }
            batch_grads.scale(1.0 / chunk.len() as f32);
            model.apply_adam(&batch_grads, &hp)?;
        }

        let (val_loss, val_acc) = evaluate(model, val)?;
        history.train_loss.push((loss_sum / n as f64) as f32);
        history.train_acc.push(correct as f32 / n as f32);
        history.val_loss.push(val_loss);
        history.val_acc.push(val_acc);
    }

    Ok(history)
}
