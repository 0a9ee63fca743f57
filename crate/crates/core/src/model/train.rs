use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cnn::{loss, CnnModel, CnnParams};
use super::optim::{rmsprop_step, RmsPropConfig};
use crate::eval::c_statistic;
use crate::preprocess::TokenSequence;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub rmsprop_decay: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    /// L2 penalty on filters and dense weights; embeddings and biases are not penalised.
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            rmsprop_decay: 0.9,
            epsilon: 1e-8,
            batch_size: 32,
            max_epochs: 10,
            patience: 2,
            seed: 0,
            l2: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !(self.rmsprop_decay > 0.0 && self.rmsprop_decay < 1.0) || !(self.epsilon > 0.0) {
            return Err(Error::invalid("need lr > 0, 0 < rmsprop_decay < 1, epsilon > 0"));
        }
        if self.batch_size < 1 || self.max_epochs < 1 {
            return Err(Error::invalid("batch_size and max_epochs must be at least 1"));
        }
        if !(self.l2 >= 0.0) {
            return Err(Error::invalid("l2 must be non-negative"));
        }
        Ok(())
    }

    pub fn rmsprop(&self) -> RmsPropConfig {
        RmsPropConfig { lr: self.lr, decay: self.rmsprop_decay, epsilon: self.epsilon }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean mini-batch loss over the epoch.
    pub train_loss: f64,
    pub valid_c_statistic: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation c-statistic.
    pub model: CnnModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

/// Mini-batch RMSprop on the mean cross-entropy with early stopping on the
/// validation c-statistic. Shuffling is seeded; runs are reproducible.
pub fn train(
    mut model: CnnModel,
    train_set: &[(TokenSequence, bool)],
    valid_set: &[(TokenSequence, bool)],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() || valid_set.is_empty() {
        return Err(Error::Empty("training and validation sets must be nonempty"));
    }
    let valid_labels: Vec<bool> = valid_set.iter().map(|(_, y)| *y).collect();
    if valid_labels.iter().all(|&y| y) || valid_labels.iter().all(|&y| !y) {
        return Err(Error::SingleClass("validation set"));
    }
    let valid_x: Vec<TokenSequence> = valid_set.iter().map(|(x, _)| x.clone()).collect();

    let rms = config.rmsprop();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut grads = CnnParams::zeros_like(&model.params);
    let mut state = CnnParams::zeros_like(&model.params);
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, CnnModel)> = None;
    let mut stale = 0;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.fill_zero();
            let scale = 1.0 / batch.len() as f64;
            let windows: usize =
                batch.iter().map(|&i| train_set[i].0.original_length.min(model.hyper.positions())).sum();
            let table = model.table_pays_off(windows).then(|| model.token_responses());
            for &i in batch {
                let (x, y) = &train_set[i];
                let cache = model.forward_with(x, table.as_ref())?;
                loss_sum += loss(cache.probability, *y);
                model.accumulate_gradients(&cache, *y, scale, &mut grads);
            }
            if config.l2 > 0.0 {
                for (g, p) in grads.filters.iter_mut().zip(&model.params.filters) {
                    *g += config.l2 * p;
                }
                for (g, p) in grads.dense_weights.iter_mut().zip(&model.params.dense_weights) {
                    *g += config.l2 * p;
                }
            }
            for ((p, g), s) in model.params.groups_mut().into_iter().zip(grads.groups()).zip(state.groups_mut()) {
                rmsprop_step(p, g, s, &rms);
            }
        }
        let train_loss = loss_sum / train_set.len() as f64;
        if !train_loss.is_finite() || !model.params.all_finite() {
            return Err(Error::NonFinite(format!("training diverged in epoch {epoch}")));
        }
        let scores = model.predict_batch(&valid_x)?;
        let c = c_statistic(&scores, &valid_labels)?;
        history.push(EpochRecord { epoch, train_loss, valid_c_statistic: c });

        if best.as_ref().is_none_or(|(b, _, _)| c > *b) {
            best = Some((c, epoch, model.clone()));
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= config.patience {
            break;
        }
    }
    let (_, best_epoch, model) = best.expect("at least one epoch ran");
    Ok(TrainOutcome { model, history, best_epoch })
}
