use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

use super::{AdamConfig, AdamState, FeatureMap, Gradients, Network, Scalar, DEFAULT_BATCH};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<S> {
    pub input: FeatureMap<S>,
    pub label: FeatureMap<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamConfig,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub shuffle_seed: u64,
    /// Hard cap on optimizer steps across all epochs.
    pub max_steps: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: DEFAULT_BATCH,
            epochs: 50,
            adam: AdamConfig::default(),
            patience: 10,
            shuffle_seed: 0,
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub epoch: usize,
    pub batch: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossHistory {
    pub initial_val_loss: f64,
    pub batches: Vec<BatchRecord>,
    pub epochs: Vec<EpochRecord>,
}

impl LossHistory {
    /// `kind,epoch,batch,loss`; one `train` row per batch and one `val` row
    /// per epoch (epochs are 1-based).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,epoch,batch,loss\n");
        for e in &self.epochs {
            for b in self.batches.iter().filter(|b| b.epoch == e.epoch) {
                out.push_str(&format!("train,{},{},{:e}\n", b.epoch, b.batch, b.loss));
            }
            out.push_str(&format!("val,{},,{:e}\n", e.epoch, e.val_loss));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<S> {
    /// Parameters with the lowest validation loss seen (possibly the initial ones).
    pub network: Network<S>,
    pub history: LossHistory,
    /// 0 when no epoch improved on the initial network.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub steps: usize,
    pub stopped_early: bool,
}

/// Mean of `½‖Ŷ - Y‖²` over `samples` (the batch MSE loss with `M = |samples|`).
pub fn dataset_loss<S: Scalar>(net: &Network<S>, samples: &[Sample<S>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("loss over an empty sample set"));
    }
    let losses = samples
        .par_iter()
        .map(|s| Ok(net.forward(&s.input)?.half_sq_distance(&s.label)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / samples.len() as f64)
}

/// Loss and summed gradient of one mini-batch. Per-sample work may run in
/// parallel; the reduction is always in sample order.
fn batch_gradient<S: Scalar>(net: &Network<S>, batch: &[&Sample<S>]) -> Result<(f64, Gradients<S>)> {
    let scale = S::from_f64(1.0 / batch.len() as f64);
    let per_sample = batch
        .par_iter()
        .map(|s| {
            let trace = net.forward_trace(&s.input)?;
            let loss = trace.output().half_sq_distance(&s.label);
            Ok((loss, net.backward(&trace, &s.label, scale)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Gradients::zeros_like(net);
    let mut loss = 0.0;
    for (l, g) in &per_sample {
        loss += l;
        total.add_assign(g);
    }
    Ok((loss / batch.len() as f64, total))
}

/// Mini-batch Adam training with best-validation checkpointing and early
/// stopping. `on_epoch` is called after every epoch.
pub fn train<S: Scalar>(
    mut net: Network<S>,
    train_set: &[Sample<S>],
    val_set: &[Sample<S>],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome<S>> {
    if train_set.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if val_set.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    if config.batch_size == 0 || config.epochs == 0 {
        return Err(Error::InvalidArgument("batch size and epochs must be positive".into()));
    }

    let mut adam = AdamState::new(&net, config.adam);
    let initial_val_loss = dataset_loss(&net, val_set)?;
    let mut history = LossHistory {
        initial_val_loss,
        ..Default::default()
    };
    let mut best = net.clone();
    let mut best_val = initial_val_loss;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut steps = 0;
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    'epochs: for epoch in 1..=config.epochs {
        order.sort_unstable();
        order.shuffle(&mut seed::rng(seed::derive(config.shuffle_seed, &[epoch as u64])));
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for (bi, chunk) in order.chunks(config.batch_size).enumerate() {
            if config.max_steps.is_some_and(|cap| steps >= cap) {
                break;
            }
            let batch: Vec<&Sample<S>> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (loss, grads) = batch_gradient(&net, &batch)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: bi });
            }
            adam.step(&mut net, &grads);
            steps += 1;
            epoch_loss += loss;
            batches += 1;
            history.batches.push(BatchRecord {
                epoch,
                batch: bi,
                loss,
            });
        }
        if batches == 0 {
            break;
        }
        let val_loss = dataset_loss(&net, val_set)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: batches });
        }
        let record = EpochRecord {
            epoch,
            train_loss: epoch_loss / batches as f64,
            val_loss,
        };
        history.epochs.push(record);
        on_epoch(&record);

        if val_loss < best_val {
            best_val = val_loss;
            best = net.clone();
            best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                stopped_early = true;
                break 'epochs;
            }
        }
    }

    Ok(TrainOutcome {
        network: best,
        history,
        best_epoch,
        best_val_loss: best_val,
        steps,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_samples(n: usize, seed_base: u64) -> Vec<Sample<f32>> {
        (0..n)
            .map(|i| {
                let mut rng = seed::rng(seed_base + i as u64);
                let input: Vec<f32> = (0..64).map(|_| rand::Rng::random_range(&mut rng, 0.0..1.0)).collect();
                // Target: a thresholded copy of the input, something a tiny net can fit.
                let label: Vec<f32> = input.iter().map(|&v| if v > 0.5 { v } else { 0.0 }).collect();
                Sample {
                    input: FeatureMap::from_vec(1, 8, 8, input).unwrap(),
                    label: FeatureMap::from_vec(1, 8, 8, label).unwrap(),
                }
            })
            .collect()
    }

    fn config() -> TrainConfig {
        TrainConfig {
            batch_size: 3,
            epochs: 6,
            patience: 3,
            shuffle_seed: 4,
            ..Default::default()
        }
    }

    #[test]
    fn empty_sets_are_rejected() {
        let net = Network::<f32>::init(2, 2, 3, 0).unwrap();
        let s = toy_samples(2, 0);
        assert!(train(net.clone(), &[], &s, &config(), |_| {}).is_err());
        assert!(train(net, &s, &[], &config(), |_| {}).is_err());
    }

    #[test]
    fn deterministic_history_and_best_checkpoint() {
        let train_set = toy_samples(10, 100);
        let val_set = toy_samples(4, 200);
        let run = || {
            let net = Network::<f32>::init(3, 4, 3, 1).unwrap();
            train(net, &train_set, &val_set, &config(), |_| {}).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.history, b.history);
        assert_eq!(a.network, b.network);
        // 10 samples / batch 3 → 4 batches per epoch, last one partial.
        assert_eq!(a.history.batches.iter().filter(|r| r.epoch == 1).count(), 4);
        assert!(a.best_val_loss <= a.history.initial_val_loss);
        let recomputed = dataset_loss(&a.network, &val_set).unwrap();
        assert!((recomputed - a.best_val_loss).abs() < 1e-9);
        let rows = a.history.to_csv().lines().count() - 1;
        assert_eq!(rows, a.history.batches.len() + a.history.epochs.len());
    }

    #[test]
    fn blow_up_is_reported() {
        let net = Network::<f32>::init(3, 4, 3, 1).unwrap();
        let cfg = TrainConfig {
            adam: AdamConfig {
                lr: 1e30,
                ..Default::default()
            },
            ..config()
        };
        let err = train(net, &toy_samples(6, 0), &toy_samples(2, 50), &cfg, |_| {}).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { .. }), "{err}");
    }

    #[test]
    fn max_steps_caps_updates() {
        let net = Network::<f32>::init(2, 2, 3, 1).unwrap();
        let cfg = TrainConfig {
            max_steps: Some(5),
            epochs: 10,
            patience: 100,
            ..config()
        };
        let out = train(net, &toy_samples(9, 0), &toy_samples(2, 50), &cfg, |_| {}).unwrap();
        assert_eq!(out.steps, 5);
    }
}
