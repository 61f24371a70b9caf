//! Mini-batch training with weighted cross-entropy, Adam or SGD, and early
//! stopping on validation F1. Fully reproducible from the config seed:
//! shuffling, init and dropout all derive from it, and data-parallel
//! gradient chunks reduce in fixed index order.

use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassWeights, Label, SplitDataset, WindowedSample, FEATURES_PER_STEP};
use crate::error::{Error, Result};
use crate::seeding;

use super::backward::{backward, BatchItem, DropoutPlan};
use super::forward::{forward, loss, ForwardMode, Prediction};
use super::{ModelSpec, ModelWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    Sgd,
    AdaptiveMoment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Overrides the dataset's train-split class weights when set.
    pub class_weights: Option<ClassWeights>,
    /// Early stop after this many epochs without a validation F1
    /// improvement; 0 disables early stopping.
    pub early_stop_patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 64,
            learning_rate: 1e-3,
            seed: 42,
            optimizer: Optimizer::AdaptiveMoment,
            class_weights: None,
            early_stop_patience: 10,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::Model("learning rate must be finite and >= 0".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Model("batch size must be >= 1".into()));
        }
        if self.epochs < 1 {
            return Err(Error::Model("epochs must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_precision: Option<f64>,
    pub val_recall: Option<f64>,
    pub val_f1: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochStats>,
    /// Epoch whose weights were returned (best validation F1).
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainingLog {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "epoch,train_loss,val_loss,val_precision,val_recall,val_f1")?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for e in &self.epochs {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                e.epoch,
                e.train_loss,
                e.val_loss,
                fmt(e.val_precision),
                fmt(e.val_recall),
                fmt(e.val_f1)
            )?;
        }
        Ok(())
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

fn apply_update(weights: &mut ModelWeights, grads: &ModelWeights, config: &TrainConfig, adam: &mut AdamState) {
    match config.optimizer {
        Optimizer::Sgd => {
            weights.add_scaled(grads, -config.learning_rate);
        }
        Optimizer::AdaptiveMoment => {
            adam.t += 1;
            let bc1 = 1.0 - BETA1.powi(adam.t as i32);
            let bc2 = 1.0 - BETA2.powi(adam.t as i32);
            for ((w, g), (m, v)) in weights
                .param_iter_mut()
                .zip(grads.param_iter())
                .zip(adam.m.iter_mut().zip(adam.v.iter_mut()))
            {
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *w -= config.learning_rate * m_hat / (v_hat.sqrt() + EPSILON);
            }
        }
    }
}

/// Validation-set forward passes (eval mode, deterministic order).
pub fn predict_windows(weights: &ModelWeights, windows: &[WindowedSample]) -> Result<Vec<Prediction>> {
    windows
        .par_iter()
        .map(|w| forward(weights, w.window.features.as_flattened(), ForwardMode::Eval))
        .collect()
}

struct ValStats {
    loss: f64,
    precision: Option<f64>,
    recall: Option<f64>,
    f1: Option<f64>,
}

fn validation_stats(
    weights: &ModelWeights,
    windows: &[WindowedSample],
    class_weights: &ClassWeights,
) -> Result<ValStats> {
    let preds = predict_windows(weights, windows)?;
    let mut loss_sum = 0.0;
    let (mut tp, mut fp, mut fn_count) = (0u64, 0u64, 0u64);
    for (pred, w) in preds.iter().zip(windows) {
        loss_sum += loss(pred, w.label, class_weights);
        let decided = pred.decide(0.5);
        match (decided, w.label) {
            (Label::Ho, Label::Ho) => tp += 1,
            (Label::Ho, Label::NoHo) => fp += 1,
            (Label::NoHo, Label::Ho) => fn_count += 1,
            (Label::NoHo, Label::NoHo) => {}
        }
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    Ok(ValStats {
        loss: loss_sum / windows.len() as f64,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_count),
        f1: ratio(2 * tp, 2 * tp + fp + fn_count),
    })
}

/// Trains on the train split, tracking validation metrics per epoch and
/// returning the weights of the best validation-F1 epoch.
pub fn train(dataset: &SplitDataset, spec: &ModelSpec, config: &TrainConfig) -> Result<(ModelWeights, TrainingLog)> {
    spec.validate()?;
    config.validate()?;
    if dataset.train.is_empty() || dataset.validation.is_empty() {
        return Err(Error::Model("training needs non-empty train and validation splits".into()));
    }
    if spec.input_size != FEATURES_PER_STEP {
        return Err(Error::Model(format!(
            "model input size {} does not match the {FEATURES_PER_STEP}-feature windows",
            spec.input_size
        )));
    }
    let class_weights = config.class_weights.unwrap_or(dataset.class_weights);

    let mut weights = ModelWeights::init(spec, config.seed)?;
    let mut adam = AdamState { m: vec![0.0; spec.param_count()], v: vec![0.0; spec.param_count()], t: 0 };

    let mut order: Vec<usize> = (0..dataset.train.len()).collect();
    let mut log = TrainingLog { epochs: Vec::new(), best_epoch: 0, stopped_early: false };
    let mut best: Option<(f64, usize, ModelWeights)> = None;
    let mut since_best = 0usize;

    for epoch in 0..config.epochs {
        use rand::seq::SliceRandom;
        let mut shuffle_rng = seeding::rng(seeding::derive_seed(config.seed, 0x7368_7566, epoch as u64));
        order.shuffle(&mut shuffle_rng);

        let mut loss_sum = 0.0;
        for (batch_idx, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<BatchItem> = chunk
                .iter()
                .map(|&i| BatchItem {
                    features: dataset.train[i].window.features.as_flattened(),
                    label: dataset.train[i].label,
                })
                .collect();
            let dropout_seed =
                seeding::derive_seed(config.seed, 0x6472_6f70, (epoch as u64) << 32 | batch_idx as u64);
            let (grads, batch_loss) = backward(&weights, &batch, &class_weights, DropoutPlan::Seeded(dropout_seed))
                .map_err(|e| Error::Model(format!("epoch {epoch}: {e}")))?;
            if !batch_loss.is_finite() {
                return Err(Error::Model(format!("training diverged (non-finite loss) at epoch {epoch}")));
            }
            loss_sum += batch_loss * batch.len() as f64;
            apply_update(&mut weights, &grads, config, &mut adam);
        }
        let train_loss = loss_sum / dataset.train.len() as f64;
        if !train_loss.is_finite() {
            return Err(Error::Model(format!("training diverged (non-finite loss) at epoch {epoch}")));
        }

        let val = validation_stats(&weights, &dataset.validation, &class_weights)?;
        log.epochs.push(EpochStats {
            epoch,
            train_loss,
            val_loss: val.loss,
            val_precision: val.precision,
            val_recall: val.recall,
            val_f1: val.f1,
        });
        log::debug!(
            "epoch {epoch}: train_loss={train_loss:.5} val_loss={:.5} val_f1={:?}",
            val.loss,
            val.f1
        );

        let f1 = val.f1.unwrap_or(0.0);
        let improved = best.as_ref().map_or(true, |(best_f1, _, _)| f1 > *best_f1);
        if improved {
            best = Some((f1, epoch, weights.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if config.early_stop_patience > 0 && since_best >= config.early_stop_patience {
                log.stopped_early = true;
                break;
            }
        }
    }

    let (_, best_epoch, best_weights) = best.expect("at least one epoch ran");
    log.best_epoch = best_epoch;
    Ok((best_weights, log))
}
