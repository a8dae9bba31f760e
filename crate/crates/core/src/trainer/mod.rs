//! Reference classifier and training protocol: a multinomial linear model
//! on per-channel log-variance features, trained with Adam under a cosine
//! learning-rate schedule, checkpointed at the lowest epoch-mean training
//! loss, and evaluated by stratified k-fold cross-validation with vote
//! ensembling.
//!
//! The model is deliberately small: training is exactly reproducible,
//! gradient-checkable against finite differences, and fast enough that the
//! effect of an augmentation policy can be measured in seconds. Soft labels
//! from the augmentation layer flow straight into a soft-target
//! cross-entropy.
//!
//! Every source of randomness is derived from `TrainConfig::seed`: the fold
//! partition, each fold's shuffle and augmentation streams, and the stream
//! that builds mixed holdout inputs for the confidence metrics. Folds are
//! trained independently of one another, so results do not depend on fold
//! scheduling order.

mod model_io;

pub use model_io::{load_model, save_model};

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::augment::{augment_batch, AugConfig, Method};
use crate::rng::{derive_seed, seeded_rng};
use crate::signal::{Dataset, SoftLabel, Trial};
use crate::{Error, Result};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
/// Probability floor inside logs: avoids -inf while shifting any loss value
/// by far less than the tolerances used anywhere in the crate.
const PROB_FLOOR: f64 = 1e-12;
/// Variance floor for features of (near-)constant channels.
const VAR_FLOOR: f64 = 1e-12;

// Sub-stream tags so that one user-facing seed yields independent streams.
const STREAM_SHUFFLE: u64 = 1;
const STREAM_AUGMENT: u64 = 2;
const STREAM_SPLIT: u64 = 3;
const STREAM_EVAL_MIX: u64 = 4;
const STREAM_FOLD_BASE: u64 = 16;

/// Linear softmax classifier plus its optimizer and checkpoint state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    /// Current weights, `num_classes x num_features`.
    pub weights: Array2<f64>,
    /// Current bias, length `num_classes`.
    pub bias: Array1<f64>,
    adam_m_w: Array2<f64>,
    adam_v_w: Array2<f64>,
    adam_m_b: Array1<f64>,
    adam_v_b: Array1<f64>,
    /// Number of optimizer steps taken.
    pub step_count: u64,
    /// Lowest epoch-mean training loss seen so far; infinite before the
    /// first epoch completes. Never increases during training.
    pub best_loss: f64,
    best_weights: Array2<f64>,
    best_bias: Array1<f64>,
    /// Mean training loss of every completed epoch, in order.
    pub epoch_losses: Vec<f64>,
}

impl ModelState {
    /// Zero-initialized model. The training objective is convex, so zero
    /// init keeps runs deterministic without a weight-seeding step.
    pub fn new(num_classes: u32, num_features: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "a classifier needs at least 2 classes, got {num_classes}"
            )));
        }
        if num_features == 0 {
            return Err(Error::InvalidArgument(
                "a classifier needs at least 1 feature".into(),
            ));
        }
        let k = num_classes as usize;
        Ok(ModelState {
            weights: Array2::zeros((k, num_features)),
            bias: Array1::zeros(k),
            adam_m_w: Array2::zeros((k, num_features)),
            adam_v_w: Array2::zeros((k, num_features)),
            adam_m_b: Array1::zeros(k),
            adam_v_b: Array1::zeros(k),
            step_count: 0,
            best_loss: f64::INFINITY,
            best_weights: Array2::zeros((k, num_features)),
            best_bias: Array1::zeros(k),
            epoch_losses: Vec::new(),
        })
    }

    pub fn num_classes(&self) -> u32 {
        self.weights.nrows() as u32
    }

    pub fn num_features(&self) -> usize {
        self.weights.ncols()
    }

    /// Class probabilities for a feature vector: softmax of the affine
    /// logits, computed with max-subtraction so large logits cannot
    /// overflow.
    pub fn forward(&self, features: &[f64]) -> Result<SoftLabel> {
        SoftLabel::new(self.forward_raw(features)?)
    }

    fn forward_raw(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.num_features() {
            return Err(Error::InvalidArgument(format!(
                "feature vector has length {}, model expects {}",
                features.len(),
                self.num_features()
            )));
        }
        let mut logits: Vec<f64> = self
            .weights
            .rows()
            .into_iter()
            .zip(self.bias.iter())
            .map(|(row, &b)| row.iter().zip(features).map(|(w, f)| w * f).sum::<f64>() + b)
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for l in logits.iter_mut() {
            *l = (*l - max).exp();
            sum += *l;
        }
        for l in logits.iter_mut() {
            *l /= sum;
        }
        Ok(logits)
    }

    /// Copies the checkpointed (lowest-loss) parameters into the current
    /// ones, so the returned model predicts with its best snapshot.
    fn restore_best(&mut self) {
        self.weights.assign(&self.best_weights);
        self.bias.assign(&self.best_bias);
    }

    fn snapshot_best(&mut self, loss: f64) {
        self.best_loss = loss;
        self.best_weights.assign(&self.weights);
        self.best_bias.assign(&self.bias);
    }
}

/// Training protocol parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Initial learning rate of the cosine schedule.
    pub lr0: f64,
    /// Final learning rate of the cosine schedule.
    pub eta_min: f64,
    /// Number of cross-validation folds.
    pub folds: usize,
    pub aug: AugConfig,
    pub seed: u64,
}

impl TrainConfig {
    /// Protocol defaults: 1000 epochs, batch size 64, learning rate 2e-3
    /// annealed to 0, five folds.
    pub fn new(aug: AugConfig) -> Self {
        TrainConfig {
            epochs: 1000,
            batch_size: 64,
            lr0: 2e-3,
            eta_min: 0.0,
            folds: 5,
            aug,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidArgument(
                "batch_size must be at least 1".into(),
            ));
        }
        if self.folds < 2 {
            return Err(Error::InvalidArgument("folds must be at least 2".into()));
        }
        if !(self.lr0.is_finite() && self.lr0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lr0 must be finite and positive, got {}",
                self.lr0
            )));
        }
        if !(self.eta_min.is_finite() && (0.0..=self.lr0).contains(&self.eta_min)) {
            return Err(Error::InvalidArgument(format!(
                "eta_min must lie in [0, lr0], got {}",
                self.eta_min
            )));
        }
        self.aug.validate()
    }
}

/// Evaluation summary of a k-fold ensemble on a holdout set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Vote-ensemble accuracy on the holdout set.
    pub accuracy: f64,
    /// Population standard deviation of the per-fold accuracies.
    pub std: f64,
    /// Individual holdout accuracy of each fold model, in fold order.
    pub per_fold_accuracy: Vec<f64>,
    /// Mean max-probability of the ensemble on the holdout inputs as-is.
    pub mean_confidence_pure: f64,
    /// Mean max-probability of the ensemble on crop-and-concatenate-mixed
    /// versions of the holdout inputs.
    pub mean_confidence_mixed: f64,
}

/// Per-channel log of the sample variance over time (variance floored at
/// 1e-12). Variance is scale-revealing for oscillatory signals, and the log
/// turns amplitude ratios into feature differences.
pub fn extract_features(trial: &Trial) -> Result<Vec<f64>> {
    if trial.timepoints() < 2 {
        return Err(Error::InvalidArgument(format!(
            "features need at least 2 timepoints, got {}",
            trial.timepoints()
        )));
    }
    Ok(log_variance_features(&trial.data))
}

fn log_variance_features(data: &Array2<f64>) -> Vec<f64> {
    let timepoints = data.ncols();
    data.rows()
        .into_iter()
        .map(|row| {
            let mean = row.sum() / timepoints as f64;
            let var =
                row.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (timepoints as f64 - 1.0);
            var.max(VAR_FLOOR).ln()
        })
        .collect()
}

/// Cross-entropy against a soft target: `-sum_k target_k * log(pred_k)`,
/// with predictions floored at 1e-12 inside the log.
pub fn soft_cross_entropy(pred: &SoftLabel, target: &SoftLabel) -> Result<f64> {
    if pred.num_classes() != target.num_classes() {
        return Err(Error::InvalidArgument(format!(
            "prediction has {} classes, target has {}",
            pred.num_classes(),
            target.num_classes()
        )));
    }
    Ok(cross_entropy_raw(pred.probs(), target.probs()))
}

fn cross_entropy_raw(pred: &[f64], target: &[f64]) -> f64 {
    -pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| t * p.max(PROB_FLOOR).ln())
        .sum::<f64>()
}

/// Mean gradient of the soft cross-entropy over a batch: for weights,
/// `(pred - target) (outer) features`; for the bias, `pred - target`. This
/// is the exact softmax-cross-entropy gradient, so no flooring enters here.
pub fn grad(
    state: &ModelState,
    features: &[Vec<f64>],
    targets: &[SoftLabel],
) -> Result<(Array2<f64>, Array1<f64>)> {
    if features.is_empty() || features.len() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "gradient needs matching nonempty batches, got {} feature rows and {} targets",
            features.len(),
            targets.len()
        )));
    }
    let k = state.num_classes() as usize;
    let f = state.num_features();
    let mut grad_w = Array2::zeros((k, f));
    let mut grad_b = Array1::zeros(k);
    for (feat, target) in features.iter().zip(targets) {
        if target.num_classes() != k {
            return Err(Error::InvalidArgument(format!(
                "target has {} classes, model expects {k}",
                target.num_classes()
            )));
        }
        let pred = state.forward_raw(feat)?;
        for (c, (&p, &t)) in pred.iter().zip(target.probs()).enumerate() {
            let delta = p - t;
            grad_b[c] += delta;
            for (j, &x) in feat.iter().enumerate() {
                grad_w[[c, j]] += delta * x;
            }
        }
    }
    let scale = 1.0 / features.len() as f64;
    grad_w *= scale;
    grad_b *= scale;
    Ok((grad_w, grad_b))
}

/// One Adam update (beta1 0.9, beta2 0.999, eps 1e-8, bias-corrected) at
/// learning rate `lr`; increments the step count.
pub fn adam_step(
    state: &mut ModelState,
    grad_w: &Array2<f64>,
    grad_b: &Array1<f64>,
    lr: f64,
) -> Result<()> {
    if grad_w.dim() != state.weights.dim() || grad_b.len() != state.bias.len() {
        return Err(Error::InvalidArgument(format!(
            "gradient shapes {:?}/{} do not match model shapes {:?}/{}",
            grad_w.dim(),
            grad_b.len(),
            state.weights.dim(),
            state.bias.len()
        )));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let m_corr = 1.0 - ADAM_BETA1.powi(t);
    let v_corr = 1.0 - ADAM_BETA2.powi(t);
    let update = |theta: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = *m / m_corr;
        let v_hat = *v / v_corr;
        *theta -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    };
    for ((theta, m), (v, &g)) in state
        .weights
        .iter_mut()
        .zip(state.adam_m_w.iter_mut())
        .zip(state.adam_v_w.iter_mut().zip(grad_w.iter()))
    {
        update(theta, m, v, g);
    }
    for ((theta, m), (v, &g)) in state
        .bias
        .iter_mut()
        .zip(state.adam_m_b.iter_mut())
        .zip(state.adam_v_b.iter_mut().zip(grad_b.iter()))
    {
        update(theta, m, v, g);
    }
    Ok(())
}

/// Cosine annealing without restarts:
/// `eta_min + (lr0 - eta_min) * (1 + cos(pi * epoch / total)) / 2`.
pub fn cosine_lr(epoch: usize, total: usize, lr0: f64, eta_min: f64) -> f64 {
    assert!(total >= 1, "schedule needs at least one epoch");
    let phase = std::f64::consts::PI * epoch as f64 / total as f64;
    eta_min + (lr0 - eta_min) * (1.0 + phase.cos()) / 2.0
}

/// Trains one model on `train_split` and returns it with the parameters of
/// the epoch that had the lowest mean training loss.
///
/// Each epoch shuffles the trial order (seeded), walks mini-batches, and for
/// every batch appends the augmented pairs produced under `config.aug` to
/// the originals (which keep one-hot labels) before taking one Adam step at
/// that epoch's cosine learning rate. Pass-through augmentation outputs --
/// everything under method `none`, and crop-and-concatenate pairs whose
/// window came up empty -- are not appended, so they cannot silently
/// duplicate originals. The shuffle and augmentation streams are separate
/// derivations of `config.seed`, which keeps trajectories for configurations
/// that draw differently (or not at all) from the augmentation stream
/// otherwise comparable.
pub fn train_fold(train_split: &Dataset, config: &TrainConfig) -> Result<ModelState> {
    config.validate()?;
    train_split.validate()?;
    let Some((channels, timepoints)) = train_split.shape() else {
        return Err(Error::InvalidArgument(
            "cannot train on an empty split".into(),
        ));
    };
    if timepoints < 2 {
        return Err(Error::InvalidArgument(format!(
            "features need at least 2 timepoints, got {timepoints}"
        )));
    }
    let num_classes = train_split.num_classes;
    let trials = &train_split.trials;

    let features: Vec<Vec<f64>> = trials
        .iter()
        .map(|t| log_variance_features(&t.data))
        .collect();
    let onehots: Vec<SoftLabel> = trials
        .iter()
        .map(|t| SoftLabel::one_hot(t.label, num_classes))
        .collect::<Result<_>>()?;

    let mut state = ModelState::new(num_classes, channels)?;
    let mut shuffle_rng = seeded_rng(derive_seed(config.seed, STREAM_SHUFFLE));
    let mut aug_rng = seeded_rng(derive_seed(config.seed, STREAM_AUGMENT));
    let mut order: Vec<usize> = (0..trials.len()).collect();

    let k = num_classes as usize;
    for epoch in 0..config.epochs {
        let lr = cosine_lr(epoch, config.epochs, config.lr0, config.eta_min);
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut item_count = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&Trial> = chunk.iter().map(|&i| &trials[i]).collect();
            let augmented = augment_batch(&batch, &config.aug, num_classes, &mut aug_rng)?;

            let mut grad_w = Array2::zeros((k, channels));
            let mut grad_b = Array1::zeros(k);
            let mut items = 0usize;
            let mut accumulate = |state: &ModelState,
                                  feat: &[f64],
                                  target: &[f64],
                                  grad_w: &mut Array2<f64>,
                                  grad_b: &mut Array1<f64>|
             -> Result<()> {
                let pred = state.forward_raw(feat)?;
                loss_sum += cross_entropy_raw(&pred, target);
                for (c, (&p, &t)) in pred.iter().zip(target).enumerate() {
                    let delta = p - t;
                    grad_b[c] += delta;
                    for (j, &x) in feat.iter().enumerate() {
                        grad_w[[c, j]] += delta * x;
                    }
                }
                items += 1;
                Ok(())
            };

            for &i in chunk {
                accumulate(
                    &state,
                    &features[i],
                    onehots[i].probs(),
                    &mut grad_w,
                    &mut grad_b,
                )?;
            }
            for pair in &augmented {
                let appended = match config.aug.method {
                    Method::None => false,
                    Method::CropcatSpatial | Method::CropcatTemporal => pair.provenance.is_some(),
                    _ => true,
                };
                if appended {
                    let feat = log_variance_features(&pair.data);
                    accumulate(&state, &feat, pair.label.probs(), &mut grad_w, &mut grad_b)?;
                }
            }

            let scale = 1.0 / items as f64;
            grad_w *= scale;
            grad_b *= scale;
            adam_step(&mut state, &grad_w, &grad_b, lr)?;
            item_count += items;
        }

        let epoch_mean = loss_sum / item_count as f64;
        if !epoch_mean.is_finite() {
            return Err(Error::Numeric(format!(
                "training loss became non-finite at epoch {epoch}"
            )));
        }
        state.epoch_losses.push(epoch_mean);
        if epoch_mean < state.best_loss {
            state.snapshot_best(epoch_mean);
        }
    }
    state.restore_best();
    Ok(state)
}

/// Stratified k-fold partition: per class, indices are shuffled (seeded) and
/// dealt round-robin into folds. Returns `(train, validation)` index pairs;
/// validation sets are disjoint and cover the dataset.
pub fn kfold_split(
    dataset: &Dataset,
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    dataset.validate()?;
    if k < 2 {
        return Err(Error::InvalidArgument("folds must be at least 2".into()));
    }
    if dataset.len() < k {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} trials into {k} folds",
            dataset.len()
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut validation: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class in 0..dataset.num_classes {
        let mut members: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.trials[i].label == class)
            .collect();
        members.shuffle(&mut rng);
        for (j, idx) in members.into_iter().enumerate() {
            validation[j % k].push(idx);
        }
    }
    Ok(validation
        .into_iter()
        .map(|mut val| {
            val.sort_unstable();
            let in_val: std::collections::HashSet<usize> = val.iter().copied().collect();
            let train: Vec<usize> = (0..dataset.len()).filter(|i| !in_val.contains(i)).collect();
            (train, val)
        })
        .collect())
}

/// Majority vote over per-model argmax predictions. Ties go to the class
/// with the highest summed predicted probability across models, further
/// ties to the lowest class index.
pub fn vote(models: &[ModelState], trial: &Trial) -> Result<usize> {
    let summed = ensemble_probs(models, trial)?;
    let mut counts = vec![0usize; summed.len()];
    for model in models {
        let probs = model.forward_raw(&extract_features(trial)?)?;
        counts[argmax_index(&probs)] += 1;
    }
    let top = *counts.iter().max().expect("at least one class");
    let winner = (0..counts.len())
        .filter(|&c| counts[c] == top)
        .max_by(|&a, &b| {
            summed[a]
                .partial_cmp(&summed[b])
                .expect("finite probs")
                .then(b.cmp(&a))
        })
        .expect("at least one tied class");
    Ok(winner)
}

fn argmax_index(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn ensemble_probs(models: &[ModelState], trial: &Trial) -> Result<Vec<f64>> {
    let first = models.first().ok_or_else(|| {
        Error::InvalidArgument("ensemble evaluation needs at least one model".into())
    })?;
    let features = extract_features(trial)?;
    let mut summed = vec![0.0; first.num_classes() as usize];
    for model in models {
        if model.num_classes() != first.num_classes()
            || model.num_features() != first.num_features()
        {
            return Err(Error::InvalidArgument(
                "ensemble models disagree on class or feature counts".into(),
            ));
        }
        for (s, p) in summed.iter_mut().zip(model.forward_raw(&features)?) {
            *s += p;
        }
    }
    let scale = 1.0 / models.len() as f64;
    for s in summed.iter_mut() {
        *s *= scale;
    }
    Ok(summed)
}

/// Trains one model per cross-validation fold of `dataset` (each on its
/// train split) and returns them in fold order. Fold seeds derive from
/// `config.seed`, so the set of models is deterministic.
pub fn train_folds(dataset: &Dataset, config: &TrainConfig) -> Result<Vec<ModelState>> {
    config.validate()?;
    let splits = kfold_split(
        dataset,
        config.folds,
        derive_seed(config.seed, STREAM_SPLIT),
    )?;
    let mut models = Vec::with_capacity(splits.len());
    for (fold, (train_idx, _)) in splits.into_iter().enumerate() {
        let split = Dataset::new(
            train_idx
                .iter()
                .map(|&i| dataset.trials[i].clone())
                .collect(),
            dataset.num_classes,
            dataset.sample_rate_hz,
        )?;
        let mut fold_config = config.clone();
        fold_config.seed = derive_seed(config.seed, STREAM_FOLD_BASE + fold as u64);
        models.push(train_fold(&split, &fold_config)?);
    }
    Ok(models)
}

/// Evaluates fold models on a holdout set: vote-ensemble accuracy, per-fold
/// accuracies and their population standard deviation, and the ensemble's
/// mean max-probability on the holdout inputs as-is versus on
/// crop-and-concatenate-mixed versions of them.
///
/// Mixed inputs are built with the configured method when it is a
/// crop-and-concatenate variant, and with the temporal variant otherwise
/// (the confidence comparison is specifically about mixed-content inputs).
/// Only pairs whose window actually landed count as mixed; if none landed,
/// the mixed confidence falls back to the pure one and the comparison is
/// vacuous.
pub fn evaluate_models(
    models: &[ModelState],
    holdout: &Dataset,
    config: &TrainConfig,
) -> Result<Metrics> {
    config.validate()?;
    holdout.validate()?;
    if models.is_empty() {
        return Err(Error::InvalidArgument(
            "evaluation needs at least one model".into(),
        ));
    }
    if holdout.is_empty() {
        return Err(Error::InvalidArgument(
            "evaluation needs a nonempty holdout set".into(),
        ));
    }
    let first = &models[0];
    if first.num_classes() != holdout.num_classes {
        return Err(Error::InvalidArgument(format!(
            "models predict {} classes, holdout declares {}",
            first.num_classes(),
            holdout.num_classes
        )));
    }

    let n = holdout.len() as f64;
    let per_fold_accuracy: Vec<f64> = models
        .iter()
        .map(|model| {
            let mut correct = 0usize;
            for trial in &holdout.trials {
                let probs = model.forward_raw(&extract_features(trial)?)?;
                if argmax_index(&probs) == trial.label as usize {
                    correct += 1;
                }
            }
            Ok(correct as f64 / n)
        })
        .collect::<Result<_>>()?;

    let mut correct = 0usize;
    let mut confidence_sum = 0.0;
    for trial in &holdout.trials {
        if vote(models, trial)? == trial.label as usize {
            correct += 1;
        }
        let probs = ensemble_probs(models, trial)?;
        confidence_sum += probs[argmax_index(&probs)];
    }
    let mean_confidence_pure = confidence_sum / n;

    let mut mix_config = config.aug.clone();
    mix_config.method = match config.aug.method {
        Method::CropcatSpatial => Method::CropcatSpatial,
        _ => Method::CropcatTemporal,
    };
    let mut mix_rng = seeded_rng(derive_seed(config.seed, STREAM_EVAL_MIX));
    let holdout_refs: Vec<&Trial> = holdout.trials.iter().collect();
    let mixed = augment_batch(
        &holdout_refs,
        &mix_config,
        holdout.num_classes,
        &mut mix_rng,
    )?;
    let mut mixed_sum = 0.0;
    let mut mixed_count = 0usize;
    for pair in &mixed {
        if pair.provenance.is_some() {
            let feat = log_variance_features(&pair.data);
            let mut summed = vec![0.0; first.num_classes() as usize];
            for model in models {
                for (s, p) in summed.iter_mut().zip(model.forward_raw(&feat)?) {
                    *s += p;
                }
            }
            mixed_sum +=
                summed.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) / models.len() as f64;
            mixed_count += 1;
        }
    }
    let mean_confidence_mixed = if mixed_count > 0 {
        mixed_sum / mixed_count as f64
    } else {
        mean_confidence_pure
    };

    Ok(Metrics {
        accuracy: correct as f64 / n,
        std: population_std(&per_fold_accuracy),
        per_fold_accuracy,
        mean_confidence_pure,
        mean_confidence_mixed,
    })
}

/// Full protocol: stratified k-fold training on `dataset`, then holdout
/// evaluation of the resulting ensemble.
pub fn evaluate(dataset: &Dataset, config: &TrainConfig, holdout: &Dataset) -> Result<Metrics> {
    let models = train_folds(dataset, config)?;
    evaluate_models(&models, holdout, config)
}

fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}
