//! Cross-entropy training with per-example SGD, dev-set model selection and
//! model files.

mod backprop;
mod model;
mod serialize;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use backprop::{bptt_gradients, check_gradients, cross_entropy, instance_loss, CrossEntropy, LOSS_FLOOR};
pub use model::{argmax, EncoderGrads, ForwardPass, Gradients, Instance, ModelBundle, ModelSpec};
pub use serialize::{load_model, read_model_file, save_model, write_model_file, ModelFormatError, FORMAT_VERSION};

use crate::encoders::{Encoder, EncoderKind};
use crate::evaluation::macro_f1;
use crate::numeric::{axpy, NumericError};
use crate::text::{Example, SchemaError};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Numeric(NumericError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("gold class {gold} out of range for {classes} classes")]
    Label { gold: usize, classes: usize },
    #[error("non-finite value at time step {step}")]
    NonFinite { step: usize },
    #[error("training diverged at epoch {epoch}, step {step}")]
    Diverged { epoch: usize, step: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Embedding(#[from] crate::embedding::EmbeddingError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] crate::evaluation::EvalError),
}

/// Metric used to pick the best epoch on the development set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DevMetric {
    MacroF1,
    Accuracy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Rate after the warm-up epochs.
    pub lr: f64,
    /// Rate during the first `warm_epochs` epochs.
    pub lr_warm: f64,
    pub warm_epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
    pub dev_metric: DevMetric,
    /// Elementwise gradient clipping; off by default.
    pub clip: Option<f64>,
    /// Also measure training-set accuracy after every epoch.
    pub track_train_accuracy: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            lr: 0.01,
            lr_warm: 0.1,
            warm_epochs: 5,
            seed: 1,
            shuffle: true,
            dev_metric: DevMetric::MacroF1,
            clip: None,
            track_train_accuracy: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if [self.lr, self.lr_warm].iter().any(|r| r.is_nan() || *r <= 0.0) {
            return Err(TrainError::Config("learning rates must be positive".into()));
        }
        if let Some(c) = self.clip {
            if c.is_nan() || c <= 0.0 {
                return Err(TrainError::Config("clip limit must be positive".into()));
            }
        }
        Ok(())
    }

    /// Learning rate for a 1-based epoch.
    pub fn lr_for_epoch(&self, epoch: usize) -> f64 {
        if epoch <= self.warm_epochs {
            self.lr_warm
        } else {
            self.lr
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub mean_loss: f64,
    pub train_accuracy: Option<f64>,
    pub dev_metric: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub best: ModelBundle,
    pub best_epoch: usize,
    pub log: Vec<EpochLog>,
}

/// `θ ← θ − lr·∇θ`. No momentum, no weight decay.
pub fn sgd_step(bundle: &mut ModelBundle, grads: &Gradients, lr: f64) -> Result<(), TrainError> {
    if lr.is_nan() || lr < 0.0 {
        return Err(TrainError::Config(format!(
            "learning rate must be non-negative, got {lr}"
        )));
    }
    let shape = |what: &'static str| {
        TrainError::Numeric(NumericError::Shape {
            op: what,
            left: (0, 0),
            right: (0, 0),
        })
    };
    for (&row, g) in &grads.words {
        if row >= bundle.words.len() || g.len() != bundle.words.dim() {
            return Err(shape("sgd_step words"));
        }
        axpy(-lr, g, bundle.words.column_mut(row));
    }
    if !grads.pos_e1.is_empty() || !grads.pos_e2.is_empty() {
        let pe = bundle.positions.as_mut().ok_or_else(|| shape("sgd_step positions"))?;
        for (table, map) in [(&mut pe.to_e1, &grads.pos_e1), (&mut pe.to_e2, &grads.pos_e2)] {
            for (&row, g) in map {
                if row >= table.rows() || g.len() != table.cols() {
                    return Err(shape("sgd_step positions"));
                }
                axpy(-lr, g, table.row_mut(row));
            }
        }
    }
    match (&mut bundle.encoder, &grads.encoder) {
        (Encoder::Rnn { params, .. }, EncoderGrads::Rnn(g)) => {
            params.forward.w.axpy(-lr, &g.forward.w)?;
            params.forward.u.axpy(-lr, &g.forward.u)?;
            if params.forward.b.len() != g.forward.b.len() {
                return Err(shape("sgd_step fw.b"));
            }
            axpy(-lr, &g.forward.b, &mut params.forward.b);
            match (&mut params.backward, &g.backward) {
                (Some(p), Some(gb)) => {
                    p.w.axpy(-lr, &gb.w)?;
                    p.u.axpy(-lr, &gb.u)?;
                    if p.b.len() != gb.b.len() {
                        return Err(shape("sgd_step bw.b"));
                    }
                    axpy(-lr, &gb.b, &mut p.b);
                }
                (None, None) => {}
                _ => return Err(shape("sgd_step backward rnn")),
            }
        }
        (Encoder::Cnn(p), EncoderGrads::Cnn(g)) => {
            p.filter.axpy(-lr, &g.filter)?;
            if p.bias.len() != g.bias.len() {
                return Err(shape("sgd_step conv.b"));
            }
            axpy(-lr, &g.bias, &mut p.bias);
        }
        _ => return Err(shape("sgd_step encoder kind")),
    }
    bundle.classifier.weights.axpy(-lr, &grads.classifier.weights)?;
    if bundle.classifier.bias.len() != grads.classifier.bias.len() {
        return Err(shape("sgd_step out.b"));
    }
    axpy(-lr, &grads.classifier.bias, &mut bundle.classifier.bias);
    Ok(())
}

fn accuracy(bundle: &ModelBundle, instances: &[Instance]) -> Result<f64, TrainError> {
    if instances.is_empty() {
        return Ok(0.0);
    }
    let preds = bundle.predict_instances(instances)?;
    let correct = preds.iter().zip(instances).filter(|(p, i)| **p == i.gold).count();
    Ok(100.0 * correct as f64 / instances.len() as f64)
}

fn dev_score(bundle: &ModelBundle, dev: &[Instance], metric: DevMetric) -> Result<f64, TrainError> {
    match metric {
        DevMetric::Accuracy => accuracy(bundle, dev),
        DevMetric::MacroF1 => {
            let preds = bundle.predict_instances(dev)?;
            let gold: Vec<usize> = dev.iter().map(|i| i.gold).collect();
            Ok(macro_f1(&gold, &preds, &bundle.schema)?.macro_f1)
        }
    }
}

/// Per-example SGD over shuffled data, keeping the bundle from the best dev epoch.
pub fn train(
    bundle: ModelBundle,
    train_set: &[Example],
    dev_set: &[Example],
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    train_with(bundle, train_set, dev_set, config, |_| {})
}

/// [`train`] with a callback after every epoch.
///
/// Without a dev set the final epoch is returned. Ties in the dev metric keep
/// the earlier epoch.
pub fn train_with(
    mut bundle: ModelBundle,
    train_set: &[Example],
    dev_set: &[Example],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    bundle.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::Config("training set is empty".into()));
    }
    let train_inst = bundle.prepare_all(train_set)?;
    let dev_inst = bundle.prepare_all(dev_set)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_inst.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ModelBundle)> = None;

    for epoch in 1..=config.epochs {
        let lr = config.lr_for_epoch(epoch);
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for (step, &i) in order.iter().enumerate() {
            let (loss, mut grads) = match bptt_gradients(&bundle, &train_inst[i]) {
                Ok(r) => r,
                Err(TrainError::NonFinite { .. }) => return Err(TrainError::Diverged { epoch, step }),
                Err(e) => return Err(e),
            };
            if !loss.is_finite() {
                return Err(TrainError::Diverged { epoch, step });
            }
            if let Some(c) = config.clip {
                grads.clip(c);
            }
            sgd_step(&mut bundle, &grads, lr)?;
            total += loss;
        }
        let train_accuracy = if config.track_train_accuracy {
            Some(accuracy(&bundle, &train_inst)?)
        } else {
            None
        };
        let dev_metric = if dev_inst.is_empty() {
            None
        } else {
            Some(dev_score(&bundle, &dev_inst, config.dev_metric)?)
        };
        let entry = EpochLog {
            epoch,
            lr,
            mean_loss: total / train_inst.len() as f64,
            train_accuracy,
            dev_metric,
        };
        on_epoch(&entry);
        log.push(entry);
        match dev_metric {
            Some(score) => {
                if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                    best = Some((score, epoch, bundle.clone()));
                }
            }
            None => {
                if epoch == config.epochs {
                    best = Some((f64::NAN, epoch, bundle.clone()));
                }
            }
        }
    }
    let (_, best_epoch, best) = best.expect("at least one epoch");
    Ok(TrainOutcome { best, best_epoch, log })
}

/// Default hidden sizes used by the reference experiment recipes.
pub fn default_hidden(encoder: EncoderKind, kbp: bool) -> usize {
    match (encoder, kbp) {
        (EncoderKind::Rnn, false) => 800,
        (EncoderKind::Rnn, true) => 700,
        (EncoderKind::Cnn, false) => 400,
        (EncoderKind::Cnn, true) => 500,
    }
}

/// Splits off a random `fraction` of `examples` as a development set.
/// Both parts keep the original order.
pub fn split_holdout(
    examples: Vec<Example>,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<Example>, Vec<Example>), TrainError> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(TrainError::Config(format!(
            "dev fraction must be in [0, 1), got {fraction}"
        )));
    }
    let n_dev = (fraction * examples.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_dev = vec![false; examples.len()];
    for &i in &order[..n_dev] {
        is_dev[i] = true;
    }
    let (dev, train): (Vec<_>, Vec<_>) = examples.into_iter().zip(is_dev).partition(|(_, d)| *d);
    Ok((
        train.into_iter().map(|(e, _)| e).collect(),
        dev.into_iter().map(|(e, _)| e).collect(),
    ))
}
