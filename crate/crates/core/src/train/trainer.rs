use rayon::prelude::*;

use crate::dataio::{label_counts, ClassTable, Sample};
use crate::error::{Error, Result};
use crate::model::{
    argmax, compute_class_weights, head_backward, head_forward, weighted_cross_entropy, Checkpoint,
    CheckpointMeta, ClassWeights, HeadDims, ModelParams,
};
use crate::numerics::rng::fnv1a64;
use crate::numerics::{AdamW, AdamWConfig, Mode, Rng, StreamKey, Tensor2D};
use crate::train::metrics::{ConfusionMatrix, Metrics};
use crate::train::schedule::TrainState;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr: f64,
    pub lr_decay_factor: f64,
    pub plateau_epochs: usize,
    pub weight_decay: f64,
    pub dropout: f64,
    /// Waveform pipeline settings. Precomputed feature sequences are used
    /// whole, so training on features validates and records them only.
    pub aug_probability: f64,
    pub window_seconds: f64,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    /// Balanced inverse-frequency loss weights when set, uniform otherwise.
    pub class_weighting: bool,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 16,
            lr: 5e-5,
            lr_decay_factor: 0.9,
            plateau_epochs: 5,
            weight_decay: 0.01,
            dropout: 0.1,
            aug_probability: 0.3,
            window_seconds: 5.5,
            hidden_width: 256,
            hidden_layers: 2,
            max_epochs: 100,
            early_stop_patience: 15,
            class_weighting: true,
            seed: 0,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        if !(self.lr > 0.0) {
            return fail("lr must be positive");
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor < 1.0) {
            return fail("lr_decay_factor must lie in (0, 1)");
        }
        if self.plateau_epochs == 0 {
            return fail("plateau_epochs must be at least 1");
        }
        if !(self.weight_decay >= 0.0) {
            return fail("weight_decay must be non-negative");
        }
        crate::numerics::layers::check_dropout_rate(self.dropout)?;
        if !(0.0..=1.0).contains(&self.aug_probability) {
            return fail("aug_probability must lie in [0, 1]");
        }
        if !(self.window_seconds > 0.0) {
            return fail("window_seconds must be positive");
        }
        if self.hidden_width == 0 || self.max_epochs == 0 || self.early_stop_patience == 0 {
            return fail("hidden_width, max_epochs and early_stop_patience must be positive");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        Ok(())
    }

    /// Hash of every setting that affects the learned parameters.
    pub fn fingerprint(&self) -> u64 {
        let text = format!(
            "{} {} {} {} {} {} {} {} {} {} {} {} {} {}",
            self.batch_size,
            self.lr,
            self.lr_decay_factor,
            self.plateau_epochs,
            self.weight_decay,
            self.dropout,
            self.aug_probability,
            self.window_seconds,
            self.hidden_width,
            self.hidden_layers,
            self.max_epochs,
            self.early_stop_patience,
            self.class_weighting,
            self.seed,
        );
        fnv1a64(text.as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_macro_f1: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub best: Checkpoint,
    pub best_metrics: Metrics,
    pub history: Vec<EpochRecord>,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Maps `f` over `items` on `pool`, preserving order.
fn ordered_map<T: Sync, R: Send>(
    pool: Option<&rayon::ThreadPool>,
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> Vec<R> {
    match pool {
        Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        None => items.iter().map(f).collect(),
    }
}

fn check_samples(samples: &[Sample], classes: usize, split: &str) -> Result<usize> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Data(format!("{split} split is empty")))?;
    let dim = first.speech.dim();
    for s in samples {
        if s.label >= classes {
            return Err(Error::Data(format!(
                "sample {} has label {} of {classes} classes",
                s.id, s.label
            )));
        }
        if s.speech.dim() != dim || s.text.dim() != dim {
            return Err(Error::Dimension(format!(
                "sample {} has embedding dimension {}, expected {dim}",
                s.id,
                s.speech.dim()
            )));
        }
    }
    Ok(dim)
}

fn fuse_all(samples: &[Sample], pool: Option<&rayon::ThreadPool>) -> Result<Vec<Tensor2D<f32>>> {
    ordered_map(pool, samples, |s| s.fused())
        .into_iter()
        .collect()
}

struct SampleGrad {
    loss: f64,
    weight: f64,
    grads: ModelParams<f32>,
}

/// Trains a head on precomputed feature sequences and returns the
/// checkpoint with the best validation macro F1.
pub fn train(
    train_set: &[Sample],
    val_set: &[Sample],
    classes: &ClassTable,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_with_observer(train_set, val_set, classes, config, |_| {})
}

/// As [`train`], calling `observe` after every epoch.
pub fn train_with_observer(
    train_set: &[Sample],
    val_set: &[Sample],
    classes: &ClassTable,
    config: &TrainConfig,
    mut observe: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    let k = classes.len();
    let dim = check_samples(train_set, k, "training")?;
    let val_dim = check_samples(val_set, k, "validation")?;
    if dim != val_dim {
        return Err(Error::Dimension(format!(
            "training dimension {dim} differs from validation dimension {val_dim}"
        )));
    }
    let counts = label_counts(train_set, k);
    if let Some(missing) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Data(format!(
            "class {:?} is absent from the training split",
            classes.name(missing)
        )));
    }
    let weights = if config.class_weighting {
        compute_class_weights(&counts)?
    } else {
        ClassWeights::uniform(k)
    };

    let pool = if config.workers > 1 {
        Some(thread_pool(config.workers)?)
    } else {
        None
    };
    let pool = pool.as_ref();
    let train_inputs = fuse_all(train_set, pool)?;
    let val_inputs = fuse_all(val_set, pool)?;

    let key = StreamKey::new(config.seed);
    let dims = HeadDims {
        embed: dim,
        width: config.hidden_width,
        layers: config.hidden_layers,
        classes: k,
    };
    let mut params = ModelParams::<f32>::init(dims, &mut key.str("init").rng());
    let mut optimizer = AdamW::<f32>::new(AdamWConfig::new(config.lr, config.weight_decay));
    let mut state = TrainState::new(config.lr, config.lr_decay_factor, config.plateau_epochs);
    let mut history = Vec::new();
    let mut best: Option<(Checkpoint, Metrics)> = None;
    let val_labels: Vec<usize> = val_set.iter().map(|s| s.label).collect();

    for epoch in 1..=config.max_epochs {
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        key.str("shuffle")
            .u64(epoch as u64)
            .rng()
            .shuffle(&mut order);
        optimizer.set_lr(state.lr());

        let mut epoch_loss = 0.0;
        let mut epoch_weight = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let per_sample = ordered_map(pool, batch, |&i| -> Result<SampleGrad> {
                let sample = &train_set[i];
                let mut rng = key.str("dropout").u64(epoch as u64).str(&sample.id).rng();
                let h = &train_inputs[i];
                let (logits, cache) =
                    head_forward(&params, h, config.dropout, Mode::Train, &mut rng)?;
                let (loss, dlogits) = weighted_cross_entropy(&logits, sample.label, &weights)?;
                let (grads, _) = head_backward(&params, h, &cache, &dlogits)?;
                Ok(SampleGrad {
                    loss: loss as f64,
                    weight: weights.get(sample.label),
                    grads,
                })
            });

            let mut total = ModelParams::<f32>::zeros(dims);
            let mut batch_loss = 0.0;
            let mut batch_weight = 0.0;
            for g in per_sample {
                let g = g?;
                batch_loss += g.loss;
                batch_weight += g.weight;
                total.add_assign(&g.grads);
            }
            if !batch_loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {epoch}, batch {b}"
                )));
            }
            total.scale((1.0 / batch_weight) as f32);
            let grads = total.buffers();
            optimizer
                .step(&mut params.buffers_mut(), &grads)
                .map_err(|e| Error::Training(format!("epoch {epoch}, batch {b}: {e}")))?;
            epoch_loss += batch_loss;
            epoch_weight += batch_weight;
        }

        let predictions = predict_inputs(&params, &val_inputs, pool)?;
        let metrics = Metrics::from_predictions(&val_labels, &predictions, k)?;
        let record = EpochRecord {
            epoch,
            train_loss: epoch_loss / epoch_weight,
            val_macro_f1: metrics.macro_f1,
            lr: state.lr(),
        };
        history.push(record);
        observe(&record);

        let event = state.lr_schedule_step(metrics.macro_f1);
        if event.improved {
            let checkpoint = Checkpoint {
                params: params.clone(),
                meta: CheckpointMeta {
                    config_hash: config.fingerprint(),
                    best_val_f1: metrics.macro_f1,
                    epoch: epoch as u32,
                },
            };
            best = Some((checkpoint, metrics));
        }
        if state.since_improvement >= config.early_stop_patience {
            break;
        }
    }

    let (best, best_metrics) = best.expect("the first epoch always improves on -inf");
    Ok(TrainOutcome {
        best,
        best_metrics,
        history,
    })
}

fn predict_inputs(
    params: &ModelParams<f32>,
    inputs: &[Tensor2D<f32>],
    pool: Option<&rayon::ThreadPool>,
) -> Result<Vec<usize>> {
    ordered_map(pool, inputs, |h| {
        // eval mode never draws from the stream
        let mut rng = Rng::new(0);
        head_forward(params, h, 0.0, Mode::Eval, &mut rng).map(|(logits, _)| argmax(&logits))
    })
    .into_iter()
    .collect()
}

/// Eval-mode class predictions on full sequences.
pub fn predict(
    params: &ModelParams<f32>,
    samples: &[Sample],
    workers: usize,
) -> Result<Vec<usize>> {
    params.validate()?;
    let pool = if workers > 1 {
        Some(thread_pool(workers)?)
    } else {
        None
    };
    let inputs = fuse_all(samples, pool.as_ref())?;
    predict_inputs(params, &inputs, pool.as_ref())
}

/// Eval-mode metrics over `samples`.
pub fn evaluate(params: &ModelParams<f32>, samples: &[Sample], workers: usize) -> Result<Metrics> {
    if samples.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty dataset".into()));
    }
    let k = params.dims().classes;
    if params.dims().embed != samples[0].speech.dim() {
        return Err(Error::Dimension(format!(
            "checkpoint expects {}-dimensional features, data has {}",
            params.dims().embed,
            samples[0].speech.dim()
        )));
    }
    check_samples(samples, k, "evaluation")?;
    let predictions = predict(params, samples, workers)?;
    let mut cm = ConfusionMatrix::new(k);
    for (s, p) in samples.iter().zip(predictions) {
        cm.record(s.label, p);
    }
    Ok(Metrics::from_confusion(cm))
}
