//! Score-only distillation: minimise the mean Huber loss between the
//! student's τ and the teacher's `1 − S`.

use rand::seq::SliceRandom;

use super::huber::{huber, huber_grad};
use super::model::{GateRegressor, ModelShape};
use super::optim::{AdamW, AdamWConfig};
use crate::exec::Execution;
use crate::oracle::{seed, LabelRow};
use crate::{Error, Result};

/// One supervised pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub ref_token: Vec<f64>,
    pub cur_token: Vec<f64>,
    pub target: f64,
}

impl From<&LabelRow> for Example {
    fn from(r: &LabelRow) -> Self {
        Self { ref_token: r.ref_token.clone(), cur_token: r.cur_token.clone(), target: r.tau_gt }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub delta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub k_iters: usize,
    pub seed: u64,
    pub shape: ModelShape,
    pub optim: AdamWConfig,
    /// Fraction of all optimiser steps spent in linear warmup; cosine decay
    /// to zero follows.
    pub warmup_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            delta: 0.1,
            epochs: 20,
            batch_size: 32,
            k_iters: 4,
            seed: 0,
            shape: ModelShape::default(),
            optim: AdamWConfig::default(),
            warmup_fraction: 0.25,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.delta > 0.0) {
            return bad("delta must be > 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return bad("warmup_fraction must lie in [0, 1]");
        }
        let o = &self.optim;
        if !(o.lr_head >= 0.0 && o.lr_proj >= 0.0 && o.weight_decay >= 0.0 && o.eps > 0.0) {
            return bad("learning rates and weight decay must be >= 0, eps > 0");
        }
        if !((0.0..1.0).contains(&o.beta1) && (0.0..1.0).contains(&o.beta2)) {
            return bad("betas must lie in [0, 1)");
        }
        Ok(())
    }

    fn steps_per_epoch(&self, n: usize) -> usize {
        n.div_ceil(self.batch_size)
    }

    /// Learning-rate multiplier for 0-based optimiser step `step`.
    pub fn lr_scale(&self, step: u64, n_train: usize) -> f64 {
        let total = (self.epochs * self.steps_per_epoch(n_train)) as f64;
        let warm = (self.warmup_fraction * total).ceil();
        let s = step as f64;
        if s < warm {
            (s + 1.0) / warm
        } else if total > warm {
            0.5 * (1.0 + (std::f64::consts::PI * (s - warm) / (total - warm)).cos())
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub loss: f64,
    pub mae: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    pub train: ErrorStats,
    pub eval: Option<ErrorStats>,
}

/// Everything needed to continue training bit-identically.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub model: GateRegressor,
    pub optim: AdamW,
    pub epochs_done: usize,
}

pub fn batch_loss(model: &GateRegressor, batch: &[Example], k_iters: usize, delta: f64, exec: Execution) -> f64 {
    let preds = predict_all(model, batch, k_iters, exec);
    preds.iter().zip(batch).map(|(p, e)| huber(p - e.target, delta)).sum::<f64>() / batch.len() as f64
}

/// Mean Huber loss and its gradient. Per-example gradients are summed in
/// input order, so the result does not depend on `exec`.
pub fn batch_loss_and_grad(
    model: &GateRegressor,
    batch: &[Example],
    k_iters: usize,
    delta: f64,
    exec: Execution,
) -> (f64, GateRegressor) {
    let n = batch.len() as f64;
    let parts = exec.map(batch, |ex| {
        let tr = model.forward(&ex.ref_token, &ex.cur_token, k_iters).expect("token dims checked");
        let a = tr.tau - ex.target;
        let mut g = model.zeros_like();
        model.backward(&tr, huber_grad(a, delta) / n, &mut g);
        (huber(a, delta), g)
    });
    let mut loss = 0.0;
    let mut grad = model.zeros_like();
    for (l, g) in parts {
        loss += l;
        for ((_, acc), (_, gi)) in grad.blocks_mut().into_iter().zip(g.blocks()) {
            acc.add_vec(&gi.data);
        }
    }
    (loss / n, grad)
}

pub fn predict_all(model: &GateRegressor, data: &[Example], k_iters: usize, exec: Execution) -> Vec<f64> {
    exec.map(data, |ex| model.predict_tokens(&ex.ref_token, &ex.cur_token, k_iters).expect("token dims checked"))
}

pub fn error_stats(pred: &[f64], data: &[Example], delta: f64) -> ErrorStats {
    let n = data.len().max(1) as f64;
    let (mut loss, mut abs, mut sq) = (0.0, 0.0, 0.0);
    for (p, e) in pred.iter().zip(data) {
        let a = p - e.target;
        loss += huber(a, delta);
        abs += a.abs();
        sq += a * a;
    }
    ErrorStats { loss: loss / n, mae: abs / n, rmse: (sq / n).sqrt() }
}

fn check_dims(data: &[Example], d: usize) -> Result<()> {
    for ex in data {
        for t in [&ex.ref_token, &ex.cur_token] {
            if t.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: t.len() });
            }
        }
    }
    Ok(())
}

/// Seeded initialisation with input standardisation fitted on `train`.
pub fn init_state(train: &[Example], cfg: &TrainConfig) -> Result<TrainState> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("no training examples".into()));
    }
    let d = train[0].ref_token.len();
    let shape = ModelShape { token_dim: d, ..cfg.shape };
    check_dims(train, d)?;
    let mut model = GateRegressor::init(shape, &mut seed::rng(cfg.seed, "init", 0));
    let n = (2 * train.len()) as f64;
    for k in 0..d {
        let vals = train.iter().flat_map(|e| [e.ref_token[k], e.cur_token[k]]);
        let mean = vals.clone().sum::<f64>() / n;
        let var = vals.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        model.input_mean.data[k] = mean;
        model.input_scale.data[k] = if var.sqrt() > 1e-6 { 1.0 / var.sqrt() } else { 1.0 };
    }
    model.round_to_f32();
    let optim = AdamW::new(&model);
    Ok(TrainState { model, optim, epochs_done: 0 })
}

/// Runs one epoch: a seeded shuffle, minibatch updates, then full-pass
/// metrics on both splits with the updated parameters.
pub fn train_epoch(
    state: &mut TrainState,
    train: &[Example],
    eval: &[Example],
    cfg: &TrainConfig,
    exec: Execution,
) -> Result<EpochMetrics> {
    if train.is_empty() {
        return Err(Error::Empty("no training examples".into()));
    }
    let d = state.model.shape().token_dim;
    check_dims(train, d)?;
    check_dims(eval, d)?;
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut seed::rng(cfg.seed, "epoch", state.epochs_done as u64));
    let mut batch = Vec::with_capacity(cfg.batch_size);
    for chunk in order.chunks(cfg.batch_size) {
        batch.clear();
        batch.extend(chunk.iter().map(|&i| train[i].clone()));
        let (_, grad) = batch_loss_and_grad(&state.model, &batch, cfg.k_iters, cfg.delta, exec);
        let scale = cfg.lr_scale(state.optim.step, train.len());
        state.optim.update(&mut state.model, &grad, &cfg.optim, scale);
    }
    if !state.model.is_finite() {
        return Err(Error::InvalidArgument("training diverged to non-finite parameters".into()));
    }
    state.epochs_done += 1;
    let tp = predict_all(&state.model, train, cfg.k_iters, exec);
    let eval_stats = if eval.is_empty() {
        None
    } else {
        Some(error_stats(&predict_all(&state.model, eval, cfg.k_iters, exec), eval, cfg.delta))
    };
    Ok(EpochMetrics { epoch: state.epochs_done, train: error_stats(&tp, train, cfg.delta), eval: eval_stats })
}

/// Trains from scratch for `cfg.epochs` epochs.
pub fn train(
    train: &[Example],
    eval: &[Example],
    cfg: &TrainConfig,
    exec: Execution,
) -> Result<(GateRegressor, Vec<EpochMetrics>)> {
    let mut state = init_state(train, cfg)?;
    let mut history = Vec::with_capacity(cfg.epochs);
    while state.epochs_done < cfg.epochs {
        history.push(train_epoch(&mut state, train, eval, cfg, exec)?);
    }
    Ok((state.model, history))
}
