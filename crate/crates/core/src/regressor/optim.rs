//! AdamW with per-group learning rates.

use super::model::{GateRegressor, ParamGroup};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamWConfig {
    pub lr_head: f64,
    pub lr_proj: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self { lr_head: 3e-3, lr_proj: 1e-3, weight_decay: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Moment estimates share the model's layout; frozen blocks stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    pub m: GateRegressor,
    pub v: GateRegressor,
    /// Updates applied so far.
    pub step: u64,
}

impl AdamW {
    pub fn new(model: &GateRegressor) -> Self {
        Self { m: model.zeros_like(), v: model.zeros_like(), step: 0 }
    }

    /// One update with learning rates multiplied by `lr_scale`. Weight decay
    /// is decoupled and applies to weight matrices only, not biases or
    /// embeddings. Parameters and moments are rounded to `f32` afterwards so
    /// a checkpoint captures the state exactly.
    pub fn update(&mut self, model: &mut GateRegressor, grad: &GateRegressor, cfg: &AdamWConfig, lr_scale: f64) {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - cfg.beta1.powi(t);
        let bc2 = 1.0 - cfg.beta2.powi(t);
        let params = model.blocks_mut();
        let ms = self.m.blocks_mut();
        let vs = self.v.blocks_mut();
        let gs = grad.blocks();
        for ((((name, p), (_, m)), (_, v)), (_, g)) in params.into_iter().zip(ms).zip(vs).zip(gs) {
            let lr = match GateRegressor::group(name) {
                ParamGroup::Frozen => continue,
                ParamGroup::TokenProjection => cfg.lr_proj,
                ParamGroup::Head => cfg.lr_head,
            } * lr_scale;
            let decay = if is_weight_matrix(name) { cfg.weight_decay } else { 0.0 };
            for i in 0..p.data.len() {
                let gi = g.data[i];
                let mi = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * gi;
                let vi = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * gi * gi;
                let step = (mi / bc1) / ((vi / bc2).sqrt() + cfg.eps) + decay * p.data[i];
                p.data[i] = (p.data[i] - lr * step) as f32 as f64;
                m.data[i] = mi as f32 as f64;
                v.data[i] = vi as f32 as f64;
            }
        }
    }
}

fn is_weight_matrix(name: &str) -> bool {
    name.ends_with(".w") || name.ends_with(".w1") || name.ends_with(".w2")
}
