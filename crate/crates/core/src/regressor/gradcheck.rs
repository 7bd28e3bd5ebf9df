//! Finite-difference verification of [`GateRegressor::backward`].

use super::model::{GateRegressor, ParamGroup};
use super::train::{batch_loss, batch_loss_and_grad, Example};
use crate::exec::Execution;

/// Denominator floor for relative errors; gradients smaller than this are
/// effectively compared in absolute terms.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub n_params: usize,
}

/// Compares the analytic gradient of the mean Huber loss with central
/// differences `(L(θ+ε) − L(θ−ε)) / 2ε` for every trainable scalar.
pub fn grad_check(model: &GateRegressor, batch: &[Example], k_iters: usize, delta: f64, eps: f64) -> GradCheckReport {
    let (_, analytic) = batch_loss_and_grad(model, batch, k_iters, delta, Execution::Sequential);
    let mut probe = model.clone();
    let mut rep = GradCheckReport { max_rel_error: 0.0, max_abs_error: 0.0, n_params: 0 };
    for b in 0..analytic.blocks().len() {
        let (name, g) = analytic.blocks()[b];
        if GateRegressor::group(name) == ParamGroup::Frozen {
            continue;
        }
        for i in 0..g.len() {
            let orig = probe.blocks()[b].1.data[i];
            probe.blocks_mut()[b].1.data[i] = orig + eps;
            let lp = batch_loss(&probe, batch, k_iters, delta, Execution::Sequential);
            probe.blocks_mut()[b].1.data[i] = orig - eps;
            let lm = batch_loss(&probe, batch, k_iters, delta, Execution::Sequential);
            probe.blocks_mut()[b].1.data[i] = orig;
            let numeric = (lp - lm) / (2.0 * eps);
            let a = g.data[i];
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(REL_FLOOR);
            rep.max_abs_error = rep.max_abs_error.max(abs);
            rep.max_rel_error = rep.max_rel_error.max(rel);
            rep.n_params += 1;
        }
    }
    rep
}
