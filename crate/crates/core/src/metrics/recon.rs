//! Point-cloud reconstruction metrics.
//!
//! Accuracy is the mean distance from each predicted point to its nearest
//! reference point, completeness the reverse, and Chamfer-L1 their mean.
//! Precision at `d` counts predicted points strictly closer than `d` to the
//! reference; recall counts reference points strictly closer than `d` to the
//! prediction.

use nalgebra::Vector3;

use super::kdtree::KdTree;
use crate::exec::Execution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconReport {
    pub acc_m: f64,
    pub comp_m: f64,
    pub chamfer_m: f64,
    /// F-score at 2 cm.
    pub f2: f64,
    /// F-score at 5 cm.
    pub f5: f64,
}

/// Distance from every query to its nearest point in `target`.
pub fn nearest_distances(queries: &[Vector3<f64>], target: &[Vector3<f64>], exec: Execution) -> Vec<f64> {
    let tree = KdTree::build(target);
    exec.map(queries, |q| tree.nearest(q).map_or(f64::INFINITY, |(_, d)| d))
}

/// Harmonic mean of precision and recall at threshold `d`, given both
/// nearest-distance lists; 0 when both are 0.
pub fn f_score(pred_to_ref: &[f64], ref_to_pred: &[f64], d: f64) -> f64 {
    let frac = |v: &[f64]| v.iter().filter(|x| **x < d).count() as f64 / v.len() as f64;
    let (p, r) = (frac(pred_to_ref), frac(ref_to_pred));
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn recon_metrics(pred: &[Vector3<f64>], reference: &[Vector3<f64>], exec: Execution) -> Result<ReconReport> {
    if pred.is_empty() || reference.is_empty() {
        return Err(Error::Empty("reconstruction point set".into()));
    }
    let p2r = nearest_distances(pred, reference, exec);
    let r2p = nearest_distances(reference, pred, exec);
    let (acc_m, comp_m) = (mean(&p2r), mean(&r2p));
    Ok(ReconReport {
        acc_m,
        comp_m,
        chamfer_m: 0.5 * (acc_m + comp_m),
        f2: f_score(&p2r, &r2p, 0.02),
        f5: f_score(&p2r, &r2p, 0.05),
    })
}
