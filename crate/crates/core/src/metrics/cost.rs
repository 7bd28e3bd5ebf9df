//! Linear compute accounting for gated runs.
//!
//! Per-frame constants are in TFLOPs. Frame selection costs `c_gate` for
//! every incoming frame under the student gate. Every frame forwarded to
//! SLAM costs `c_track + c_backend`. The teacher gate runs the tracker on
//! every frame (it needs the pointmap to score) and the backend on kept
//! frames only.

use crate::policy::{GateDecision, PolicyKind};
use crate::{Error, Result};

/// Share of per-frame SLAM compute attributed to the tracker when a
/// calibration has to split `c_track + c_backend`. Only the teacher gate's
/// accounting depends on it.
pub const DEFAULT_TRACK_SHARE: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub c_gate: f64,
    pub c_track: f64,
    pub c_backend: f64,
}

impl CostModel {
    pub fn new(c_gate: f64, c_track: f64, c_backend: f64) -> Result<Self> {
        if [c_gate, c_track, c_backend].iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidArgument("cost constants must be finite and >= 0".into()));
        }
        Ok(Self { c_gate, c_track, c_backend })
    }

    pub fn zero() -> Self {
        Self { c_gate: 0.0, c_track: 0.0, c_backend: 0.0 }
    }

    pub fn slam_per_frame(&self) -> f64 {
        self.c_track + self.c_backend
    }
}

/// Frame Select / SLAM / Total, TFLOPs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub gate_tflops: f64,
    pub slam_tflops: f64,
    pub total_tflops: f64,
}

pub fn account_cost(decisions: &[GateDecision], model: &CostModel) -> CostReport {
    let n_all = decisions.len() as f64;
    let n_kept = decisions.iter().filter(|d| d.kept).count() as f64;
    let policy = decisions.first().map(|d| d.policy);
    let (gate, slam) = match policy {
        Some(PolicyKind::StudentGate) => (n_all * model.c_gate, n_kept * model.slam_per_frame()),
        Some(PolicyKind::TeacherGate) => (0.0, n_all * model.c_track + n_kept * model.c_backend),
        _ => (0.0, n_kept * model.slam_per_frame()),
    };
    CostReport { gate_tflops: gate, slam_tflops: slam, total_tflops: gate + slam }
}

/// One dataset row of published compute figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    /// Dense baseline SLAM total.
    pub dense_total: f64,
    /// Gated run, frame-selection column.
    pub gate: f64,
    /// Gated run, SLAM column.
    pub slam: f64,
    /// Gated run, all frames over kept frames.
    pub downsample: f64,
}

/// TUM RGB-D row.
pub const TUM_ROW: TableRow = TableRow { dense_total: 6698.55, gate: 532.05, slam: 461.41, downsample: 15.58 };

/// Constants and frame counts reproducing a [`TableRow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub model: CostModel,
    /// Frames the dense baseline forwards to SLAM.
    pub n_dense: usize,
    /// Frames entering the gated run.
    pub n_all: usize,
    /// Frames the gated run forwards to SLAM.
    pub n_kept: usize,
}

/// Back-solves per-frame constants from a table row.
///
/// A single per-frame SLAM constant `c` must satisfy both
/// `n_dense · c = dense_total` and `n_kept · c = slam`, so the frame counts
/// must have ratio `dense_total / slam`. The smallest `n_kept` whose
/// rounded `n_dense` reproduces `dense_total` within `tol` is chosen; the
/// gated run then has `n_all = round(downsample · n_kept)` frames and
/// `c_gate = gate / n_all`.
pub fn calibrate(row: &TableRow, track_share: f64, tol: f64) -> Result<Calibration> {
    if !(row.dense_total > 0.0 && row.slam > 0.0 && row.gate >= 0.0 && row.downsample >= 1.0) {
        return Err(Error::InvalidArgument("table row must have positive totals and downsample >= 1".into()));
    }
    if !(0.0..=1.0).contains(&track_share) {
        return Err(Error::InvalidArgument("track_share must lie in [0, 1]".into()));
    }
    let ratio = row.dense_total / row.slam;
    for n_kept in 1..=1_000_000usize {
        let n_dense = (ratio * n_kept as f64).round() as usize;
        let c = row.slam / n_kept as f64;
        if (n_dense as f64 * c - row.dense_total).abs() <= tol {
            let n_all = (row.downsample * n_kept as f64).round() as usize;
            let model = CostModel::new(row.gate / n_all as f64, c * track_share, c * (1.0 - track_share))?;
            return Ok(Calibration { model, n_dense, n_all, n_kept });
        }
    }
    Err(Error::InvalidArgument(format!("no frame counts reproduce the row within {tol}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decisions(kind: PolicyKind, kept: &[bool]) -> Vec<GateDecision> {
        kept.iter()
            .enumerate()
            .map(|(f, &k)| GateDecision { frame: f, policy: kind, reference: None, score: None, kept: k })
            .collect()
    }

    fn pattern(n: usize, n_kept: usize) -> Vec<bool> {
        // Kept frames floor(i·n / n_kept), evenly spread and starting at 0.
        let mut k = vec![false; n];
        for i in 0..n_kept {
            k[i * n / n_kept] = true;
        }
        k
    }

    #[test]
    fn zero_model_gives_zero() {
        let d = decisions(PolicyKind::StudentGate, &[true, false, true]);
        let r = account_cost(&d, &CostModel::zero());
        assert_eq!((r.gate_tflops, r.slam_tflops, r.total_tflops), (0.0, 0.0, 0.0));
    }

    #[test]
    fn dense_and_stride_have_no_gate_cost() {
        let m = CostModel::new(1.0, 2.0, 3.0).unwrap();
        let r = account_cost(&decisions(PolicyKind::Dense, &[true; 4]), &m);
        assert_eq!((r.gate_tflops, r.slam_tflops), (0.0, 20.0));
        let r = account_cost(&decisions(PolicyKind::Stride(2), &[true, false, true, false]), &m);
        assert_eq!((r.gate_tflops, r.slam_tflops), (0.0, 10.0));
        let r = account_cost(&decisions(PolicyKind::TeacherGate, &[true, false, false, true]), &m);
        assert_eq!(r.slam_tflops, 4.0 * 2.0 + 2.0 * 3.0);
    }

    #[test]
    fn linear_in_constants() {
        let d = decisions(PolicyKind::StudentGate, &[true, false, false, true, true]);
        let m = CostModel::new(0.3, 1.7, 0.9).unwrap();
        let m2 = CostModel::new(0.6, 3.4, 1.8).unwrap();
        let (a, b) = (account_cost(&d, &m), account_cost(&d, &m2));
        assert_eq!(b.gate_tflops, 2.0 * a.gate_tflops);
        assert_eq!(b.slam_tflops, 2.0 * a.slam_tflops);
        assert_eq!(b.total_tflops, 2.0 * a.total_tflops);
        assert_eq!(a.total_tflops, a.gate_tflops + a.slam_tflops);
    }

    #[test]
    fn tum_calibration_reproduces_table() {
        let cal = calibrate(&TUM_ROW, DEFAULT_TRACK_SHARE, 0.005).unwrap();
        let dense = account_cost(&decisions(PolicyKind::Dense, &vec![true; cal.n_dense]), &cal.model);
        let gated = account_cost(&decisions(PolicyKind::StudentGate, &pattern(cal.n_all, cal.n_kept)), &cal.model);
        assert_eq!(gated_kept(&pattern(cal.n_all, cal.n_kept)), cal.n_kept);
        assert!((dense.total_tflops - 6698.55).abs() <= 0.01, "{dense:?}");
        assert!((gated.gate_tflops - 532.05).abs() <= 0.01);
        assert!((gated.slam_tflops - 461.41).abs() <= 0.01);
        assert!((gated.total_tflops - 993.46).abs() <= 0.01);
        assert!(1.0 - gated.total_tflops / dense.total_tflops >= 0.85);
        assert!((cal.n_all as f64 / cal.n_kept as f64 - 15.58).abs() < 0.01);
    }

    fn gated_kept(k: &[bool]) -> usize {
        k.iter().filter(|x| **x).count()
    }

    #[test]
    fn calibration_rejects_bad_rows() {
        assert!(calibrate(&TableRow { dense_total: 0.0, ..TUM_ROW }, 0.5, 0.01).is_err());
        assert!(calibrate(&TUM_ROW, 1.5, 0.01).is_err());
    }
}
