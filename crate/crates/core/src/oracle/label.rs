use super::{relative_motion, RelativeMotion};
use crate::geometry::{PointMapFrame, SE3Pose};
use crate::regressor::{extract_descriptor, DescriptorConfig};
use crate::utility::{score, UtilityBreakdown, ValidityThresholds, DEFAULT_WINDOW};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelConfig {
    pub thresholds: ValidityThresholds,
    pub window: usize,
    /// Express the current frame in the reference camera's coordinates using
    /// the ground-truth relative pose before matching. Disable only for the
    /// unaligned ablation.
    pub align: bool,
    pub descriptor: DescriptorConfig,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            thresholds: ValidityThresholds::default(),
            window: DEFAULT_WINDOW,
            align: true,
            descriptor: DescriptorConfig::default(),
        }
    }
}

/// One supervised example: current frame `i` scored against reference `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub frame_i: usize,
    pub frame_j: usize,
    pub motion: RelativeMotion,
    /// Token of the reference frame `j`.
    pub ref_token: Vec<f64>,
    /// Token of the current frame `i` in the reference camera's coordinates.
    pub cur_token: Vec<f64>,
    pub breakdown: UtilityBreakdown,
}

impl LabeledPair {
    pub fn tau_gt(&self) -> f64 {
        self.breakdown.tau_gt
    }
}

/// Re-expresses `frame_i`, rendered in camera coordinates of `pose_i`, in
/// the camera coordinates of `pose_j`.
pub fn align_to_reference(frame_i: &PointMapFrame, pose_i: &SE3Pose, pose_j: &SE3Pose) -> PointMapFrame {
    frame_i.transformed(&pose_j.inverse().compose(pose_i))
}

/// Scores the pair and packages tokens plus `τ_gt = 1 − S`.
///
/// Frames are expected in their own camera coordinates.
pub fn label_pair(
    frame_i: &PointMapFrame,
    pose_i: &SE3Pose,
    frame_j: &PointMapFrame,
    pose_j: &SE3Pose,
    cfg: &LabelConfig,
) -> Result<LabeledPair> {
    let cur = if cfg.align { align_to_reference(frame_i, pose_i, pose_j) } else { frame_i.clone() };
    let breakdown = score(&cur, frame_j, &cfg.thresholds, cfg.window)?;
    Ok(LabeledPair {
        frame_i: frame_i.id,
        frame_j: frame_j.id,
        motion: relative_motion(pose_i, pose_j),
        ref_token: extract_descriptor(frame_j, &cfg.descriptor),
        cur_token: extract_descriptor(&cur, &cfg.descriptor),
        breakdown,
    })
}
