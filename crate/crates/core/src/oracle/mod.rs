//! Synthetic stand-in for a scanned-scene dataset and a dense teacher:
//! scenes, camera paths, ray-cast pointmaps, pose-stratified pair sampling
//! and `τ_gt = 1 − S` labels.

mod dataset;
mod label;
mod pairs;
mod render;
mod scene;
pub mod seed;
mod trajectory;

pub use dataset::{
    build_dataset, read_descriptors, read_labels, render_sequence, split_by_scene, write_descriptors, write_labels,
    Dataset, DatasetConfig, LabelRow, Sequence, LABELS_HEADER,
};
pub use label::{align_to_reference, label_pair, LabelConfig, LabeledPair};
pub use pairs::{relative_motion, sample_pairs, RelativeMotion};
pub use render::{render_frame, CameraModel, FrameConvention, RenderConfig};
pub use scene::{generate_scene, SceneConfig, Surface, SyntheticScene};
pub use trajectory::{generate_trajectory, look_pose, Trajectory, TrajectoryConfig};
