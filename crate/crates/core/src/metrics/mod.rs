//! Trajectory accuracy, reconstruction quality and compute accounting.

mod ate;
mod cost;
mod kdtree;
mod recon;
mod tum;

pub use ate::{associate, ate, umeyama, AlignMode, AteConfig, AteReport, DEFAULT_MAX_DT};
pub use cost::{account_cost, calibrate, Calibration, CostModel, CostReport, TableRow, DEFAULT_TRACK_SHARE, TUM_ROW};
pub use kdtree::{brute_force_nearest, KdTree};
pub use recon::{nearest_distances, recon_metrics, f_score, ReconReport};
pub use tum::{read_tum, write_tum};
