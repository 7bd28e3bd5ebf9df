//! Pose algebra, pointmap frames and pixel correspondences.

mod correspondence;
pub mod pmap;
mod pointmap;
mod pose;

pub use correspondence::{brute_force_nn, correspondence_search, CorrespondenceMap, MAX_RECENTERINGS};
pub use pointmap::{PointMapFrame, Pixel};
pub use pose::{SE3Pose, Sim3Transform};
