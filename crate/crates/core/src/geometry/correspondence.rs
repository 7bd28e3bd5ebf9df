use nalgebra::Vector3;

use super::{Pixel, PointMapFrame};
use crate::{Error, Result};

/// Upper bound on window re-centerings in [`correspondence_search`].
pub const MAX_RECENTERINGS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub target: Pixel,
    /// 3D distance `‖P_i(p) − P_j(q)‖` in meters.
    pub residual: f64,
}

/// Pixel map `m_{i→j}` from a source frame into a target frame of the same
/// resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceMap {
    height: usize,
    width: usize,
    matches: Vec<Option<Match>>,
}

impl CorrespondenceMap {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Match for the source pixel at row-major `index`.
    pub fn get(&self, index: usize) -> Option<&Match> {
        self.matches[index].as_ref()
    }

    pub fn matches(&self) -> &[Option<Match>] {
        &self.matches
    }

    pub fn n_matched(&self) -> usize {
        self.matches.iter().filter(|m| m.is_some()).count()
    }
}

#[inline]
fn dist2(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}

fn check_shapes(frame_i: &PointMapFrame, frame_j: &PointMapFrame) -> Result<()> {
    if !frame_i.same_shape(frame_j) {
        return Err(Error::IncompatibleFrames(format!(
            "{}x{} vs {}x{}",
            frame_i.height(),
            frame_i.width(),
            frame_j.height(),
            frame_j.width()
        )));
    }
    Ok(())
}

/// Best valid target pixel inside the `(2r+1)²` window around `center`.
/// Ties resolve to the first candidate in row-major order.
fn scan_window(query: &Vector3<f64>, target: &PointMapFrame, center: Pixel, radius: usize) -> Option<(usize, f64)> {
    let r0 = center.row.saturating_sub(radius);
    let r1 = (center.row + radius).min(target.height() - 1);
    let c0 = center.col.saturating_sub(radius);
    let c1 = (center.col + radius).min(target.width() - 1);
    let points = target.points();
    let mut best: Option<(usize, f64)> = None;
    for r in r0..=r1 {
        let row = r * target.width();
        for c in c0..=c1 {
            let idx = row + c;
            if !target.is_valid(idx) {
                continue;
            }
            let d = dist2(query, &points[idx]);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((idx, d));
            }
        }
    }
    best
}

/// Windowed iterative nearest-point search.
///
/// For every valid source pixel `p` the window starts at `p`'s own coordinate
/// in the target grid and is re-centered on the best candidate until the
/// center is a fixed point or [`MAX_RECENTERINGS`] re-centerings happened.
/// A source pixel whose first window contains no valid target stays unmatched.
pub fn correspondence_search(
    frame_i: &PointMapFrame,
    frame_j: &PointMapFrame,
    window: usize,
) -> Result<CorrespondenceMap> {
    check_shapes(frame_i, frame_j)?;
    let mut matches = vec![None; frame_i.len()];
    if frame_j.n_valid() == 0 {
        return Ok(CorrespondenceMap { height: frame_i.height(), width: frame_i.width(), matches });
    }
    let src = frame_i.points();
    for (idx, slot) in matches.iter_mut().enumerate() {
        if !frame_i.is_valid(idx) {
            continue;
        }
        let query = &src[idx];
        let mut center = frame_i.pixel(idx);
        let mut best = None;
        for _ in 0..=MAX_RECENTERINGS {
            let Some((cand, d)) = scan_window(query, frame_j, center, window) else {
                break;
            };
            best = Some((cand, d));
            let cand_px = frame_j.pixel(cand);
            if cand_px == center {
                break;
            }
            center = cand_px;
        }
        *slot = best.map(|(t, d)| Match { target: frame_j.pixel(t), residual: d.sqrt() });
    }
    Ok(CorrespondenceMap { height: frame_i.height(), width: frame_i.width(), matches })
}

/// Exact global nearest neighbour in 3D over all valid target pixels, with
/// the same row-major tie-break as [`correspondence_search`].
pub fn brute_force_nn(frame_i: &PointMapFrame, frame_j: &PointMapFrame) -> Result<CorrespondenceMap> {
    check_shapes(frame_i, frame_j)?;
    let tgt = frame_j.points();
    let matches = frame_i
        .points()
        .iter()
        .enumerate()
        .map(|(idx, query)| {
            if !frame_i.is_valid(idx) {
                return None;
            }
            let mut best: Option<(usize, f64)> = None;
            for (t, p) in tgt.iter().enumerate() {
                if !frame_j.is_valid(t) {
                    continue;
                }
                let d = dist2(query, p);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((t, d));
                }
            }
            best.map(|(t, d)| Match { target: frame_j.pixel(t), residual: d.sqrt() })
        })
        .collect();
    Ok(CorrespondenceMap { height: frame_i.height(), width: frame_i.width(), matches })
}
