use rand::seq::SliceRandom;

use super::{seed, Trajectory};
use crate::geometry::SE3Pose;
use crate::{Error, Result};

/// Magnitude of the relative pose between two cameras.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeMotion {
    pub rot_deg: f64,
    pub trans_m: f64,
}

pub fn relative_motion(a: &SE3Pose, b: &SE3Pose) -> RelativeMotion {
    RelativeMotion {
        rot_deg: a.rotation.angle_to(&b.rotation).to_degrees(),
        trans_m: (a.translation - b.translation).norm(),
    }
}

const ROT_BINS: usize = 4;
const TRANS_BINS: usize = 4;

/// Bin index of `v` against ascending interior edges.
fn bin(v: f64, edges: &[f64]) -> usize {
    edges.iter().take_while(|e| v >= **e).count()
}

fn quantile_edges(mut values: Vec<f64>, bins: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    (1..bins).map(|k| values[(k * values.len()) / bins]).collect()
}

/// Draws ordered frame pairs `(i, j)`, `i ≠ j`, stratified over relative
/// rotation × translation quartile buckets rather than time index.
///
/// Buckets are visited round-robin, each in a seeded random order, until
/// `n_pairs` pairs are drawn or every ordered pair has been used. Output is
/// sorted by `(i, j)`.
pub fn sample_pairs(trajectory: &Trajectory, seed: u64, n_pairs: usize) -> Result<Vec<(usize, usize)>> {
    let n = trajectory.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("trajectory has {n} frames, need at least 2")));
    }
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be >= 1".into()));
    }
    let poses = trajectory.poses();
    let mut all = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                all.push((i, j, relative_motion(&poses[i], &poses[j])));
            }
        }
    }
    let rot_edges = quantile_edges(all.iter().map(|p| p.2.rot_deg).collect(), ROT_BINS);
    let trans_edges = quantile_edges(all.iter().map(|p| p.2.trans_m).collect(), TRANS_BINS);
    let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::new(); ROT_BINS * TRANS_BINS];
    for (i, j, m) in &all {
        buckets[bin(m.rot_deg, &rot_edges) * TRANS_BINS + bin(m.trans_m, &trans_edges)].push((*i, *j));
    }
    let mut rng = seed::rng(seed, "pairs", n as u64);
    for b in buckets.iter_mut() {
        b.shuffle(&mut rng);
    }
    let target = n_pairs.min(all.len());
    let mut out = Vec::with_capacity(target);
    let mut cursor = 0;
    while out.len() < target {
        for b in &buckets {
            if out.len() == target {
                break;
            }
            if let Some(p) = b.get(cursor) {
                out.push(*p);
            }
        }
        cursor += 1;
    }
    out.sort_unstable();
    Ok(out)
}
