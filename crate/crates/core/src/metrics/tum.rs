//! TUM plain-text trajectories: `timestamp tx ty tz qx qy qz qw` per line,
//! `#` comments and blank lines ignored.

use std::io::{BufRead, Write};

use nalgebra::Vector3;

use crate::geometry::SE3Pose;
use crate::numfmt::g17;
use crate::oracle::Trajectory;
use crate::{Error, Result};

/// Parses a trajectory. Rows may appear in any order; duplicate timestamps
/// are rejected.
pub fn read_tum<R: BufRead>(input: R) -> Result<Trajectory> {
    let mut rows: Vec<(f64, SE3Pose)> = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let bad = |why: &str| Error::format("TUM", format!("line {}: {why}", k + 1));
        let v: Vec<f64> = body
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad(&format!("not a number: {t:?}"))))
            .collect::<Result<_>>()?;
        if v.len() != 8 {
            return Err(bad(&format!("expected 8 fields, found {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(bad("non-finite value"));
        }
        let pose = SE3Pose::from_wxyz(v[7], v[4], v[5], v[6], Vector3::new(v[1], v[2], v[3]))
            .ok_or_else(|| bad("zero quaternion"))?;
        rows.push((v[0], pose));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::format("TUM", format!("duplicate timestamp {}", w[0].0)));
    }
    let (stamps, poses) = rows.into_iter().unzip();
    Trajectory::new(stamps, poses)
}

pub fn write_tum<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    writeln!(out, "# timestamp tx ty tz qx qy qz qw")?;
    for (t, p) in traj.iter() {
        let q = p.rotation.quaternion();
        let vals = [t, p.translation.x, p.translation.y, p.translation.z, q.i, q.j, q.k, q.w];
        let line: Vec<String> = vals.iter().map(|v| g17(*v)).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    Ok(())
}
