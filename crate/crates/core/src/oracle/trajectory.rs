use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use super::{seed, SyntheticScene};
use crate::geometry::SE3Pose;
use crate::{Error, Result};

/// Timestamped camera-to-world poses with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    stamps: Vec<f64>,
    poses: Vec<SE3Pose>,
}

impl Trajectory {
    pub fn new(stamps: Vec<f64>, poses: Vec<SE3Pose>) -> Result<Self> {
        if stamps.len() != poses.len() {
            return Err(Error::InvalidArgument(format!(
                "{} timestamps for {} poses",
                stamps.len(),
                poses.len()
            )));
        }
        if let Some(w) = stamps.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!(
                "timestamps must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { stamps, poses })
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn stamps(&self) -> &[f64] {
        &self.stamps
    }

    pub fn poses(&self) -> &[SE3Pose] {
        &self.poses
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &SE3Pose)> {
        self.stamps.iter().copied().zip(&self.poses)
    }

    pub fn positions(&self) -> Vec<Vector3<f64>> {
        self.poses.iter().map(|p| p.translation).collect()
    }

    /// Keeps the entries at `indices` (ascending).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.stamps[i]).collect(),
            indices.iter().map(|&i| self.poses[i]).collect(),
        )
    }
}

/// Camera-to-world pose for a camera at `position` looking along yaw/pitch
/// (radians, pitch negative looks down) with an extra roll about the optical
/// axis. Camera axes: x right, y down, z forward.
pub fn look_pose(position: Vector3<f64>, yaw: f64, pitch: f64, roll: f64) -> SE3Pose {
    let forward = Vector3::new(pitch.cos() * yaw.cos(), pitch.cos() * yaw.sin(), pitch.sin());
    let right0 = Vector3::new(yaw.sin(), -yaw.cos(), 0.0);
    let down0 = forward.cross(&right0);
    let (s, c) = roll.sin_cos();
    let right = c * right0 + s * down0;
    let down = -s * right0 + c * down0;
    let r = Matrix3::from_columns(&[right, down, forward]);
    SE3Pose::from_rotation_matrix(&r, position)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub n_frames: usize,
    pub fps: f64,
    /// Frames between consecutive spline control points.
    pub frames_per_segment: usize,
    /// Distance range between consecutive control points, meters.
    pub control_step: (f64, f64),
    /// Largest yaw change between control points, degrees.
    pub max_yaw_step_deg: f64,
    pub pitch_range_deg: (f64, f64),
    pub height_range: (f64, f64),
    /// Keep-out margin from the walls, meters.
    pub margin: f64,
    pub position_jitter: f64,
    pub angle_jitter_deg: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            n_frames: 60,
            fps: 12.0,
            frames_per_segment: 12,
            control_step: (0.4, 1.2),
            max_yaw_step_deg: 70.0,
            pitch_range_deg: (-55.0, -20.0),
            height_range: (1.1, 1.7),
            margin: 0.8,
            position_jitter: 0.005,
            angle_jitter_deg: 0.3,
        }
    }
}

fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3)
}

/// Smooth seeded camera path inside the scene: Catmull-Rom interpolation of
/// random control poses plus small per-frame jitter.
pub fn generate_trajectory(scene: &SyntheticScene, seed: u64, config: &TrajectoryConfig) -> Result<Trajectory> {
    if config.n_frames < 2 {
        return Err(Error::InvalidArgument(format!("n_frames must be >= 2, got {}", config.n_frames)));
    }
    if !(config.fps > 0.0) {
        return Err(Error::InvalidArgument(format!("fps must be > 0, got {}", config.fps)));
    }
    let mut rng = seed::rng(seed, "trajectory", scene.seed);
    let fps_seg = config.frames_per_segment.max(1);
    let n_ctrl = (config.n_frames - 1).div_ceil(fps_seg) + 1;
    let lim = (scene.half_extent() - config.margin).max(0.1);

    // control values: x, y, z, yaw, pitch
    let mut ctrl: Vec<[f64; 5]> = Vec::with_capacity(n_ctrl);
    let mut pos = Vector3::new(rng.gen_range(-lim..lim), rng.gen_range(-lim..lim), 0.0);
    let mut yaw = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    for k in 0..n_ctrl {
        if k > 0 {
            let heading = rng.gen_range(0.0..std::f64::consts::TAU);
            let dist = rng.gen_range(config.control_step.0..config.control_step.1);
            pos.x = (pos.x + dist * heading.cos()).clamp(-lim, lim);
            pos.y = (pos.y + dist * heading.sin()).clamp(-lim, lim);
            let dy = config.max_yaw_step_deg.to_radians();
            yaw += rng.gen_range(-dy..dy);
        }
        let z = rng.gen_range(config.height_range.0..config.height_range.1);
        let pitch = rng.gen_range(config.pitch_range_deg.0..config.pitch_range_deg.1).to_radians();
        ctrl.push([pos.x, pos.y, z, yaw, pitch]);
    }

    let span = (n_ctrl - 1) as f64;
    let mut stamps = Vec::with_capacity(config.n_frames);
    let mut poses = Vec::with_capacity(config.n_frames);
    let jit_a = config.angle_jitter_deg.to_radians();
    for f in 0..config.n_frames {
        let s = span * f as f64 / (config.n_frames - 1) as f64;
        let seg = (s.floor() as usize).min(n_ctrl - 2);
        let t = s - seg as f64;
        let at = |k: isize| ctrl[k.clamp(0, n_ctrl as isize - 1) as usize];
        let (c0, c1, c2, c3) = (at(seg as isize - 1), at(seg as isize), at(seg as isize + 1), at(seg as isize + 2));
        let v: Vec<f64> = (0..5).map(|d| catmull_rom(c0[d], c1[d], c2[d], c3[d], t)).collect();
        let mut p = Vector3::new(v[0], v[1], v[2]);
        let jp = config.position_jitter;
        if jp > 0.0 {
            p += Vector3::new(rng.gen_range(-jp..jp), rng.gen_range(-jp..jp), rng.gen_range(-jp..jp));
        }
        let (jy, jpch, jr) = if jit_a > 0.0 {
            (rng.gen_range(-jit_a..jit_a), rng.gen_range(-jit_a..jit_a), rng.gen_range(-jit_a..jit_a))
        } else {
            (0.0, 0.0, 0.0)
        };
        stamps.push(f as f64 / config.fps);
        poses.push(look_pose(p, v[3] + jy, v[4] + jpch, jr));
    }
    Trajectory::new(stamps, poses)
}
