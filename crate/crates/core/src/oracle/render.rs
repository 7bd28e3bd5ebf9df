use nalgebra::Vector3;

use super::{Surface, SyntheticScene};
use crate::geometry::{PointMapFrame, SE3Pose};
use crate::{Error, Result};

/// Coordinate frame in which rendered pointmaps are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameConvention {
    /// The rendering camera's own frame (x right, y down, z forward).
    Camera,
    /// Scene (world) coordinates.
    World,
}

/// Ideal pinhole camera with square pixels and centered principal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub height: usize,
    pub width: usize,
    pub hfov_deg: f64,
}

impl CameraModel {
    pub fn focal(&self) -> f64 {
        (self.width as f64 / 2.0) / (self.hfov_deg.to_radians() / 2.0).tan()
    }

    /// Unit ray through the center of pixel `(row, col)` in camera coordinates.
    pub fn ray(&self, row: usize, col: usize) -> Vector3<f64> {
        let f = self.focal();
        let x = (col as f64 + 0.5 - self.width as f64 / 2.0) / f;
        let y = (row as f64 + 0.5 - self.height as f64 / 2.0) / f;
        Vector3::new(x, y, 1.0).normalize()
    }

    /// Pixel (row, col) hit by a camera-frame point, if in front and inside.
    pub fn project(&self, p: &Vector3<f64>) -> Option<(usize, usize)> {
        if p.z <= 0.0 {
            return None;
        }
        let f = self.focal();
        let u = f * p.x / p.z + self.width as f64 / 2.0;
        let v = f * p.y / p.z + self.height as f64 / 2.0;
        if u < 0.0 || v < 0.0 || u >= self.width as f64 || v >= self.height as f64 {
            return None;
        }
        Some((v as usize, u as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub camera: CameraModel,
    pub convention: FrameConvention,
    /// Ray-march step as a fraction of a height-field cell.
    pub march_fraction: f64,
    /// Rays travelling further than this escape, meters.
    pub max_range: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            camera: CameraModel { height: 32, width: 32, hfov_deg: 60.0 },
            convention: FrameConvention::Camera,
            march_fraction: 0.3,
            max_range: 20.0,
        }
    }
}

impl RenderConfig {
    pub fn with_resolution(height: usize, width: usize) -> Self {
        let mut c = Self::default();
        c.camera.height = height;
        c.camera.width = width;
        c
    }
}

struct Hit {
    point: Vector3<f64>,
    normal: Vector3<f64>,
    surface: Surface,
}

fn cast(scene: &SyntheticScene, origin: &Vector3<f64>, dir: &Vector3<f64>, cfg: &RenderConfig) -> Option<Hit> {
    let half = scene.half_extent();
    let wall_h = scene.config.wall_height;

    // Nearest inner wall face along the ray.
    let mut wall: Option<(f64, u8)> = None;
    for (k, axis, plane) in [(0u8, 0usize, -half), (1, 0, half), (2, 1, -half), (3, 1, half)] {
        let d = dir[axis];
        if d.abs() < 1e-12 {
            continue;
        }
        let t = (plane - origin[axis]) / d;
        if t > 1e-9 && wall.is_none_or(|(bt, _)| t < bt) {
            wall = Some((t, k));
        }
    }
    let t_end = wall.map_or(cfg.max_range, |(t, _)| t.min(cfg.max_range));

    // March the floor up to the wall distance, then bisect the crossing.
    let step = scene.config.extent / scene.config.grid as f64 * cfg.march_fraction;
    let above = |t: f64| {
        let p = origin + dir * t;
        p.z - scene.height(p.x, p.y)
    };
    if above(0.0) <= 0.0 {
        return None;
    }
    let mut t0 = 0.0;
    let mut floor_t = None;
    while t0 < t_end {
        let t1 = (t0 + step).min(t_end);
        if above(t1) <= 0.0 {
            let (mut lo, mut hi) = (t0, t1);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if above(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            floor_t = Some(0.5 * (lo + hi));
            break;
        }
        t0 = t1;
    }
    if let Some(t) = floor_t {
        let p = origin + dir * t;
        return Some(Hit { point: p, normal: scene.floor_normal(p.x, p.y), surface: Surface::Floor });
    }
    let (t, k) = wall?;
    if t > cfg.max_range {
        return None;
    }
    let p = origin + dir * t;
    if p.z > wall_h {
        return None;
    }
    let normal = match k {
        0 => Vector3::x(),
        1 => -Vector3::x(),
        2 => Vector3::y(),
        _ => -Vector3::y(),
    };
    Some(Hit { point: p, normal, surface: Surface::Wall(k) })
}

/// Ray-casts a dense pointmap frame from camera pose `pose` (camera-to-world).
///
/// `C` is the clamped cosine of the incidence angle and `Q = 1 + 2·albedo`.
/// Rays leaving the room over the walls are marked invalid.
pub fn render_frame(scene: &SyntheticScene, pose: &SE3Pose, id: usize, cfg: &RenderConfig) -> Result<PointMapFrame> {
    let cam = cfg.camera;
    if cam.height < 8 || cam.width < 8 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 8x8, got {}x{}",
            cam.height, cam.width
        )));
    }
    let n = cam.height * cam.width;
    let world_to_cam = pose.inverse();
    let mut points = Vec::with_capacity(n);
    let mut conf = Vec::with_capacity(n);
    let mut qual = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for r in 0..cam.height {
        for c in 0..cam.width {
            let dir = pose.rotation * cam.ray(r, c);
            match cast(scene, &pose.translation, &dir, cfg) {
                Some(hit) => {
                    let p = match cfg.convention {
                        FrameConvention::Camera => world_to_cam.apply(&hit.point),
                        FrameConvention::World => hit.point,
                    };
                    points.push(p);
                    conf.push(hit.normal.dot(&-dir).clamp(0.0, 1.0));
                    qual.push(1.0 + 2.0 * scene.albedo(hit.surface, &hit.point));
                    valid.push(true);
                }
                None => {
                    points.push(Vector3::zeros());
                    conf.push(0.0);
                    qual.push(0.0);
                    valid.push(false);
                }
            }
        }
    }
    PointMapFrame::new(id, cam.height, cam.width, points, conf, qual, valid)
}
