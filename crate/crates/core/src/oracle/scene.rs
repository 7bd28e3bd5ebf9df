use nalgebra::Vector3;
use rand::Rng;

use super::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    /// Side length of the square room, meters.
    pub extent: f64,
    /// Height-field cells per side.
    pub grid: usize,
    pub wall_height: f64,
    /// Amplitude of the smooth floor relief, meters.
    pub relief: f64,
    pub n_obstacles: usize,
    /// Cells per side of each surface's albedo texture.
    pub texture_cells: usize,
    /// Fraction of texture cells that are dark (albedo below 0.25, so
    /// `Q = 1 + 2·albedo` falls under the default quality threshold).
    pub dark_fraction: f64,
    /// Zero elevation everywhere, no obstacles.
    pub flat: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            extent: 4.0,
            grid: 48,
            wall_height: 2.5,
            relief: 0.08,
            n_obstacles: 6,
            texture_cells: 12,
            dark_fraction: 0.0,
            flat: false,
        }
    }
}

/// Surfaces a ray can hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    Floor,
    /// Walls in order `x = -L/2`, `x = +L/2`, `y = -L/2`, `y = +L/2`.
    Wall(u8),
}

/// Square room: a height-field floor with box obstacles, four vertical walls
/// and per-surface albedo textures.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub seed: u64,
    pub config: SceneConfig,
    /// `(grid + 1)²` vertex elevations, row-major over y then x.
    elevation: Vec<f64>,
    /// Five `texture_cells²` albedo grids: floor then the four walls.
    albedo: Vec<Vec<f64>>,
}

pub fn generate_scene(seed: u64, config: &SceneConfig) -> SyntheticScene {
    let n = config.grid;
    let half = config.extent / 2.0;
    let cell = config.extent / n as f64;
    let mut elevation = vec![0.0; (n + 1) * (n + 1)];
    let mut rng = seed::rng(seed, "scene", 0);

    // Relief and obstacle draws happen even in flat mode so that the texture
    // stream is identical across the two modes.
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.3..1.0),
            )
        })
        .collect();
    let boxes: Vec<(f64, f64, f64, f64, f64)> = (0..config.n_obstacles)
        .map(|_| {
            let cx = rng.gen_range(-half * 0.8..half * 0.8);
            let cy = rng.gen_range(-half * 0.8..half * 0.8);
            let sx = rng.gen_range(0.15..0.5);
            let sy = rng.gen_range(0.15..0.5);
            let hz = rng.gen_range(0.25..0.8);
            (cx, cy, sx, sy, hz)
        })
        .collect();
    if !config.flat {
        for r in 0..=n {
            for c in 0..=n {
                let x = -half + c as f64 * cell;
                let y = -half + r as f64 * cell;
                let mut z: f64 = waves
                    .iter()
                    .map(|(fx, fy, ph, a)| a * (fx * x + ph).sin() * (fy * y + 0.5 * ph).cos())
                    .sum::<f64>()
                    * config.relief
                    / 3.0;
                for (cx, cy, sx, sy, hz) in &boxes {
                    if (x - cx).abs() <= *sx && (y - cy).abs() <= *sy {
                        z = z.max(*hz);
                    }
                }
                elevation[r * (n + 1) + c] = z;
            }
        }
    }

    let t = config.texture_cells.max(1);
    let albedo = (0..5)
        .map(|_| {
            (0..t * t)
                .map(|_| {
                    if rng.gen_bool(config.dark_fraction.clamp(0.0, 1.0)) {
                        rng.gen_range(0.02..0.2)
                    } else {
                        rng.gen_range(0.3..1.0)
                    }
                })
                .collect()
        })
        .collect();
    SyntheticScene { seed, config: config.clone(), elevation, albedo }
}

impl SyntheticScene {
    pub fn half_extent(&self) -> f64 {
        self.config.extent / 2.0
    }

    pub fn elevation_grid(&self) -> &[f64] {
        &self.elevation
    }

    fn cell(&self) -> f64 {
        self.config.extent / self.config.grid as f64
    }

    /// Grid coordinates of `(x, y)` clamped to the floor footprint.
    fn grid_coords(&self, x: f64, y: f64) -> (usize, usize, f64, f64) {
        let n = self.config.grid;
        let gx = ((x + self.half_extent()) / self.cell()).clamp(0.0, n as f64);
        let gy = ((y + self.half_extent()) / self.cell()).clamp(0.0, n as f64);
        let c = (gx.floor() as usize).min(n - 1);
        let r = (gy.floor() as usize).min(n - 1);
        (r, c, gx - c as f64, gy - r as f64)
    }

    /// Bilinear floor elevation.
    pub fn height(&self, x: f64, y: f64) -> f64 {
        let (r, c, u, v) = self.grid_coords(x, y);
        let w = self.config.grid + 1;
        let z00 = self.elevation[r * w + c];
        let z01 = self.elevation[r * w + c + 1];
        let z10 = self.elevation[(r + 1) * w + c];
        let z11 = self.elevation[(r + 1) * w + c + 1];
        (1.0 - v) * ((1.0 - u) * z00 + u * z01) + v * ((1.0 - u) * z10 + u * z11)
    }

    /// Upward unit normal of the bilinear patch at `(x, y)`.
    pub fn floor_normal(&self, x: f64, y: f64) -> Vector3<f64> {
        let (r, c, u, v) = self.grid_coords(x, y);
        let w = self.config.grid + 1;
        let z00 = self.elevation[r * w + c];
        let z01 = self.elevation[r * w + c + 1];
        let z10 = self.elevation[(r + 1) * w + c];
        let z11 = self.elevation[(r + 1) * w + c + 1];
        let cell = self.cell();
        let dzdx = ((1.0 - v) * (z01 - z00) + v * (z11 - z10)) / cell;
        let dzdy = ((1.0 - u) * (z10 - z00) + u * (z11 - z01)) / cell;
        Vector3::new(-dzdx, -dzdy, 1.0).normalize()
    }

    /// Albedo in `[0, 1]` at a surface point.
    pub fn albedo(&self, surface: Surface, p: &Vector3<f64>) -> f64 {
        let half = self.half_extent();
        let (idx, u, v) = match surface {
            Surface::Floor => (0, (p.x + half) / self.config.extent, (p.y + half) / self.config.extent),
            Surface::Wall(k) => {
                let along = if k < 2 { p.y } else { p.x };
                (1 + k as usize, (along + half) / self.config.extent, p.z / self.config.wall_height)
            }
        };
        let t = self.config.texture_cells.max(1);
        let cu = ((u * t as f64).floor().max(0.0) as usize).min(t - 1);
        let cv = ((v * t as f64).floor().max(0.0) as usize).min(t - 1);
        self.albedo[idx][cv * t + cu]
    }
}
