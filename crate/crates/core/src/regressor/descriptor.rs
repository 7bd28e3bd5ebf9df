//! Compact per-frame token fed to the regressor.
//!
//! The pixel grid is split into `g × g` blocks; each block contributes the
//! confidence-weighted mean point `(x, y, z)`. Five summary statistics over
//! valid pixels follow: valid fraction, mean depth, depth standard
//! deviation, mean confidence and mean quality. With `g = 3` the token has
//! 32 entries.
//!
//! Tokens are computed on frames expressed in the reference camera's
//! coordinates, so the current frame's token encodes where its geometry
//! sits relative to the reference view.

use crate::geometry::PointMapFrame;

pub const N_STATS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DescriptorConfig {
    pub grid: usize,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        Self { grid: 3 }
    }
}

impl DescriptorConfig {
    pub fn dim(&self) -> usize {
        3 * self.grid * self.grid + N_STATS
    }

    /// Inverse of [`dim`](Self::dim), if `dim` is attainable.
    pub fn for_dim(dim: usize) -> Option<Self> {
        let g = (1..=64).find(|g| 3 * g * g + N_STATS >= dim)?;
        (Self { grid: g }.dim() == dim).then_some(Self { grid: g })
    }
}

/// Half-open source range covered by block `k` of `blocks` over `n` pixels.
/// Every block covers at least one pixel, even when `n < blocks`.
fn block_range(k: usize, blocks: usize, n: usize) -> (usize, usize) {
    let lo = (k * n / blocks).min(n - 1);
    let hi = ((k + 1) * n / blocks).max(lo + 1).min(n);
    (lo, hi)
}

pub fn extract_descriptor(frame: &PointMapFrame, cfg: &DescriptorConfig) -> Vec<f64> {
    let g = cfg.grid;
    let (h, w) = (frame.height(), frame.width());
    let pts = frame.points();
    let conf = frame.confidence();
    let mut out = Vec::with_capacity(cfg.dim());
    for br in 0..g {
        let (r0, r1) = block_range(br, g, h);
        for bc in 0..g {
            let (c0, c1) = block_range(bc, g, w);
            let mut acc = [0.0f64; 3];
            let mut wsum = 0.0;
            for r in r0..r1 {
                for c in c0..c1 {
                    let i = r * w + c;
                    if frame.is_valid(i) {
                        let wt = conf[i];
                        acc[0] += wt * pts[i].x;
                        acc[1] += wt * pts[i].y;
                        acc[2] += wt * pts[i].z;
                        wsum += wt;
                    }
                }
            }
            if wsum > 0.0 {
                out.extend(acc.iter().map(|a| a / wsum));
            } else {
                out.extend([0.0; 3]);
            }
        }
    }

    let n_valid = frame.n_valid();
    if n_valid == 0 {
        out.extend([0.0; N_STATS]);
        return out;
    }
    let nv = n_valid as f64;
    let valid = || (0..frame.len()).filter(|i| frame.is_valid(*i));
    let mean_z = valid().map(|i| pts[i].z).sum::<f64>() / nv;
    let var_z = valid().map(|i| (pts[i].z - mean_z).powi(2)).sum::<f64>() / nv;
    let mean_c = valid().map(|i| conf[i]).sum::<f64>() / nv;
    let mean_q = valid().map(|i| frame.quality()[i]).sum::<f64>() / nv;
    out.extend([nv / frame.len() as f64, mean_z, var_z.sqrt(), mean_c, mean_q]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn ramp(h: usize, w: usize) -> PointMapFrame {
        let pts = (0..h * w).map(|i| Vector3::new((i % w) as f64, (i / w) as f64, 1.0 + i as f64 * 0.01)).collect();
        PointMapFrame::from_points(0, h, w, pts, 0.8, 2.0).unwrap()
    }

    #[test]
    fn dimension() {
        assert_eq!(DescriptorConfig::default().dim(), 32);
        assert_eq!(extract_descriptor(&ramp(8, 8), &DescriptorConfig::default()).len(), 32);
        assert_eq!(extract_descriptor(&ramp(2, 3), &DescriptorConfig { grid: 4 }).len(), 53);
        assert_eq!(DescriptorConfig::for_dim(32), Some(DescriptorConfig { grid: 3 }));
        assert_eq!(DescriptorConfig::for_dim(53), Some(DescriptorConfig { grid: 4 }));
        assert_eq!(DescriptorConfig::for_dim(33), None);
    }

    #[test]
    fn all_invalid_is_zero() {
        let f = PointMapFrame::empty(0, 8, 8).unwrap();
        assert!(extract_descriptor(&f, &DescriptorConfig::default()).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn deterministic_and_rotation_sensitive() {
        let f = ramp(9, 9);
        let cfg = DescriptorConfig::default();
        let a = extract_descriptor(&f, &cfg);
        assert_eq!(a, extract_descriptor(&f, &cfg));
        let b = extract_descriptor(&f.rotated_90(), &cfg);
        let gap: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(gap > 0.0);
    }

    #[test]
    fn block_values_are_weighted_means() {
        // 3x3 frame with a 3x3 grid: every block is one pixel.
        let f = ramp(3, 3);
        let d = extract_descriptor(&f, &DescriptorConfig::default());
        for i in 0..9 {
            let p = f.points()[i];
            assert_eq!(&d[3 * i..3 * i + 3], &[p.x, p.y, p.z]);
        }
        assert_eq!(d[27], 1.0);
        assert!((d[28] - 1.04).abs() < 1e-12);
        assert!((d[30] - 0.8).abs() < 1e-12);
        assert_eq!(d[31], 2.0);
    }
}
