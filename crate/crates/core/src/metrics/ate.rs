//! Absolute trajectory error after closed-form alignment.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use crate::geometry::Sim3Transform;
use crate::oracle::Trajectory;
use crate::{Error, Result};

/// Timestamp association window, seconds.
pub const DEFAULT_MAX_DT: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignMode {
    /// Scale, rotation and translation.
    Sim3,
    /// Rotation and translation only.
    Se3,
    None,
}

impl std::str::FromStr for AlignMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim3" => Ok(AlignMode::Sim3),
            "se3" => Ok(AlignMode::Se3),
            "none" => Ok(AlignMode::None),
            _ => Err(Error::InvalidArgument(format!("unknown alignment {s:?} (sim3, se3, none)"))),
        }
    }
}

impl std::fmt::Display for AlignMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlignMode::Sim3 => "sim3",
            AlignMode::Se3 => "se3",
            AlignMode::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AteConfig {
    pub align: AlignMode,
    pub max_dt: f64,
}

impl Default for AteConfig {
    fn default() -> Self {
        Self { align: AlignMode::Sim3, max_dt: DEFAULT_MAX_DT }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AteReport {
    pub rmse_cm: f64,
    pub mean_cm: f64,
    pub max_cm: f64,
    pub n_matched: usize,
    /// Maps estimate positions onto ground truth.
    pub sim3: Sim3Transform,
}

/// One-to-one `(est, gt)` index pairs. Each estimate proposes its nearest
/// ground-truth stamp within `max_dt`; conflicts go to the smaller time gap,
/// then the earlier estimate. Output is sorted by estimate index.
pub fn associate(est: &Trajectory, gt: &Trajectory, max_dt: f64) -> Vec<(usize, usize)> {
    let gs = gt.stamps();
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &t) in est.stamps().iter().enumerate() {
        let k = gs.partition_point(|&g| g < t);
        let best = [k.checked_sub(1), (k < gs.len()).then_some(k)]
            .into_iter()
            .flatten()
            .min_by(|&a, &b| (gs[a] - t).abs().total_cmp(&(gs[b] - t).abs()).then(a.cmp(&b)));
        if let Some(j) = best {
            let dt = (gs[j] - t).abs();
            if dt <= max_dt {
                cand.push((dt, i, j));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut used = vec![false; gs.len()];
    let mut out = Vec::new();
    for (_, i, j) in cand {
        if !used[j] {
            used[j] = true;
            out.push((i, j));
        }
    }
    out.sort_unstable();
    out
}

/// Least-squares transform `dst ≈ s·R·src + t` (Umeyama). With
/// `with_scale = false` the scale is fixed to 1.
pub fn umeyama(src: &[Vector3<f64>], dst: &[Vector3<f64>], with_scale: bool) -> Result<Sim3Transform> {
    let n = src.len();
    if dst.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: dst.len() });
    }
    if n < 3 {
        return Err(Error::InsufficientOverlap(n));
    }
    let nf = n as f64;
    let mu_s = src.iter().sum::<Vector3<f64>>() / nf;
    let mu_d = dst.iter().sum::<Vector3<f64>>() / nf;
    let mut cov = Matrix3::zeros();
    let mut var_s = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let (a, b) = (s - mu_s, d - mu_d);
        cov += b * a.transpose();
        var_s += a.norm_squared();
    }
    cov /= nf;
    var_s /= nf;
    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested Vᵀ"));
    let sv = svd.singular_values;
    debug_assert!(sv[0] >= sv[1] && sv[1] >= sv[2]);
    // Rank < 2 leaves the rotation about the dominant axis undetermined.
    if !(var_s > 0.0) || !(sv[1] > 1e-12 * sv[0].max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateGeometry("matched positions are collinear or coincident".into()));
    }
    let mut sign = Vector3::new(1.0, 1.0, 1.0);
    if (u.determinant() * v_t.determinant()) < 0.0 {
        sign[2] = -1.0;
    }
    let r = u * Matrix3::from_diagonal(&sign) * v_t;
    let scale = if with_scale { sv.component_mul(&sign).sum() / var_s } else { 1.0 };
    if !(scale > 0.0) {
        return Err(Error::DegenerateGeometry(format!("non-positive scale {scale}")));
    }
    let rotation = UnitQuaternion::from_matrix(&r);
    let t = mu_d - scale * (rotation * mu_s);
    Ok(Sim3Transform::new(scale, rotation, t))
}

/// Position error of `est` against `gt` in centimetres.
pub fn ate(est: &Trajectory, gt: &Trajectory, cfg: &AteConfig) -> Result<AteReport> {
    let pairs = associate(est, gt, cfg.max_dt);
    let src: Vec<Vector3<f64>> = pairs.iter().map(|&(i, _)| est.poses()[i].translation).collect();
    let dst: Vec<Vector3<f64>> = pairs.iter().map(|&(_, j)| gt.poses()[j].translation).collect();
    let sim3 = match cfg.align {
        AlignMode::Sim3 => umeyama(&src, &dst, true)?,
        AlignMode::Se3 => umeyama(&src, &dst, false)?,
        AlignMode::None => {
            if pairs.is_empty() {
                return Err(Error::InsufficientOverlap(0));
            }
            Sim3Transform::identity()
        }
    };
    let errs: Vec<f64> = src.iter().zip(&dst).map(|(s, d)| (sim3.apply(s) - d).norm() * 100.0).collect();
    let n = errs.len() as f64;
    Ok(AteReport {
        rmse_cm: (errs.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
        mean_cm: errs.iter().sum::<f64>() / n,
        max_cm: errs.iter().copied().fold(0.0, f64::max),
        n_matched: errs.len(),
        sim3,
    })
}
