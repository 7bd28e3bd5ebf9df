//! The teacher's geometric utility score.
//!
//! A source pixel `p` of frame `i` counts as a reliable constraint when its
//! correspondence `q` in reference frame `j` satisfies, all strictly,
//!
//! ```text
//! ‖P_i(p) − P_j(q)‖ < τ_d,   min(C_i(p), C_j(q)) > τ_c,   sqrt(Q_i(p)·Q_j(q)) > τ_q
//! ```
//!
//! `f_m` is the fraction of `Ω_i` that passes, `f_u` the fraction of `Ω_j`
//! covered by distinct passing targets, and `S = min(f_m, f_u)`. An empty
//! `Ω` yields zero for the corresponding fraction.

use serde::{Deserialize, Serialize};

use crate::geometry::{correspondence_search, CorrespondenceMap, PointMapFrame};
use crate::numfmt::g17;
use crate::{Error, Result};

pub const DEFAULT_TAU_D: f64 = 0.1;
pub const DEFAULT_TAU_C: f64 = 0.0;
pub const DEFAULT_TAU_Q: f64 = 1.5;
pub const DEFAULT_OMEGA_K: f64 = 0.33;
/// Search radius (pixels) used when scoring frame pairs.
pub const DEFAULT_WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityThresholds {
    /// Maximum 3D residual, meters.
    pub tau_d: f64,
    pub tau_c: f64,
    pub tau_q: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        Self { tau_d: DEFAULT_TAU_D, tau_c: DEFAULT_TAU_C, tau_q: DEFAULT_TAU_Q }
    }
}

impl ValidityThresholds {
    pub fn new(tau_d: f64, tau_c: f64, tau_q: f64) -> Result<Self> {
        if !(tau_d > 0.0) || !tau_d.is_finite() {
            return Err(Error::InvalidArgument(format!("tau_d must be > 0, got {tau_d}")));
        }
        if !(0.0..=1.0).contains(&tau_c) {
            return Err(Error::InvalidArgument(format!("tau_c must lie in [0,1], got {tau_c}")));
        }
        if !(tau_q >= 0.0) || !tau_q.is_finite() {
            return Err(Error::InvalidArgument(format!("tau_q must be >= 0, got {tau_q}")));
        }
        Ok(Self { tau_d, tau_c, tau_q })
    }
}

/// Score of one ordered pair (current frame `i` against reference `j`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityBreakdown {
    pub f_m: f64,
    pub f_u: f64,
    pub s: f64,
    pub tau_gt: f64,
    /// Source pixels passing the validity test.
    pub n_valid: usize,
    /// Distinct target pixels hit by passing source pixels.
    pub n_unique: usize,
}

impl UtilityBreakdown {
    pub const CSV_HEADER: &'static str = "pair_id,i,j,f_m,f_u,S,tau_gt,n_valid,n_unique";

    pub fn from_counts(n_valid: usize, n_unique: usize, omega_i: usize, omega_j: usize) -> Self {
        let f_m = fraction(n_valid, omega_i);
        let f_u = fraction(n_unique, omega_j);
        let s = utility_score(f_m, f_u);
        Self { f_m, f_u, s, tau_gt: 1.0 - s, n_valid, n_unique }
    }

    pub fn csv_row(&self, pair_id: usize, i: usize, j: usize) -> String {
        format!(
            "{pair_id},{i},{j},{},{},{},{},{},{}",
            g17(self.f_m),
            g17(self.f_u),
            g17(self.s),
            g17(self.tau_gt),
            self.n_valid,
            self.n_unique
        )
    }
}

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// Per-pixel validity mask over frame `i`. Pixels outside `Ω_i` or without a
/// correspondence are `false`.
pub fn pixel_validity(
    frame_i: &PointMapFrame,
    frame_j: &PointMapFrame,
    corr: &CorrespondenceMap,
    thr: &ValidityThresholds,
) -> Vec<bool> {
    let (ci, qi) = (frame_i.confidence(), frame_i.quality());
    let (cj, qj) = (frame_j.confidence(), frame_j.quality());
    (0..frame_i.len())
        .map(|p| {
            if !frame_i.is_valid(p) {
                return false;
            }
            let Some(m) = corr.get(p) else { return false };
            let q = frame_j.index(m.target);
            frame_j.is_valid(q)
                && m.residual < thr.tau_d
                && ci[p].min(cj[q]) > thr.tau_c
                && (qi[p] * qj[q]).sqrt() > thr.tau_q
        })
        .collect()
}

/// `f_m`: passing pixels over `|Ω_i|`.
pub fn matching_fraction(mask: &[bool], omega_i: usize) -> f64 {
    fraction(mask.iter().filter(|m| **m).count(), omega_i)
}

/// Number of distinct targets `q = m(p)` over passing pixels `p`.
pub fn unique_targets(corr: &CorrespondenceMap, mask: &[bool]) -> usize {
    let mut hit = vec![false; corr.height() * corr.width()];
    let mut n = 0;
    for (p, m) in corr.matches().iter().enumerate() {
        if let (true, Some(m)) = (mask[p], m) {
            let q = m.target.row * corr.width() + m.target.col;
            if !hit[q] {
                hit[q] = true;
                n += 1;
            }
        }
    }
    n
}

/// `f_u`: distinct passing targets over `|Ω_j|`.
pub fn unique_fraction(corr: &CorrespondenceMap, mask: &[bool], omega_j: usize) -> f64 {
    fraction(unique_targets(corr, mask), omega_j)
}

pub fn utility_score(f_m: f64, f_u: f64) -> f64 {
    f_m.min(f_u)
}

/// Scores an already computed correspondence map.
pub fn score_correspondences(
    frame_i: &PointMapFrame,
    frame_j: &PointMapFrame,
    corr: &CorrespondenceMap,
    thr: &ValidityThresholds,
) -> UtilityBreakdown {
    let mask = pixel_validity(frame_i, frame_j, corr, thr);
    let n_valid = mask.iter().filter(|m| **m).count();
    let n_unique = unique_targets(corr, &mask);
    UtilityBreakdown::from_counts(n_valid, n_unique, frame_i.n_valid(), frame_j.n_valid())
}

/// Full teacher score: correspondence search with radius `window`, then
/// validity and aggregation.
pub fn score(
    frame_i: &PointMapFrame,
    frame_j: &PointMapFrame,
    thr: &ValidityThresholds,
    window: usize,
) -> Result<UtilityBreakdown> {
    let corr = correspondence_search(frame_i, frame_j, window)?;
    Ok(score_correspondences(frame_i, frame_j, &corr, thr))
}

/// A new keyframe is due when `S < ω_k`.
pub fn keyframe_trigger(s: f64, omega_k: f64) -> bool {
    s < omega_k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::brute_force_nn;
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 3x3 pair where pixels 0..=4 pass and land on 4 distinct targets.
    fn hand_pair() -> (PointMapFrame, PointMapFrame) {
        let tgt: Vec<_> = (0..9).map(|k| Vector3::new((k % 3) as f64, (k / 3) as f64, 1.0)).collect();
        let off = |k: usize, d: Vector3<f64>| tgt[k] + d;
        let src = vec![
            off(0, Vector3::new(0.01, 0.0, 0.0)),
            off(1, Vector3::new(0.0, 0.02, 0.0)),
            off(2, Vector3::new(0.0, 0.0, 0.03)),
            off(3, Vector3::new(0.0, 0.02, 0.0)),
            off(3, Vector3::new(0.03, 0.0, 0.0)), // duplicate target 3
            off(5, Vector3::new(0.01, 0.0, 0.0)), // fails confidence
            off(6, Vector3::new(0.01, 0.0, 0.0)), // fails quality
            off(7, Vector3::new(0.0, 0.0, 0.4)),  // fails distance
            off(8, Vector3::new(0.0, 0.0, 0.2)),  // fails distance
        ];
        let mut ci = vec![0.9; 9];
        ci[5] = 0.0;
        let mut qi = vec![2.0; 9];
        qi[6] = 1.0;
        let fi = PointMapFrame::new(0, 3, 3, src, ci, qi, vec![true; 9]).unwrap();
        let fj = PointMapFrame::from_points(1, 3, 3, tgt, 0.9, 2.0).unwrap();
        (fi, fj)
    }

    fn grid(h: usize, w: usize, c: f64, q: f64) -> PointMapFrame {
        let pts = (0..h * w).map(|k| Vector3::new((k % w) as f64 * 0.3, (k / w) as f64 * 0.3, 2.0)).collect();
        PointMapFrame::from_points(0, h, w, pts, c, q).unwrap()
    }

    fn random_pair(rng: &mut ChaCha8Rng, n: usize, full: bool) -> (PointMapFrame, PointMapFrame) {
        let mk = |rng: &mut ChaCha8Rng| {
            let pts = (0..n * n)
                .map(|_| Vector3::new(rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5)))
                .collect();
            let c = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let q = (0..n * n).map(|_| rng.gen_range(1.0..3.0)).collect();
            let v = (0..n * n).map(|_| full || rng.gen_bool(0.8)).collect();
            PointMapFrame::new(0, n, n, pts, c, q, v).unwrap()
        };
        (mk(rng), mk(rng))
    }

    #[test]
    fn thresholds_validate() {
        assert!(ValidityThresholds::new(0.0, 0.0, 1.5).is_err());
        assert!(ValidityThresholds::new(0.1, 1.2, 1.5).is_err());
        assert!(ValidityThresholds::new(0.1, 0.0, -1.0).is_err());
        assert_eq!(ValidityThresholds::new(0.1, 0.0, 1.5).unwrap(), ValidityThresholds::default());
    }

    #[test]
    fn identical_frames_strong_quality() {
        let f = grid(5, 5, 0.9, 2.0);
        let thr = ValidityThresholds::default();
        let corr = correspondence_search(&f, &f, 2).unwrap();
        assert!(pixel_validity(&f, &f, &corr, &thr).iter().all(|m| *m));
        let b = score(&f, &f, &thr, 2).unwrap();
        assert_eq!((b.f_m, b.f_u, b.s, b.tau_gt), (1.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn quality_at_threshold_fails() {
        let f = grid(5, 5, 0.9, 1.0);
        let thr = ValidityThresholds::default();
        let corr = correspondence_search(&f, &f, 2).unwrap();
        assert!(pixel_validity(&f, &f, &corr, &thr).iter().all(|m| !*m));
        // sqrt(1.5 * 1.5) == 1.5 is not > 1.5
        let g = grid(5, 5, 0.9, 1.5);
        assert_eq!(score(&g, &g, &thr, 2).unwrap().s, 0.0);
    }

    #[test]
    fn hand_case_counts() {
        let (fi, fj) = hand_pair();
        let thr = ValidityThresholds::default();
        let corr = correspondence_search(&fi, &fj, 3).unwrap();
        let mask = pixel_validity(&fi, &fj, &corr, &thr);
        assert_eq!(mask, vec![true, true, true, true, true, false, false, false, false]);
        assert_eq!(matching_fraction(&mask, 9), 5.0 / 9.0);
        assert_eq!(unique_fraction(&corr, &mask, 9), 4.0 / 9.0);
        let b = score(&fi, &fj, &thr, 3).unwrap();
        assert_eq!(b.f_m, 5.0 / 9.0);
        assert_eq!(b.f_u, 4.0 / 9.0);
        assert_eq!(b.s, 4.0 / 9.0);
        assert_eq!(b.tau_gt, 1.0 - 4.0 / 9.0);
        assert_eq!((b.n_valid, b.n_unique), (5, 4));
    }

    #[test]
    fn fractions_edge_cases() {
        assert_eq!(matching_fraction(&[true; 9], 9), 1.0);
        assert_eq!(matching_fraction(&[], 0), 0.0);
        let f = grid(3, 3, 0.9, 2.0);
        let corr = correspondence_search(&f, &f, 1).unwrap();
        assert_eq!(unique_fraction(&corr, &[true; 9], 9), 1.0);
        assert_eq!(unique_fraction(&corr, &[true; 9], 0), 0.0);
        // every source collapses onto one target
        let one = PointMapFrame::new(
            1,
            3,
            3,
            vec![Vector3::new(0.0, 0.0, 2.0); 9],
            vec![0.9; 9],
            vec![2.0; 9],
            vec![true; 9],
        )
        .unwrap();
        let corr = brute_force_nn(&f, &one).unwrap();
        assert_eq!(unique_fraction(&corr, &[true; 9], 9), 1.0 / 9.0);
    }

    #[test]
    fn empty_frames_read_as_novel() {
        let f = grid(4, 4, 0.9, 2.0);
        let e = PointMapFrame::empty(1, 4, 4).unwrap();
        for (a, b) in [(&f, &e), (&e, &f), (&e, &e)] {
            let s = score(a, b, &ValidityThresholds::default(), 2).unwrap();
            assert_eq!((s.f_m, s.f_u, s.s, s.tau_gt), (0.0, 0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn disjoint_scenes_score_zero() {
        let f = grid(4, 4, 0.9, 2.0);
        let g = f.transformed(&crate::geometry::SE3Pose::new(
            nalgebra::UnitQuaternion::identity(),
            Vector3::new(50.0, 0.0, 0.0),
        ));
        let s = score(&f, &g, &ValidityThresholds::default(), 4).unwrap();
        assert_eq!((s.s, s.tau_gt), (0.0, 1.0));
    }

    #[test]
    fn trigger_is_strict() {
        assert!(keyframe_trigger(0.30, DEFAULT_OMEGA_K));
        assert!(!keyframe_trigger(0.33, DEFAULT_OMEGA_K));
        assert!(!keyframe_trigger(1.0, DEFAULT_OMEGA_K));
    }

    #[test]
    fn csv_row_format() {
        let b = UtilityBreakdown::from_counts(5, 4, 9, 9);
        assert_eq!(
            b.csv_row(3, 1, 0),
            "3,1,0,0.55555555555555558,0.44444444444444442,0.44444444444444442,0.55555555555555558,5,4"
        );
    }

    proptest! {
        #[test]
        fn fractions_bounded_and_s_is_fu_on_full_grids(seed in any::<u64>(), window in 0usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = random_pair(&mut rng, 6, true);
            let s = score(&a, &b, &ValidityThresholds::default(), window).unwrap();
            for v in [s.f_m, s.f_u, s.s, s.tau_gt] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(s.f_u <= s.f_m);
            prop_assert_eq!(s.s, s.f_u);
            prop_assert_eq!(s.s, s.f_m.min(s.f_u));
            prop_assert_eq!(s.tau_gt, 1.0 - s.s);
        }

        #[test]
        fn tighter_thresholds_never_raise_score(
            seed in any::<u64>(),
            d in (0.01f64..0.3, 0.01f64..0.3),
            c in (0.0f64..1.0, 0.0f64..1.0),
            q in (0.0f64..3.0, 0.0f64..3.0),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = random_pair(&mut rng, 6, false);
            let corr = correspondence_search(&a, &b, 2).unwrap();
            let loose = ValidityThresholds::new(d.0.max(d.1), c.0.min(c.1), q.0.min(q.1)).unwrap();
            let s0 = score_correspondences(&a, &b, &corr, &loose).s;
            for tight in [
                ValidityThresholds { tau_d: d.0.min(d.1), ..loose },
                ValidityThresholds { tau_c: c.0.max(c.1), ..loose },
                ValidityThresholds { tau_q: q.0.max(q.1), ..loose },
            ] {
                prop_assert!(score_correspondences(&a, &b, &corr, &tight).s <= s0);
            }
        }

        #[test]
        fn self_score_is_one(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, _) = random_pair(&mut rng, 5, true);
            let n = a.len();
            let strong = PointMapFrame::new(
                0, 5, 5, a.points().to_vec(),
                (0..n).map(|_| rng.gen_range(0.01..1.0)).collect(),
                (0..n).map(|_| rng.gen_range(2.26..4.0)).collect(),
                vec![true; n],
            ).unwrap();
            let s = score(&strong, &strong, &ValidityThresholds::default(), 1).unwrap();
            prop_assert_eq!(s.s, 1.0);
        }
    }
}
