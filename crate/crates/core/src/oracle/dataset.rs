//! Labelled pair datasets and their on-disk form.
//!
//! `labels.csv` holds `pair_id,scene,frame_i,frame_j,rot_deg,trans_m,tau_gt`.
//! The sibling `DESC v1` file holds one row per pair: the reference token
//! followed by the current token, as little-endian `f32` after the magic
//! `DESC`, a `u32` row count and a `u32` row width.

use std::io::{BufRead, Read, Write};

use super::{
    generate_scene, generate_trajectory, label_pair, render_frame, sample_pairs, seed, LabelConfig, RenderConfig,
    SceneConfig, SyntheticScene, Trajectory, TrajectoryConfig,
};
use crate::geometry::PointMapFrame;
use crate::exec::Execution;
use crate::numfmt::g17;
use crate::{Error, Result};

pub const LABELS_HEADER: &str = "pair_id,scene,frame_i,frame_j,rot_deg,trans_m,tau_gt";
const DESC_MAGIC: &[u8; 4] = b"DESC";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub seed: u64,
    pub n_scenes: usize,
    /// Pairs drawn per scene.
    pub n_pairs: usize,
    pub scene: SceneConfig,
    pub trajectory: TrajectoryConfig,
    pub render: RenderConfig,
    pub label: LabelConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_scenes: 8,
            n_pairs: 500,
            scene: SceneConfig::default(),
            trajectory: TrajectoryConfig::default(),
            render: RenderConfig::default(),
            label: LabelConfig::default(),
        }
    }
}

/// One labelled pair. Tokens are stored at `f32` precision so that an
/// in-memory dataset and one read back from disk are identical.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRow {
    pub pair_id: usize,
    pub scene: usize,
    pub frame_i: usize,
    pub frame_j: usize,
    pub rot_deg: f64,
    pub trans_m: f64,
    pub tau_gt: f64,
    pub ref_token: Vec<f64>,
    pub cur_token: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<LabelRow>,
}

fn to_f32_precision(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| *x as f32 as f64).collect()
}

/// A rendered synthetic camera sequence.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub scene: SyntheticScene,
    pub trajectory: Trajectory,
    /// One frame per pose, in its own camera coordinates.
    pub frames: Vec<PointMapFrame>,
}

/// Generates scene and trajectory `index` and renders every pose. Seeds are
/// derived from `cfg.seed` under the stages `{prefix}scene` and
/// `{prefix}trajectory`; the dataset uses the empty prefix and gating
/// streams use `"stream-"`, so streams never coincide with training scenes.
pub fn render_sequence(cfg: &DatasetConfig, prefix: &str, index: usize, exec: Execution) -> Result<Sequence> {
    let k = index as u64;
    let scene = generate_scene(seed::derive(cfg.seed, &format!("{prefix}scene"), k), &cfg.scene);
    let trajectory =
        generate_trajectory(&scene, seed::derive(cfg.seed, &format!("{prefix}trajectory"), k), &cfg.trajectory)?;
    let frames = exec
        .map_range(trajectory.len(), |f| render_frame(&scene, &trajectory.poses()[f], f, &cfg.render))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Sequence { scene, trajectory, frames })
}

/// Generates scenes, trajectories, frames and labelled pairs. Rows are
/// ordered by `(scene, frame_i, frame_j)` and numbered consecutively.
pub fn build_dataset(cfg: &DatasetConfig, exec: Execution) -> Result<Dataset> {
    if cfg.n_scenes == 0 {
        return Err(Error::InvalidArgument("n_scenes must be >= 1".into()));
    }
    if cfg.n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be >= 1".into()));
    }
    let per_scene: Vec<Result<Vec<LabelRow>>> = exec.map_range(cfg.n_scenes, |k| {
        let Sequence { trajectory: traj, frames, .. } = render_sequence(cfg, "", k, exec)?;
        let pairs = sample_pairs(&traj, seed::derive(cfg.seed, "pairs", k as u64), cfg.n_pairs)?;
        let poses = traj.poses();
        exec.map(&pairs, |&(i, j)| {
            let l = label_pair(&frames[i], &poses[i], &frames[j], &poses[j], &cfg.label)?;
            Ok(LabelRow {
                pair_id: 0,
                scene: k,
                frame_i: i,
                frame_j: j,
                rot_deg: l.motion.rot_deg,
                trans_m: l.motion.trans_m,
                tau_gt: l.tau_gt(),
                ref_token: to_f32_precision(&l.ref_token),
                cur_token: to_f32_precision(&l.cur_token),
            })
        })
        .into_iter()
        .collect()
    });
    let mut rows = Vec::new();
    for r in per_scene {
        rows.extend(r?);
    }
    for (id, row) in rows.iter_mut().enumerate() {
        row.pair_id = id;
    }
    Ok(Dataset { rows })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn token_dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.ref_token.len())
    }

    /// Ten-bin histogram of `τ_gt` over `[0, 1]`.
    pub fn label_histogram(&self) -> [usize; 10] {
        let mut h = [0; 10];
        for r in &self.rows {
            h[((r.tau_gt * 10.0) as usize).min(9)] += 1;
        }
        h
    }

    /// Reassembles a dataset from the two files.
    pub fn from_parts(labels: Vec<LabelRow>, rows: usize, dim: usize, values: Vec<f32>) -> Result<Self> {
        if rows != labels.len() {
            return Err(Error::format("DESC", format!("{rows} descriptor rows for {} labels", labels.len())));
        }
        if !dim.is_multiple_of(2) {
            return Err(Error::format("DESC", format!("row width {dim} is odd")));
        }
        let d = dim / 2;
        let rows = labels
            .into_iter()
            .zip(values.chunks_exact(dim.max(1)))
            .map(|(mut l, v)| {
                l.ref_token = v[..d].iter().map(|x| *x as f64).collect();
                l.cur_token = v[d..].iter().map(|x| *x as f64).collect();
                l
            })
            .collect();
        Ok(Self { rows })
    }
}

pub fn write_labels<W: Write>(rows: &[LabelRow], mut out: W) -> Result<()> {
    writeln!(out, "{LABELS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.pair_id,
            r.scene,
            r.frame_i,
            r.frame_j,
            g17(r.rot_deg),
            g17(r.trans_m),
            g17(r.tau_gt)
        )?;
    }
    Ok(())
}

/// Parses `labels.csv`; tokens are left empty.
pub fn read_labels<R: BufRead>(input: R) -> Result<Vec<LabelRow>> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::format("labels", "missing header"))??;
    if header.trim_end() != LABELS_HEADER {
        return Err(Error::format("labels", format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::format("labels", format!("line {}: {} fields", n + 2, f.len())));
        }
        let bad = |what: &str| Error::format("labels", format!("line {}: bad {what}", n + 2));
        let int = |s: &str, what: &str| s.trim().parse::<usize>().map_err(|_| bad(what));
        let real = |s: &str, what: &str| s.trim().parse::<f64>().map_err(|_| bad(what));
        let tau_gt = real(f[6], "tau_gt")?;
        if !(0.0..=1.0).contains(&tau_gt) {
            return Err(bad("tau_gt range"));
        }
        rows.push(LabelRow {
            pair_id: int(f[0], "pair_id")?,
            scene: int(f[1], "scene")?,
            frame_i: int(f[2], "frame_i")?,
            frame_j: int(f[3], "frame_j")?,
            rot_deg: real(f[4], "rot_deg")?,
            trans_m: real(f[5], "trans_m")?,
            tau_gt,
            ref_token: Vec::new(),
            cur_token: Vec::new(),
        });
    }
    Ok(rows)
}

pub fn write_descriptors<W: Write>(rows: &[LabelRow], mut out: W) -> Result<()> {
    let dim = rows.first().map_or(0, |r| r.ref_token.len() + r.cur_token.len());
    let mut buf = Vec::with_capacity(12 + rows.len() * dim * 4);
    buf.extend_from_slice(DESC_MAGIC);
    buf.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(dim as u32).to_le_bytes());
    for r in rows {
        if r.ref_token.len() + r.cur_token.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: r.ref_token.len() + r.cur_token.len() });
        }
        for v in r.ref_token.iter().chain(&r.cur_token) {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Returns `(rows, dim, values)`.
pub fn read_descriptors<R: Read>(mut input: R) -> Result<(usize, usize, Vec<f32>)> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 12 {
        return Err(Error::format("DESC", "truncated header"));
    }
    if &bytes[..4] != DESC_MAGIC {
        return Err(Error::format("DESC", "bad magic"));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = rows.checked_mul(dim).and_then(|n| n.checked_mul(4)).map(|n| n + 12);
    if expected != Some(bytes.len()) {
        return Err(Error::format("DESC", format!("payload is {} bytes, expected {expected:?}", bytes.len())));
    }
    let values = bytes[12..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((rows, dim, values))
}

/// Splits row indices by scene: the last `round(eval_fraction · n_scenes)`
/// scenes (at least one when there are two or more) form the eval split.
pub fn split_by_scene(rows: &[LabelRow], eval_fraction: f64) -> (Vec<usize>, Vec<usize>) {
    let mut scenes: Vec<usize> = rows.iter().map(|r| r.scene).collect();
    scenes.sort_unstable();
    scenes.dedup();
    let mut n_eval = (eval_fraction * scenes.len() as f64).round() as usize;
    if scenes.len() >= 2 && eval_fraction > 0.0 {
        n_eval = n_eval.clamp(1, scenes.len() - 1);
    } else {
        n_eval = 0;
    }
    let eval_scenes = &scenes[scenes.len() - n_eval..];
    let (mut train, mut eval) = (Vec::new(), Vec::new());
    for (i, r) in rows.iter().enumerate() {
        if eval_scenes.contains(&r.scene) {
            eval.push(i);
        } else {
            train.push(i);
        }
    }
    (train, eval)
}
