//! Frame-stream gating policies.
//!
//! Frame 0 is always kept and becomes the reference keyframe. Every later
//! frame is compared with the most recent kept frame only; a kept frame
//! replaces the reference and a skipped frame is dropped.

use std::fmt;
use std::io::Write;

use crate::geometry::{PointMapFrame, SE3Pose};
use crate::oracle::align_to_reference;
use crate::regressor::GateRegressor;
use crate::utility::{keyframe_trigger, score, ValidityThresholds, DEFAULT_OMEGA_K, DEFAULT_WINDOW};
use crate::{Error, Result};

pub const DECISION_HEADER: &str = "frame,policy,ref,score,kept";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Dense,
    Stride(usize),
    TeacherGate,
    StudentGate,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Dense => f.write_str("dense"),
            PolicyKind::Stride(n) => write!(f, "stride({n})"),
            PolicyKind::TeacherGate => f.write_str("teacher_gate"),
            PolicyKind::StudentGate => f.write_str("student_gate"),
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    /// Accepts `dense`, `teacher_gate`, `student_gate`, `stride(n)` and `stride:n`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => return Ok(PolicyKind::Dense),
            "teacher_gate" => return Ok(PolicyKind::TeacherGate),
            "student_gate" => return Ok(PolicyKind::StudentGate),
            _ => {}
        }
        let n = s
            .strip_prefix("stride(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("stride:"))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown policy {s:?}")))?;
        let n: usize = n.parse().map_err(|_| Error::InvalidArgument(format!("bad stride in {s:?}")))?;
        if n == 0 {
            return Err(Error::InvalidArgument("stride must be >= 1".into()));
        }
        Ok(PolicyKind::Stride(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub tau_keep: f64,
    pub omega_k: f64,
    /// Student keeps on `τ > τ_keep` instead of `τ ≥ τ_keep`.
    pub strict: bool,
    pub thresholds: ValidityThresholds,
    pub window: usize,
    /// Express the current frame in the reference camera's coordinates
    /// before scoring, as during labelling.
    pub align: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            kind: PolicyKind::Dense,
            tau_keep: 0.5,
            omega_k: DEFAULT_OMEGA_K,
            strict: false,
            thresholds: ValidityThresholds::default(),
            window: DEFAULT_WINDOW,
            align: true,
        }
    }
}

impl PolicyConfig {
    pub fn with_kind(kind: PolicyKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let PolicyKind::Stride(0) = self.kind {
            return Err(Error::InvalidArgument("stride must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.tau_keep) {
            return Err(Error::InvalidArgument(format!("tau_keep {} outside [0, 1]", self.tau_keep)));
        }
        Ok(())
    }
}

/// Trained student plus its refinement depth.
#[derive(Debug, Clone, Copy)]
pub struct Student<'a> {
    pub model: &'a GateRegressor,
    pub k_iters: usize,
}

/// Ordered frames in their own camera coordinates, with camera-to-world
/// poses used for alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStream {
    frames: Vec<PointMapFrame>,
    poses: Vec<SE3Pose>,
}

impl FrameStream {
    pub fn new(frames: Vec<PointMapFrame>, poses: Vec<SE3Pose>) -> Result<Self> {
        if frames.len() != poses.len() {
            return Err(Error::DimensionMismatch { expected: frames.len(), got: poses.len() });
        }
        Ok(Self { frames, poses })
    }

    /// A stream from a fixed camera.
    pub fn static_camera(frames: Vec<PointMapFrame>) -> Self {
        let poses = vec![SE3Pose::identity(); frames.len()];
        Self { frames, poses }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[PointMapFrame] {
        &self.frames
    }

    pub fn poses(&self) -> &[SE3Pose] {
        &self.poses
    }

    fn current_in_reference(&self, cur: usize, reference: usize, align: bool) -> PointMapFrame {
        if align {
            align_to_reference(&self.frames[cur], &self.poses[cur], &self.poses[reference])
        } else {
            self.frames[cur].clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDecision {
    pub frame: usize,
    pub policy: PolicyKind,
    /// Reference keyframe at decision time; `None` for frame 0.
    pub reference: Option<usize>,
    /// `τ` for the student, `S` for the teacher, `None` otherwise.
    pub score: Option<f64>,
    pub kept: bool,
}

/// Runs `cfg.kind` over the stream. `student` is required for the student
/// gate and ignored otherwise.
pub fn run_policy(stream: &FrameStream, cfg: &PolicyConfig, student: Option<Student<'_>>) -> Result<Vec<GateDecision>> {
    cfg.validate()?;
    if stream.is_empty() {
        return Err(Error::Empty("frame stream".into()));
    }
    if cfg.kind == PolicyKind::StudentGate && student.is_none() {
        return Err(Error::InvalidArgument("student_gate requires a trained model".into()));
    }
    let mut out = Vec::with_capacity(stream.len());
    out.push(GateDecision { frame: 0, policy: cfg.kind, reference: None, score: None, kept: true });
    let mut reference = 0;
    for f in 1..stream.len() {
        let (score_used, kept) = match cfg.kind {
            PolicyKind::Dense => (None, true),
            PolicyKind::Stride(n) => (None, f % n == 0),
            PolicyKind::TeacherGate => {
                let cur = stream.current_in_reference(f, reference, cfg.align);
                let s = score(&cur, &stream.frames[reference], &cfg.thresholds, cfg.window)?.s;
                (Some(s), keyframe_trigger(s, cfg.omega_k))
            }
            PolicyKind::StudentGate => {
                let st = student.expect("checked above");
                let cur = stream.current_in_reference(f, reference, cfg.align);
                let tau = st.model.predict(&stream.frames[reference], &cur, st.k_iters)?;
                let keep = if cfg.strict { tau > cfg.tau_keep } else { tau >= cfg.tau_keep };
                (Some(tau), keep)
            }
        };
        out.push(GateDecision { frame: f, policy: cfg.kind, reference: Some(reference), score: score_used, kept });
        if kept {
            reference = f;
        }
    }
    Ok(out)
}

pub fn kept_fraction(decisions: &[GateDecision]) -> f64 {
    if decisions.is_empty() {
        return 0.0;
    }
    decisions.iter().filter(|d| d.kept).count() as f64 / decisions.len() as f64
}

/// Ratio of all frames to kept frames.
pub fn downsample_factor(decisions: &[GateDecision]) -> f64 {
    1.0 / kept_fraction(decisions)
}

/// Fraction of frames on which two decision lists agree about keeping.
pub fn agreement(a: &[GateDecision], b: &[GateDecision]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Empty("decision lists".into()));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x.kept == y.kept).count() as f64 / a.len() as f64)
}

/// Student-gate kept fraction for each threshold. Every threshold is a full
/// policy run, so reference keyframes follow that threshold's own decisions.
pub fn sweep_threshold(
    stream: &FrameStream,
    student: Student<'_>,
    base: &PolicyConfig,
    thresholds: &[f64],
) -> Result<Vec<f64>> {
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("thresholds must be sorted ascending".into()));
    }
    thresholds
        .iter()
        .map(|&t| {
            let cfg = PolicyConfig { kind: PolicyKind::StudentGate, tau_keep: t, ..*base };
            Ok(kept_fraction(&run_policy(stream, &cfg, Some(student))?))
        })
        .collect()
}

pub fn write_decisions<W: Write>(decisions: &[GateDecision], mut out: W) -> Result<()> {
    writeln!(out, "{DECISION_HEADER}")?;
    for d in decisions {
        let reference = d.reference.map(|r| r.to_string()).unwrap_or_default();
        let score = d.score.map(crate::numfmt::g17).unwrap_or_default();
        writeln!(out, "{},{},{},{},{}", d.frame, d.policy, reference, score, u8::from(d.kept))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_decisions<R: std::io::BufRead>(input: R) -> Result<Vec<GateDecision>> {
    let bad = |line: usize, why: &str| Error::format("decision log", format!("line {line}: {why}"));
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim_end) != Some(DECISION_HEADER) {
        return Err(bad(1, "missing header"));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let n = k + 2;
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 5 {
            return Err(bad(n, "expected 5 fields"));
        }
        let frame = f[0].parse().map_err(|_| bad(n, "bad frame"))?;
        let policy = f[1].parse().map_err(|_| bad(n, "bad policy"))?;
        let reference = if f[2].is_empty() { None } else { Some(f[2].parse().map_err(|_| bad(n, "bad ref"))?) };
        let score = if f[3].is_empty() { None } else { Some(f[3].parse().map_err(|_| bad(n, "bad score"))?) };
        let kept = match f[4] {
            "0" => false,
            "1" => true,
            _ => return Err(bad(n, "kept must be 0 or 1")),
        };
        out.push(GateDecision { frame, policy, reference, score, kept });
    }
    Ok(out)
}
