//! Per-command configuration keys.
//!
//! Every key has a default, a help line and a flag `--key-name`. Values are
//! resolved as defaults, then a `key = value` file given by `--config`,
//! then flags. Unknown file keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy)]
pub struct KeyDef {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> KeyDef {
    KeyDef { name, default, help }
}

const SCENE_KEYS: &[KeyDef] = &[
    key("seed", "0", "Top-level random seed; every stage derives its own stream from it"),
    key("n_frames", "60", "Frames per synthetic trajectory"),
    key("fps", "12", "Frame rate of synthetic trajectories"),
    key("height", "32", "Rendered pointmap height in pixels (>= 8)"),
    key("width", "32", "Rendered pointmap width in pixels (>= 8)"),
    key("dark_fraction", "0", "Fraction of texture cells with quality below tau_q"),
];

const SCORE_KEYS: &[KeyDef] = &[
    key("window", "4", "Correspondence search radius in pixels"),
    key("tau_d", "0.1", "Maximum 3D residual for a valid correspondence, meters"),
    key("tau_c", "0", "Confidence threshold (strict)"),
    key("tau_q", "1.5", "Quality threshold on sqrt(Q_i Q_j) (strict)"),
    key("align", "true", "Express the current frame in the reference camera before scoring"),
];

const LABEL_KEYS: &[KeyDef] = &[
    key("n_scenes", "8", "Number of synthetic scenes"),
    key("n_pairs", "500", "Labelled pairs drawn per scene (>= 1)"),
    key("grid", "3", "Descriptor grid size g; tokens have 3g^2+5 entries"),
    key("out_dir", "data", "Directory receiving labels.csv, descriptors.bin and label_report.json"),
];

const TRAIN_KEYS: &[KeyDef] = &[
    key("seed", "0", "Seed for initialisation and epoch shuffles"),
    key("data_dir", "data", "Directory holding labels.csv and descriptors.bin"),
    key("out_dir", "model", "Directory receiving model.greg, metrics.csv, eval_predictions.csv, train_report.json"),
    key("epochs", "20", "Training epochs"),
    key("batch_size", "32", "Minibatch size"),
    key("lr_head", "0.003", "Peak learning rate for the refinement head and readout"),
    key("lr_proj", "0.001", "Peak learning rate for token projection and role embeddings"),
    key("weight_decay", "0.0001", "Decoupled weight decay on weight matrices"),
    key("beta1", "0.9", "First-moment decay"),
    key("beta2", "0.999", "Second-moment decay"),
    key("eps", "1e-8", "Optimiser epsilon"),
    key("warmup_fraction", "0.25", "Fraction of optimiser steps in linear warmup before cosine decay"),
    key("delta", "0.1", "Huber loss transition point"),
    key("k_iters", "4", "Latent refinement iterations"),
    key("d_model", "16", "Attention width"),
    key("hidden", "32", "Update-head hidden width"),
    key("eval_fraction", "0.2", "Fraction of scenes held out for evaluation"),
    key("checkpoint_every", "0", "Also write checkpoint_eN.greg every N epochs (0 = final only)"),
    key("stop_after", "0", "Stop after this many total epochs, leaving a resumable checkpoint (0 = run all)"),
    key("resume", "", "Resumable checkpoint to continue from (empty = start fresh)"),
];

const GATE_KEYS: &[KeyDef] = &[
    key("stream", "0", "Index of the synthetic gating stream (streams never coincide with training scenes)"),
    key("frames_dir", "", "Directory of PMAP frames read in file-name order (empty = synthetic stream)"),
    key("poses", "", "TUM trajectory with one camera pose per PMAP frame (required with frames_dir)"),
    key("write_frames", "false", "Also write the stream as PMAP files under <out_dir>/frames"),
    key("policy", "student_gate", "dense | stride(n) | teacher_gate | student_gate"),
    key("tau_keep", "0.5", "Student keeps a frame when tau >= tau_keep"),
    key("strict", "false", "Use tau > tau_keep instead"),
    key("omega_k", "0.33", "Teacher keeps a frame when S < omega_k"),
    key("checkpoint", "model/model.greg", "Student checkpoint (student_gate only)"),
    key("compare_teacher", "true", "Also run the teacher gate and report decision agreement"),
    key("out_dir", "gate", "Directory receiving decisions.csv, gt.txt, est.txt, pred.xyz, ref.xyz, gate_report.json"),
];

const EVAL_TRAJ_KEYS: &[KeyDef] = &[
    key("est", "gate/est.txt", "Estimated trajectory, TUM format"),
    key("gt", "gate/gt.txt", "Ground-truth trajectory, TUM format"),
    key("align", "sim3", "sim3 | se3 | none"),
    key("max_dt", "0.02", "Timestamp association window, seconds"),
    key("out", "eval/traj", "Output path stem; writes <out>.json and <out>.csv"),
];

const EVAL_RECON_KEYS: &[KeyDef] = &[
    key("pred", "gate/pred.xyz", "Predicted point set, one 'x y z' per line"),
    key("ref", "gate/ref.xyz", "Reference point set, one 'x y z' per line"),
    key("out", "eval/recon", "Output path stem; writes <out>.json and <out>.csv"),
];

const REPORT_KEYS: &[KeyDef] = &[
    key("run_dir", "gate", "Gate output directory of the run under evaluation"),
    key("baseline_dir", "gate_dense", "Gate output directory of the dense baseline"),
    key("align", "sim3", "sim3 | se3 | none"),
    key("max_dt", "0.02", "Timestamp association window, seconds"),
    key("c_gate", "", "TFLOPs per gated frame (empty = calibrated from the TUM compute table)"),
    key("c_track", "", "TFLOPs per kept frame for tracking (empty = calibrated)"),
    key("c_backend", "", "TFLOPs per kept frame for the backend (empty = calibrated)"),
    key("track_share", "0.75", "Tracker share of per-frame SLAM compute used by the calibration"),
    key("out", "report", "Output path stem; writes <out>.json and <out>.csv"),
];

pub const COMMANDS: &[&str] = &["label", "train", "gate", "eval-traj", "eval-recon", "report"];

pub fn about(command: &str) -> &'static str {
    match command {
        "label" => "Generate synthetic scenes and write teacher-labelled pairs",
        "train" => "Distil the student regressor from labelled pairs",
        "gate" => "Run a gating policy over a synthetic frame stream",
        "eval-traj" => "Absolute trajectory error after alignment",
        "eval-recon" => "Accuracy, completeness, Chamfer-L1 and F-scores of a point set",
        "report" => "Combined metrics and compute for a run against the dense baseline",
        _ => "",
    }
}

/// All keys accepted by `command`, in help order.
pub fn keys(command: &str) -> Vec<KeyDef> {
    let groups: &[&[KeyDef]] = match command {
        "label" => &[SCENE_KEYS, SCORE_KEYS, LABEL_KEYS],
        "train" => &[TRAIN_KEYS],
        "gate" => &[SCENE_KEYS, SCORE_KEYS, GATE_KEYS],
        "eval-traj" => &[EVAL_TRAJ_KEYS],
        "eval-recon" => &[EVAL_RECON_KEYS],
        "report" => &[REPORT_KEYS],
        _ => &[],
    };
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

/// Fully resolved key/value map for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    command: &'static str,
    values: BTreeMap<String, String>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str, path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

impl Config {
    /// Resolves defaults < file < flags. `flags` holds keys given on the
    /// command line.
    pub fn resolve(
        command: &'static str,
        file: Option<&Path>,
        flags: &[(String, String)],
    ) -> Result<Self, CliError> {
        let defs = keys(command);
        let mut values: BTreeMap<String, String> =
            defs.iter().map(|d| (d.name.to_string(), d.default.to_string())).collect();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            for (k, v) in parse_file(&text, path)? {
                match values.get_mut(&k) {
                    Some(slot) => *slot = v,
                    None => return Err(usage(format!("unknown key {k:?} for `{command}` in {}", path.display()))),
                }
            }
        }
        for (k, v) in flags {
            match values.get_mut(k) {
                Some(slot) => slot.clone_from(v),
                None => return Err(usage(format!("unknown key {k:?} for `{command}`"))),
            }
        }
        Ok(Self { command, values })
    }

    pub fn command(&self) -> &'static str {
        self.command
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).unwrap_or_else(|| panic!("key {key} not registered for {}", self.command))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.str(key);
        raw.parse().map_err(|_| usage(format!("invalid value {raw:?} for {key}")))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        if self.str(key).is_empty() {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn path(&self, key: &str) -> PathBuf {
        PathBuf::from(self.str(key))
    }
}
