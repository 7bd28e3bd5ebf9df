//! Subcommand bodies. Each reads its resolved [`Config`] and writes its
//! outputs atomically.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use framegate::exec::Execution;
use framegate::geometry::{pmap, PointMapFrame, SE3Pose, Sim3Transform};
use framegate::metrics::{
    account_cost, ate, calibrate, read_tum, recon_metrics, write_tum, AlignMode, AteConfig, AteReport, CostModel,
    CostReport, ReconReport, TUM_ROW,
};
use framegate::numfmt::g17;
use framegate::oracle::{
    build_dataset, read_descriptors, read_labels, render_sequence, split_by_scene, write_descriptors, write_labels,
    Dataset, DatasetConfig, LabelConfig, RenderConfig, Trajectory,
};
use framegate::policy::{
    agreement, downsample_factor, kept_fraction, read_decisions, run_policy, write_decisions, FrameStream,
    GateDecision, PolicyConfig, PolicyKind, Student,
};
use framegate::regressor::{
    error_stats, init_state, load_checkpoint, predict_all, train_epoch, AdamWConfig, Checkpoint,
    DescriptorConfig, Example, ModelShape, TrainConfig,
};
use framegate::utility::ValidityThresholds;
use nalgebra::{UnitQuaternion, Vector3};
use serde_json::{json, Map, Value};

use crate::config::Config;
use crate::output::{num, open, read_xyz, write_atomic, write_json, write_with, write_xyz};
use crate::{data_err, CliError};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn config_json(cfg: &Config) -> Value {
    Value::Object(cfg.values().iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Scene, trajectory, render and scoring settings shared by `label` and
/// `gate`.
fn dataset_config(cfg: &Config) -> Result<DatasetConfig, CliError> {
    let mut d = DatasetConfig { seed: cfg.get("seed")?, ..DatasetConfig::default() };
    d.scene.dark_fraction = cfg.get("dark_fraction")?;
    if !(0.0..=1.0).contains(&d.scene.dark_fraction) {
        return Err(usage("dark_fraction must lie in [0, 1]"));
    }
    d.trajectory.n_frames = cfg.get("n_frames")?;
    d.trajectory.fps = cfg.get("fps")?;
    if !(d.trajectory.fps > 0.0) {
        return Err(usage("fps must be > 0"));
    }
    let (h, w): (usize, usize) = (cfg.get("height")?, cfg.get("width")?);
    if h < 8 || w < 8 {
        return Err(usage(format!("resolution must be at least 8x8, got {h}x{w}")));
    }
    d.render = RenderConfig::with_resolution(h, w);
    d.label = LabelConfig {
        thresholds: ValidityThresholds::new(cfg.get("tau_d")?, cfg.get("tau_c")?, cfg.get("tau_q")?)?,
        window: cfg.get("window")?,
        align: cfg.get("align")?,
        descriptor: DescriptorConfig::default(),
    };
    Ok(d)
}

pub fn label(cfg: &Config) -> Result<(), CliError> {
    let mut d = dataset_config(cfg)?;
    d.n_scenes = cfg.get("n_scenes")?;
    d.n_pairs = cfg.get("n_pairs")?;
    d.label.descriptor = DescriptorConfig { grid: cfg.get("grid")? };
    if d.label.descriptor.grid == 0 {
        return Err(usage("grid must be >= 1"));
    }
    let ds = build_dataset(&d, Execution::default())?;
    let out = cfg.path("out_dir");
    write_with(&out.join("labels.csv"), |b| write_labels(&ds.rows, b))?;
    write_with(&out.join("descriptors.bin"), |b| write_descriptors(&ds.rows, b))?;

    let hist = ds.label_histogram();
    let taus: Vec<f64> = ds.rows.iter().map(|r| r.tau_gt).collect();
    let mean = taus.iter().sum::<f64>() / taus.len() as f64;
    let report = json!({
        "n_pairs": ds.len(),
        "token_dim": ds.token_dim(),
        "tau_gt_mean": num(mean),
        "tau_gt_min": num(taus.iter().cloned().fold(f64::INFINITY, f64::min)),
        "tau_gt_max": num(taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        "histogram": hist.to_vec(),
        "config": config_json(cfg),
    });
    write_json(&out.join("label_report.json"), &report)?;

    println!("{} pairs, token_dim {}, mean tau_gt {:.4}", ds.len(), ds.token_dim(), mean);
    let peak = hist.iter().copied().max().unwrap_or(1).max(1);
    for (b, n) in hist.iter().enumerate() {
        let bar = "#".repeat((40 * n).div_ceil(peak));
        println!("[{:.1}, {:.1}{} {n:>6} {bar}", b as f64 / 10.0, (b + 1) as f64 / 10.0, if b == 9 { "]" } else { ")" });
    }
    Ok(())
}

fn load_dataset(dir: &Path) -> Result<Dataset, CliError> {
    let lp = dir.join("labels.csv");
    let labels = read_labels(open(&lp)?).map_err(|e| data_err(&lp, e))?;
    let dp = dir.join("descriptors.bin");
    let (rows, dim, values) = read_descriptors(open(&dp)?).map_err(|e| data_err(&dp, e))?;
    Dataset::from_parts(labels, rows, dim, values).map_err(|e| data_err(&dp, e))
}

fn train_config(cfg: &Config) -> Result<TrainConfig, CliError> {
    let t = TrainConfig {
        delta: cfg.get("delta")?,
        epochs: cfg.get("epochs")?,
        batch_size: cfg.get("batch_size")?,
        k_iters: cfg.get("k_iters")?,
        seed: cfg.get("seed")?,
        shape: ModelShape { d_model: cfg.get("d_model")?, hidden: cfg.get("hidden")?, ..ModelShape::default() },
        optim: AdamWConfig {
            lr_head: cfg.get("lr_head")?,
            lr_proj: cfg.get("lr_proj")?,
            weight_decay: cfg.get("weight_decay")?,
            beta1: cfg.get("beta1")?,
            beta2: cfg.get("beta2")?,
            eps: cfg.get("eps")?,
        },
        warmup_fraction: cfg.get("warmup_fraction")?,
    };
    t.validate()?;
    Ok(t)
}

const METRICS_HEADER: &str = "epoch,train_loss,train_mae,train_rmse,eval_mae,eval_rmse";

/// Rows of a previous `metrics.csv` up to and including `epochs`.
fn prior_metrics(path: &Path, epochs: usize) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(METRICS_HEADER) {
        return Err(data_err(path, "missing metrics header"));
    }
    let mut out = Vec::new();
    for l in lines {
        let e: usize = l.split(',').next().and_then(|s| s.parse().ok()).ok_or_else(|| data_err(path, "bad row"))?;
        if e <= epochs {
            out.push(l.to_string());
        }
    }
    if out.len() != epochs {
        return Err(data_err(path, format!("expected {epochs} rows before resuming, found {}", out.len())));
    }
    Ok(out)
}

pub fn train(cfg: &Config) -> Result<(), CliError> {
    let tc = train_config(cfg)?;
    let eval_fraction: f64 = cfg.get("eval_fraction")?;
    if !(0.0..1.0).contains(&eval_fraction) {
        return Err(usage("eval_fraction must lie in [0, 1)"));
    }
    let checkpoint_every: usize = cfg.get("checkpoint_every")?;
    let stop_after: usize = cfg.get("stop_after")?;
    let ds = load_dataset(&cfg.path("data_dir"))?;
    let (ti, ei) = split_by_scene(&ds.rows, eval_fraction);
    let train_set: Vec<Example> = ti.iter().map(|&i| Example::from(&ds.rows[i])).collect();
    let eval_set: Vec<Example> = ei.iter().map(|&i| Example::from(&ds.rows[i])).collect();
    let exec = Execution::default();
    let out = cfg.path("out_dir");

    let resume: Option<PathBuf> = cfg.opt("resume")?;
    let (mut state, mut rows) = match &resume {
        Some(p) => {
            let ck = load_checkpoint(p).map_err(|e| data_err(p, e))?;
            if ck.k_iters != tc.k_iters {
                return Err(usage(format!("checkpoint has k_iters {}, config has {}", ck.k_iters, tc.k_iters)));
            }
            let state = ck.into_state().ok_or_else(|| data_err(p, "checkpoint has no optimiser state"))?;
            let prior = p.parent().unwrap_or(Path::new(".")).join("metrics.csv");
            let rows = prior_metrics(&prior, state.epochs_done)?;
            (state, rows)
        }
        None => (init_state(&train_set, &tc)?, Vec::new()),
    };
    let last = if stop_after > 0 { stop_after.min(tc.epochs) } else { tc.epochs };
    while state.epochs_done < last {
        let m = train_epoch(&mut state, &train_set, &eval_set, &tc, exec)?;
        let (em, er) = m.eval.map_or((String::new(), String::new()), |e| (g17(e.mae), g17(e.rmse)));
        rows.push(format!("{},{},{},{},{em},{er}", m.epoch, g17(m.train.loss), g17(m.train.mae), g17(m.train.rmse)));
        eprintln!("epoch {:>3}  train_mae {:.4}  eval_mae {}", m.epoch, m.train.mae, m.eval.map_or("-".into(), |e| format!("{:.4}", e.mae)));
        if checkpoint_every > 0 && m.epoch % checkpoint_every == 0 {
            let ck = Checkpoint::from_state(&state, tc.k_iters);
            write_with(&out.join(format!("checkpoint_e{}.greg", m.epoch)), |b| {
                framegate::regressor::write_checkpoint(&ck, b)
            })?;
        }
    }

    let ck = Checkpoint::from_state(&state, tc.k_iters);
    write_with(&out.join("model.greg"), |b| framegate::regressor::write_checkpoint(&ck, b))?;
    let mut metrics = String::from(METRICS_HEADER);
    metrics.push('\n');
    for r in &rows {
        metrics.push_str(r);
        metrics.push('\n');
    }
    write_atomic(&out.join("metrics.csv"), metrics.as_bytes())?;

    let pred = predict_all(&state.model, &eval_set, tc.k_iters, exec);
    let mut csv = String::from("pair_id,scene,tau_gt,tau_pred\n");
    for (&i, p) in ei.iter().zip(&pred) {
        let r = &ds.rows[i];
        csv.push_str(&format!("{},{},{},{}\n", r.pair_id, r.scene, g17(r.tau_gt), g17(*p)));
    }
    write_atomic(&out.join("eval_predictions.csv"), csv.as_bytes())?;

    let stats = (!eval_set.is_empty()).then(|| error_stats(&pred, &eval_set, tc.delta));
    let mean_train = train_set.iter().map(|e| e.target).sum::<f64>() / train_set.len() as f64;
    let baseline = eval_set.iter().map(|e| (e.target - mean_train).abs()).sum::<f64>() / eval_set.len().max(1) as f64;
    let report = json!({
        "epochs_done": state.epochs_done,
        "complete": state.epochs_done == tc.epochs,
        "n_train": train_set.len(),
        "n_eval": eval_set.len(),
        "n_trainable": state.model.n_trainable(),
        "eval_mae": stats.map_or(Value::Null, |s| num(s.mae)),
        "eval_rmse": stats.map_or(Value::Null, |s| num(s.rmse)),
        "eval_mae_constant_baseline": if eval_set.is_empty() { Value::Null } else { num(baseline) },
        "config": config_json(cfg),
    });
    write_json(&out.join("train_report.json"), &report)?;
    match stats {
        Some(s) => println!("eval_mae={}", g17(s.mae)),
        None => println!("eval_mae=nan"),
    }
    Ok(())
}

/// Fixed similarity applied to estimated trajectories and point sets so
/// that evaluation exercises alignment.
fn estimate_gauge() -> Sim3Transform {
    Sim3Transform::new(0.5, UnitQuaternion::from_euler_angles(0.0, 0.0, PI / 6.0), Vector3::new(1.0, -2.0, 0.5))
}

/// Poses at every frame from poses at kept frames: SLERP and linear
/// interpolation between neighbouring keyframes, held constant after the
/// last one.
fn interpolate_keyframes(poses: &[SE3Pose], kept: &[usize]) -> Vec<SE3Pose> {
    (0..poses.len())
        .map(|f| {
            let next = kept.partition_point(|&k| k <= f);
            let a = kept[next - 1];
            match kept.get(next) {
                Some(&b) if a != f => {
                    let t = (f - a) as f64 / (b - a) as f64;
                    let (pa, pb) = (&poses[a], &poses[b]);
                    SE3Pose::new(pa.rotation.slerp(&pb.rotation, t), pa.translation.lerp(&pb.translation, t))
                }
                _ => poses[a],
            }
        })
        .collect()
}

/// PMAP frames from `dir` in file-name order, with one pose per frame.
fn read_pmap_stream(dir: &Path, poses: Option<PathBuf>) -> Result<(Vec<PointMapFrame>, Trajectory), CliError> {
    let poses = poses.ok_or_else(|| usage("frames_dir requires poses"))?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| data_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pmap"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(data_err(dir, "no .pmap files"));
    }
    let frames = files
        .iter()
        .enumerate()
        .map(|(k, p)| pmap::read(open(p)?, k).map_err(|e| data_err(p, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let trajectory = load_tum(&poses)?;
    if trajectory.len() != frames.len() {
        return Err(data_err(&poses, format!("{} poses for {} frames", trajectory.len(), frames.len())));
    }
    Ok((frames, trajectory))
}

pub fn gate(cfg: &Config) -> Result<(), CliError> {
    let d = dataset_config(cfg)?;
    let kind: PolicyKind = cfg.str("policy").parse().map_err(|_| usage(format!("unknown policy {:?}", cfg.str("policy"))))?;
    let pc = PolicyConfig {
        kind,
        tau_keep: cfg.get("tau_keep")?,
        omega_k: cfg.get("omega_k")?,
        strict: cfg.get("strict")?,
        thresholds: d.label.thresholds,
        window: d.label.window,
        align: d.label.align,
    };
    pc.validate()?;
    let compare: bool = cfg.get("compare_teacher")?;
    let exec = Execution::default();
    let (frames, trajectory) = match cfg.opt::<PathBuf>("frames_dir")? {
        Some(dir) => read_pmap_stream(&dir, cfg.opt("poses")?)?,
        None => {
            let seq = render_sequence(&d, "stream-", cfg.get("stream")?, exec)?;
            (seq.frames, seq.trajectory)
        }
    };
    let stream = FrameStream::new(frames, trajectory.poses().to_vec())?;

    let ck = if kind == PolicyKind::StudentGate {
        let p = cfg.path("checkpoint");
        Some(load_checkpoint(&p).map_err(|e| data_err(&p, e))?)
    } else {
        None
    };
    let student = ck.as_ref().map(|c| Student { model: &c.model, k_iters: c.k_iters });
    let decisions = run_policy(&stream, &pc, student)?;
    let teacher = if compare && kind != PolicyKind::TeacherGate {
        Some(run_policy(&stream, &PolicyConfig { kind: PolicyKind::TeacherGate, ..pc }, None)?)
    } else {
        None
    };

    let out = cfg.path("out_dir");
    write_with(&out.join("decisions.csv"), |b| write_decisions(&decisions, b))?;
    if cfg.get::<bool>("write_frames")? {
        for (f, frame) in stream.frames().iter().enumerate() {
            write_with(&out.join("frames").join(format!("{f:06}.pmap")), |b| pmap::write(frame, b))?;
        }
    }
    write_with(&out.join("gt.txt"), |b| write_tum(&trajectory, b))?;
    let kept: Vec<usize> = decisions.iter().filter(|g| g.kept).map(|g| g.frame).collect();
    let gauge = estimate_gauge();
    let est_poses: Vec<SE3Pose> =
        interpolate_keyframes(trajectory.poses(), &kept).iter().map(|p| gauge.apply_pose(p)).collect();
    let est = Trajectory::new(trajectory.stamps().to_vec(), est_poses)?;
    write_with(&out.join("est.txt"), |b| write_tum(&est, b))?;

    let world = |f: usize| {
        let frame = &stream.frames()[f];
        let pose = &trajectory.poses()[f];
        (0..frame.len()).filter(|&i| frame.is_valid(i)).map(|i| pose.apply(&frame.points()[i])).collect::<Vec<_>>()
    };
    let pred: Vec<Vector3<f64>> = kept.iter().flat_map(|&f| world(f)).collect();
    let reference: Vec<Vector3<f64>> = (0..stream.len()).flat_map(world).collect();
    write_xyz(&out.join("pred.xyz"), &pred)?;
    write_xyz(&out.join("ref.xyz"), &reference)?;

    let agree = match &teacher {
        Some(t) => num(agreement(&decisions, t)?),
        None => Value::Null,
    };
    let report = json!({
        "policy": kind.to_string(),
        "n_frames": decisions.len(),
        "n_kept": kept.len(),
        "kept_fraction": num(kept_fraction(&decisions)),
        "downsample": num(downsample_factor(&decisions)),
        "teacher_kept_fraction": teacher.as_deref().map_or(Value::Null, |t| num(kept_fraction(t))),
        "teacher_agreement": agree,
        "config": config_json(cfg),
    });
    write_json(&out.join("gate_report.json"), &report)?;
    println!(
        "policy={kind} kept={}/{} downsample={:.3}{}",
        kept.len(),
        decisions.len(),
        downsample_factor(&decisions),
        teacher.map_or(String::new(), |_| format!(" teacher_agreement={}", g17(report["teacher_agreement"].as_f64().unwrap_or(f64::NAN))))
    );
    Ok(())
}

fn load_tum(path: &Path) -> Result<Trajectory, CliError> {
    read_tum(open(path)?).map_err(|e| data_err(path, e))
}

fn ate_config(cfg: &Config) -> Result<AteConfig, CliError> {
    let align: AlignMode = cfg.str("align").parse().map_err(|_| usage(format!("unknown align mode {:?}", cfg.str("align"))))?;
    let max_dt: f64 = cfg.get("max_dt")?;
    if !(max_dt >= 0.0) {
        return Err(usage("max_dt must be >= 0"));
    }
    Ok(AteConfig { align, max_dt })
}

fn ate_json(r: &AteReport) -> Value {
    json!({
        "ate_rmse_cm": num(r.rmse_cm),
        "ate_mean_cm": num(r.mean_cm),
        "ate_max_cm": num(r.max_cm),
        "n_matched": r.n_matched,
    })
}

fn recon_json(r: &ReconReport) -> Value {
    json!({
        "acc_m": num(r.acc_m),
        "comp_m": num(r.comp_m),
        "chamfer_m": num(r.chamfer_m),
        "f_2cm": num(r.f2),
        "f_5cm": num(r.f5),
    })
}

/// `metric,value` CSV of a flat JSON object.
fn flat_csv(v: &Value) -> String {
    let mut s = String::from("metric,value\n");
    for (k, x) in v.as_object().expect("object") {
        let val = x.as_f64().map_or_else(|| x.to_string(), g17);
        s.push_str(&format!("{k},{val}\n"));
    }
    s
}

pub fn eval_traj(cfg: &Config) -> Result<(), CliError> {
    let ac = ate_config(cfg)?;
    let est = load_tum(&cfg.path("est"))?;
    let gt = load_tum(&cfg.path("gt"))?;
    let r = ate(&est, &gt, &ac)?;
    let mut v = ate_json(&r);
    let out = cfg.path("out");
    write_atomic(&with_ext(&out, "csv"), flat_csv(&v).as_bytes())?;
    v["config"] = config_json(cfg);
    write_json(&with_ext(&out, "json"), &v)?;
    println!("ate_rmse_cm={}", g17(r.rmse_cm));
    Ok(())
}

pub fn eval_recon(cfg: &Config) -> Result<(), CliError> {
    let pred = read_xyz(&cfg.path("pred"))?;
    let reference = read_xyz(&cfg.path("ref"))?;
    let r = recon_metrics(&pred, &reference, Execution::default())?;
    let mut v = recon_json(&r);
    let out = cfg.path("out");
    write_atomic(&with_ext(&out, "csv"), flat_csv(&v).as_bytes())?;
    v["config"] = config_json(cfg);
    write_json(&with_ext(&out, "json"), &v)?;
    println!("chamfer_m={} f_2cm={} f_5cm={}", g17(r.chamfer_m), g17(r.f2), g17(r.f5));
    Ok(())
}

struct RunMetrics {
    ate: AteReport,
    recon: ReconReport,
    cost: CostReport,
    decisions: Vec<GateDecision>,
}

fn run_metrics(dir: &Path, ac: &AteConfig, model: &CostModel) -> Result<RunMetrics, CliError> {
    let dp = dir.join("decisions.csv");
    let decisions = read_decisions(open(&dp)?).map_err(|e| data_err(&dp, e))?;
    let ate = ate(&load_tum(&dir.join("est.txt"))?, &load_tum(&dir.join("gt.txt"))?, ac)?;
    let recon =
        recon_metrics(&read_xyz(&dir.join("pred.xyz"))?, &read_xyz(&dir.join("ref.xyz"))?, Execution::default())?;
    let cost = account_cost(&decisions, model);
    Ok(RunMetrics { ate, recon, cost, decisions })
}

/// `(name, value)` pairs compared between run and baseline.
fn headline(m: &RunMetrics) -> Vec<(&'static str, f64)> {
    vec![
        ("ate_rmse_cm", m.ate.rmse_cm),
        ("chamfer_m", m.recon.chamfer_m),
        ("f_2cm", m.recon.f2),
        ("f_5cm", m.recon.f5),
        ("tflops_total", m.cost.total_tflops),
        ("tflops_gate", m.cost.gate_tflops),
        ("tflops_slam", m.cost.slam_tflops),
        ("kept_fraction", kept_fraction(&m.decisions)),
        ("downsample", downsample_factor(&m.decisions)),
    ]
}

/// Relative change in percent: 0 when equal, `None` when the baseline is 0.
fn delta_pct(run: f64, base: f64) -> Option<f64> {
    if run == base {
        Some(0.0)
    } else if base == 0.0 {
        None
    } else {
        Some(100.0 * (run - base) / base)
    }
}

pub fn report(cfg: &Config) -> Result<(), CliError> {
    let ac = ate_config(cfg)?;
    let track_share: f64 = cfg.get("track_share")?;
    let given: [Option<f64>; 3] = [cfg.opt("c_gate")?, cfg.opt("c_track")?, cfg.opt("c_backend")?];
    let (model, source) = match given {
        [Some(g), Some(t), Some(b)] => (CostModel::new(g, t, b)?, "given".to_string()),
        [None, None, None] => (calibrate(&TUM_ROW, track_share, 0.005)?.model, "calibrated".to_string()),
        _ => return Err(usage("set all of c_gate, c_track, c_backend or none")),
    };
    let run = run_metrics(&cfg.path("run_dir"), &ac, &model)?;
    let base = run_metrics(&cfg.path("baseline_dir"), &ac, &model)?;

    let (hr, hb) = (headline(&run), headline(&base));
    let mut top = Map::new();
    let (mut run_obj, mut base_obj, mut delta_obj) = (Map::new(), Map::new(), Map::new());
    let mut csv = String::from("metric,run,baseline,delta_pct\n");
    for ((name, r), (_, b)) in hr.iter().zip(&hb) {
        let d = delta_pct(*r, *b);
        run_obj.insert(name.to_string(), num(*r));
        base_obj.insert(name.to_string(), num(*b));
        delta_obj.insert(name.to_string(), d.map_or(Value::Null, num));
        csv.push_str(&format!("{name},{},{},{}\n", g17(*r), g17(*b), d.map_or(String::new(), g17)));
    }
    for k in ["ate_rmse_cm", "chamfer_m", "f_2cm", "f_5cm", "tflops_total"] {
        top.insert(k.to_string(), run_obj[k].clone());
    }
    top.insert("run".into(), Value::Object(run_obj));
    top.insert("baseline".into(), Value::Object(base_obj));
    top.insert("delta_pct".into(), Value::Object(delta_obj));
    top.insert(
        "cost_model".into(),
        json!({
            "source": source,
            "c_gate": num(model.c_gate),
            "c_track": num(model.c_track),
            "c_backend": num(model.c_backend),
        }),
    );
    top.insert("config".into(), config_json(cfg));
    let out = cfg.path("out");
    write_json(&with_ext(&out, "json"), &Value::Object(top))?;
    write_atomic(&with_ext(&out, "csv"), csv.as_bytes())?;
    print!("{csv}");
    Ok(())
}
