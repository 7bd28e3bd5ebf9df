//! Library-level pipeline: synthetic labels, files on disk, training,
//! checkpoints and gating.

use framegate::exec::Execution;
use framegate::metrics::{account_cost, calibrate, recon_metrics, DEFAULT_TRACK_SHARE, TUM_ROW};
use framegate::oracle::{
    build_dataset, read_descriptors, read_labels, render_sequence, split_by_scene, write_descriptors, write_labels,
    Dataset, DatasetConfig, RenderConfig, TrajectoryConfig,
};
use framegate::policy::{kept_fraction, run_policy, FrameStream, PolicyConfig, PolicyKind, Student};
use framegate::regressor::{predict_all, read_checkpoint, train, write_checkpoint, Checkpoint, Example, TrainConfig};
use framegate::utility::score;
use proptest::prelude::*;

fn small() -> DatasetConfig {
    DatasetConfig {
        n_scenes: 3,
        n_pairs: 40,
        trajectory: TrajectoryConfig { n_frames: 24, ..Default::default() },
        render: RenderConfig::with_resolution(16, 16),
        ..Default::default()
    }
}

#[test]
fn dataset_survives_disk_round_trip() {
    let ds = build_dataset(&small(), Execution::default()).unwrap();
    let (mut labels, mut desc) = (Vec::new(), Vec::new());
    write_labels(&ds.rows, &mut labels).unwrap();
    write_descriptors(&ds.rows, &mut desc).unwrap();
    let rows = read_labels(labels.as_slice()).unwrap();
    let (n, dim, values) = read_descriptors(desc.as_slice()).unwrap();
    assert_eq!(Dataset::from_parts(rows, n, dim, values).unwrap(), ds);
}

#[test]
fn execution_modes_agree() {
    let cfg = small();
    let seq = build_dataset(&cfg, Execution::Sequential).unwrap();
    let par = build_dataset(&cfg, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    let (ti, ei) = split_by_scene(&seq.rows, 0.34);
    let tr: Vec<Example> = ti.iter().map(|&i| Example::from(&seq.rows[i])).collect();
    let ev: Vec<Example> = ei.iter().map(|&i| Example::from(&seq.rows[i])).collect();
    let tc = TrainConfig { epochs: 2, ..Default::default() };
    let (ms, hs) = train(&tr, &ev, &tc, Execution::Sequential).unwrap();
    let (mp, hp) = train(&tr, &ev, &tc, Execution::Parallel).unwrap();
    assert_eq!(ms, mp);
    assert_eq!(hs, hp);
}

#[test]
fn checkpointed_student_gates_like_the_original() {
    let cfg = small();
    let ds = build_dataset(&cfg, Execution::default()).unwrap();
    let ex: Vec<Example> = ds.rows.iter().map(Example::from).collect();
    let (model, _) = train(&ex, &[], &TrainConfig { epochs: 2, ..Default::default() }, Execution::default()).unwrap();
    let mut buf = Vec::new();
    write_checkpoint(&Checkpoint { model: model.clone(), k_iters: 4, resume: None }, &mut buf).unwrap();
    let back = read_checkpoint(buf.as_slice()).unwrap();
    assert_eq!(back.model, model);
    let p = predict_all(&model, &ex, 4, Execution::default());
    assert_eq!(p, predict_all(&back.model, &ex, 4, Execution::default()));
    assert!(p.iter().all(|t| (0.0..=1.0).contains(t)));

    let s = render_sequence(&cfg, "stream-", 0, Execution::default()).unwrap();
    let stream = FrameStream::new(s.frames, s.trajectory.poses().to_vec()).unwrap();
    let pc = PolicyConfig::with_kind(PolicyKind::StudentGate);
    let a = run_policy(&stream, &pc, Some(Student { model: &model, k_iters: 4 })).unwrap();
    let b = run_policy(&stream, &pc, Some(Student { model: &back.model, k_iters: 4 })).unwrap();
    assert_eq!(a, b);
    assert!(a[0].kept);
}

#[test]
fn gated_stream_costs_less_and_loses_coverage() {
    let cfg = small();
    let s = render_sequence(&cfg, "stream-", 1, Execution::default()).unwrap();
    let stream = FrameStream::new(s.frames.clone(), s.trajectory.poses().to_vec()).unwrap();
    let dense = run_policy(&stream, &PolicyConfig::with_kind(PolicyKind::Dense), None).unwrap();
    let stride = run_policy(&stream, &PolicyConfig::with_kind(PolicyKind::Stride(6)), None).unwrap();
    assert_eq!(kept_fraction(&stride), 4.0 / 24.0);
    let model = calibrate(&TUM_ROW, DEFAULT_TRACK_SHARE, 0.005).unwrap().model;
    assert!(account_cost(&stride, &model).total_tflops < account_cost(&dense, &model).total_tflops);

    let world = |keep: &dyn Fn(usize) -> bool| {
        let mut pts = Vec::new();
        for (f, frame) in s.frames.iter().enumerate().filter(|(f, _)| keep(*f)) {
            let pose = &s.trajectory.poses()[f];
            pts.extend(frame.valid_points().map(|p| pose.apply(p)));
        }
        pts
    };
    let all = world(&|_| true);
    let full = recon_metrics(&all, &all, Execution::default()).unwrap();
    assert_eq!((full.chamfer_m, full.f2, full.f5), (0.0, 1.0, 1.0));
    let sparse = recon_metrics(&world(&|f| f % 6 == 0), &all, Execution::default()).unwrap();
    assert_eq!(sparse.acc_m, 0.0);
    assert!(sparse.comp_m > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rendered_pairs_score_in_unit_interval(seed in 0u64..1000, i in 0usize..12, j in 0usize..12) {
        let cfg = DatasetConfig { seed, trajectory: TrajectoryConfig { n_frames: 12, ..Default::default() }, ..small() };
        let s = render_sequence(&cfg, "", 0, Execution::Sequential).unwrap();
        let poses = s.trajectory.poses();
        let cur = framegate::oracle::align_to_reference(&s.frames[i], &poses[i], &poses[j]);
        let b = score(&cur, &s.frames[j], &cfg.label.thresholds, cfg.label.window).unwrap();
        prop_assert!((0.0..=1.0).contains(&b.s));
        prop_assert_eq!(b.s, b.f_m.min(b.f_u));
        prop_assert_eq!(b.tau_gt, 1.0 - b.s);
        if i == j {
            prop_assert_eq!(b.tau_gt, 0.0);
        }
    }
}
