//! Trains the student on the default dataset, then compares student and
//! teacher gate decisions on unseen gating streams over a threshold grid.

use framegate::exec::Execution;
use framegate::oracle::{build_dataset, render_sequence, split_by_scene, DatasetConfig};
use framegate::policy::{agreement, kept_fraction, run_policy, FrameStream, PolicyConfig, PolicyKind, Student};
use framegate::regressor::{train, Example, TrainConfig};

fn main() -> framegate::Result<()> {
    let cfg = DatasetConfig::default();
    let ds = build_dataset(&cfg, Execution::default())?;
    let (tr, ev) = split_by_scene(&ds.rows, 0.2);
    let t: Vec<Example> = tr.iter().map(|&i| Example::from(&ds.rows[i])).collect();
    let e: Vec<Example> = ev.iter().map(|&i| Example::from(&ds.rows[i])).collect();
    let (model, hist) = train(&t, &e, &TrainConfig::default(), Execution::default())?;
    println!("eval mae {:.4}", hist.last().unwrap().eval.unwrap().mae);
    let student = Student { model: &model, k_iters: 4 };
    for k in 0..8 {
        let seq = render_sequence(&cfg, "stream-", k, Execution::default())?;
        let stream = FrameStream::new(seq.frames, seq.trajectory.poses().to_vec())?;
        let teacher = run_policy(&stream, &PolicyConfig::with_kind(PolicyKind::TeacherGate), None)?;
        let mut line = format!("scene {k:2} teacher kept {:.3} |", kept_fraction(&teacher));
        for tk in [0.5, 0.6, 0.67, 0.7] {
            let pc = PolicyConfig { tau_keep: tk, ..PolicyConfig::with_kind(PolicyKind::StudentGate) };
            let s = run_policy(&stream, &pc, Some(student))?;
            line += &format!(" τ={tk}: kept {:.3} agree {:.3} |", kept_fraction(&s), agreement(&teacher, &s)?);
        }
        println!("{line}");
    }
    Ok(())
}
