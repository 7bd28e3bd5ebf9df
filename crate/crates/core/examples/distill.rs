//! Trains the student on the default synthetic dataset and prints
//! per-epoch metrics.

use std::time::Instant;

use framegate::exec::Execution;
use framegate::oracle::{build_dataset, split_by_scene, DatasetConfig};
use framegate::regressor::{train, Example, TrainConfig};

fn main() -> framegate::Result<()> {
    let t0 = Instant::now();
    let ds = build_dataset(&DatasetConfig::default(), Execution::default())?;
    let (tr, ev) = split_by_scene(&ds.rows, 0.2);
    let train_set: Vec<Example> = tr.iter().map(|&i| Example::from(&ds.rows[i])).collect();
    let eval_set: Vec<Example> = ev.iter().map(|&i| Example::from(&ds.rows[i])).collect();
    println!("dataset {} train / {} eval in {:.1?}", train_set.len(), eval_set.len(), t0.elapsed());
    let mean = eval_set.iter().map(|e| e.target).sum::<f64>() / eval_set.len() as f64;
    let base = eval_set.iter().map(|e| (e.target - mean).abs()).sum::<f64>() / eval_set.len() as f64;
    println!("constant-mean eval MAE {base:.4}");
    let t1 = Instant::now();
    let (_, hist) = train(&train_set, &eval_set, &TrainConfig::default(), Execution::default())?;
    for m in &hist {
        let e = m.eval.expect("eval split");
        println!("epoch {:2} train mae {:.4} rmse {:.4} | eval mae {:.4} rmse {:.4}", m.epoch, m.train.mae, m.train.rmse, e.mae, e.rmse);
    }
    println!("trained in {:.1?}", t1.elapsed());
    Ok(())
}
