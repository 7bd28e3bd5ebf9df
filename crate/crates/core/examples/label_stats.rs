//! Prints label statistics for the default synthetic dataset.

use std::time::Instant;

use framegate::exec::Execution;
use framegate::oracle::{build_dataset, DatasetConfig};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = DatasetConfig { seed, ..DatasetConfig::default() };
    let t = Instant::now();
    let d = build_dataset(&cfg, Execution::default()).expect("dataset");
    println!("{} pairs in {:.2?}", d.len(), t.elapsed());
    println!("tau_gt histogram (deciles): {:?}", d.label_histogram());
    let (lo, hi) = d.rows.iter().fold((1.0f64, 0.0f64), |(lo, hi), r| (lo.min(r.tau_gt), hi.max(r.tau_gt)));
    println!("range [{lo:.3}, {hi:.3}]");
    let mut trans: Vec<f64> = d.rows.iter().map(|r| r.trans_m).collect();
    trans.sort_by(f64::total_cmp);
    let edges: Vec<f64> = (1..6).map(|k| trans[k * trans.len() / 6]).collect();
    let mut sums = [(0.0, 0usize); 6];
    for r in &d.rows {
        let b = edges.iter().take_while(|e| r.trans_m >= **e).count();
        sums[b].0 += r.tau_gt;
        sums[b].1 += 1;
    }
    let means: Vec<String> = sums.iter().map(|(s, n)| format!("{:.3}", s / *n as f64)).collect();
    println!("mean tau_gt by translation sextile: {}", means.join(" "));
}
