//! Prints the teacher score of frame k against frame 0 along one synthetic path.

use framegate::oracle::{
    align_to_reference, generate_scene, generate_trajectory, render_frame, RenderConfig, SceneConfig, TrajectoryConfig,
};
use framegate::utility::{score, ValidityThresholds, DEFAULT_WINDOW};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let scene = generate_scene(seed, &SceneConfig::default());
    let traj = generate_trajectory(&scene, seed, &TrajectoryConfig { n_frames: 150, ..Default::default() }).unwrap();
    let cfg = RenderConfig::default();
    let frames: Vec<_> = traj.poses().iter().enumerate().map(|(k, p)| render_frame(&scene, p, k, &cfg).unwrap()).collect();
    let thr = ValidityThresholds::default();
    for start in [0usize, 40, 80] {
        let mut line = String::new();
        for k in 0..25 {
            let cur = align_to_reference(&frames[start + k], &traj.poses()[start + k], &traj.poses()[start]);
            let s = score(&cur, &frames[start], &thr, DEFAULT_WINDOW).unwrap();
            line.push_str(&format!("{:.2}/{:.2} ", s.f_m, s.f_u));
        }
        println!("from {start}: {line}");
    }
}
