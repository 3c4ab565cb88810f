//! Compares onboard and roadside detections over a batch: how often each
//! camera sees the pedestrian, ranging error, and how far away it is first
//! seen.

use pedsim::harness::simulate_episode;
use pedsim::perception::{DetectionSource, PerceptionMode};
use pedsim::world::builtin_scenario;
use rayon::prelude::*;

fn main() {
    let n = 200;
    for name in ["jaywalking", "background_blending"] {
        let s = builtin_scenario(name).expect("built-in");
        let recs: Vec<_> = (0..n)
            .into_par_iter()
            .map(|i| simulate_episode(&s, 5, i, PerceptionMode::V2i).expect("episode"))
            .collect();
        println!("{name}:");
        for source in [DetectionSource::Onboard, DetectionSource::Roadside] {
            let mut frames_seen = 0usize;
            let mut frames = 0usize;
            let mut err = Vec::new();
            for r in &recs {
                frames += r.frames.len();
                for d in r.detections.iter().filter(|d| d.source == source) {
                    frames_seen += 1;
                    let e = [
                        d.est_position_world[0] - d.truth_position_world[0],
                        d.est_position_world[1] - d.truth_position_world[1],
                    ];
                    err.push(e[0].hypot(e[1]));
                }
            }
            err.sort_by(f64::total_cmp);
            let median = err.get(err.len() / 2).copied().unwrap_or(f64::NAN);
            println!(
                "  {source:?}: pedestrian seen in {:.1}% of frames, median localization error {median:.3} m",
                100.0 * frames_seen as f64 / frames as f64
            );
        }
    }
}
