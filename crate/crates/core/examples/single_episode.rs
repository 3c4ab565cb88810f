//! Runs one episode of a built-in scenario in both modes and prints what
//! happened.
//!
//! cargo run --release --example single_episode -- [scenario] [seed] [index]

use pedsim::harness::simulate_episode;
use pedsim::perception::{DetectionSource, PerceptionMode};
use pedsim::safety::first_detection_distance;
use pedsim::world::builtin_scenario;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "jaywalking".into());
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let index: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let scenario = builtin_scenario(&name).unwrap_or_else(|e| panic!("{e}"));

    for mode in PerceptionMode::ALL {
        let rec = simulate_episode(&scenario, seed, index, mode).expect("episode runs");
        let onboard = rec.detections.iter().filter(|d| d.source == DetectionSource::Onboard).count();
        let roadside = rec.detections.len() - onboard;
        println!("== {mode} ==");
        println!(
            "{} frames ({:?}), {onboard} onboard and {roadside} roadside detections",
            rec.frames.len(),
            rec.termination
        );
        if let Some(d) = first_detection_distance(&rec) {
            println!("first detection at {d:.1} m");
        }
        for o in &rec.outcomes {
            println!(
                "pedestrian {} (age {:.0}): {} | MD {:.2} m, TMD {:.2} s, CS {:.2} m/s{}",
                o.pedestrian,
                o.age,
                o.label,
                o.indicators.md,
                o.indicators.tmd,
                o.indicators.cs,
                o.injury_given_collision.map(|p| format!(", P(injury) {p:.3}")).unwrap_or_default()
            );
        }
        let ego = rec.ego_index;
        let min_speed = rec.frames.iter().map(|f| f.vehicles[ego].speed).fold(f64::INFINITY, f64::min);
        println!("lowest ego speed {min_speed:.2} m/s\n");
    }
}
