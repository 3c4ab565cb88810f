//! Minimum distance, time to minimum distance and conflicting speed for a
//! car approaching a crossing pedestrian, at a few pedestrian delays.

use pedsim::safety::{classify_event, compute_indicators, AgentTrack, ConflictCriteria};

fn main() {
    let dt = 0.05;
    let frames = 120;
    for delay in [0.0, 1.0, 2.0, 3.0, 4.0] {
        // Car at 10 m/s along y = 0, front bumper reaching x = 0 at t = 4 s.
        let car: Vec<[f64; 2]> = (0..frames).map(|k| [-40.0 + 10.0 * k as f64 * dt, 0.0]).collect();
        // Pedestrian at 1.4 m/s northward along x = 0, starting 6 m south.
        let ped: Vec<[f64; 2]> = (0..frames)
            .map(|k| {
                let t = (k as f64 * dt - delay).max(0.0);
                [0.0, -6.0 + 1.4 * t]
            })
            .collect();
        let ind = compute_indicators(
            &AgentTrack::new(car, Vec::new(), 0.95),
            &AgentTrack::new(ped, Vec::new(), 0.25),
            5.0,
            dt,
        )
        .expect("aligned tracks");
        let label = classify_event(&ind, false, &ConflictCriteria::default());
        println!(
            "delay {delay:.0} s: MD {:6.2} m  TMD {:4.2} s  CS {:5.2} m/s  frame {:3}  {label}",
            ind.md, ind.tmd, ind.cs, ind.frame
        );
    }
}
