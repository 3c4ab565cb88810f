//! Runs every built-in scenario in both modes and prints the report rows.
//!
//! cargo run --release --example scenario_sweep -- [episodes] [seed]

use pedsim::harness::simulate_episode;
use pedsim::perception::PerceptionMode;
use pedsim::safety::{aggregate_summaries, EpisodeSummary, CSV_HEADER};
use pedsim::world::{builtin_scenario, BUILTIN_SCENARIOS};
use rayon::prelude::*;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(200);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    println!("{CSV_HEADER}");
    for name in BUILTIN_SCENARIOS {
        let s = builtin_scenario(name).expect("built-in");
        for mode in PerceptionMode::ALL {
            let sums: Vec<EpisodeSummary> = (0..n)
                .into_par_iter()
                .map(|i| EpisodeSummary::from_record(&simulate_episode(&s, seed, i, mode).expect("episode")))
                .collect();
            let r = aggregate_summaries(&sums, name, mode, s.evaluation.injury_speed_unit).expect("report");
            println!("{}", r.csv_row());
        }
    }
}
