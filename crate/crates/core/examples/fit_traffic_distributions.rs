//! Draws synthetic headways and speeds from the field models and fits them
//! back by maximum likelihood.
//!
//! cargo run --release --example fit_traffic_distributions -- [n] [seed]

use pedsim::stochastic::rng::stream_from_seed;
use pedsim::stochastic::{fit_exponential, fit_lognormal, ExponentialModel, LogNormalModel};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(30_000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(42);
    let mut rng = stream_from_seed(seed);

    let headway = ExponentialModel::headway();
    let h: Vec<f64> = (0..n).map(|_| headway.sample(&mut rng)).collect();
    let fit = fit_exponential(&h).expect("positive samples");
    println!("headway: lambda {:.4} (true {:.4}), mean {:.2} s", fit.lambda(), headway.lambda(), fit.mean());

    for (name, model) in [
        ("non-intersection speed", LogNormalModel::non_intersection()),
        ("intersection speed", LogNormalModel::intersection()),
    ] {
        let v: Vec<f64> = (0..n).map(|_| model.sample(&mut rng)).collect();
        let fit = fit_lognormal(&v).expect("positive samples");
        println!(
            "{name}: mu {:.4} sigma {:.4} (true {:.4} {:.4}), mode {:.2} m/s, median {:.2} m/s",
            fit.mu(),
            fit.sigma(),
            model.mu(),
            model.sigma(),
            fit.mode(),
            fit.median()
        );
    }
}
