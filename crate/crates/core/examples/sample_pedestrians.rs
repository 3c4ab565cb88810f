//! Samples pedestrians from the default population table and tabulates
//! them by age group.

use std::collections::BTreeMap;

use pedsim::stochastic::rng::stream_from_seed;
use pedsim::stochastic::{sample_profile, DemographicsTable};

fn main() {
    let table = DemographicsTable::default();
    let mut rng = stream_from_seed(7);
    let mut groups: BTreeMap<String, (usize, f64, f64)> = BTreeMap::new();
    let n = 20_000;
    for _ in 0..n {
        let p = sample_profile(&table, &mut rng);
        let e = groups.entry(format!("{:?}", p.age_group)).or_default();
        e.0 += 1;
        e.1 += p.base_speed;
        e.2 += p.age;
    }
    println!("{:<10} {:>7} {:>12} {:>9}", "group", "share", "mean speed", "mean age");
    for (g, (count, speed, age)) in groups {
        let c = count as f64;
        println!("{g:<10} {:>7.3} {:>10.2} m/s {:>9.1}", c / n as f64, speed / c, age / c);
    }

    let p = sample_profile(&table, &mut rng);
    println!("\none draw: {}", serde_json::to_string(&p).expect("serializable"));
}
