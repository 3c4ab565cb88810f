//! Prints the injury-probability surface over impact speed and age.

use pedsim::safety::{injury_probability, SURFACE_AGES, SURFACE_SPEEDS};

fn main() {
    print!("{:>8}", "km/h");
    for a in SURFACE_AGES {
        print!("{:>7}", format!("{a}y"));
    }
    println!();
    for v in SURFACE_SPEEDS {
        print!("{v:>8}");
        for a in SURFACE_AGES {
            print!("{:>7.3}", injury_probability(1.0, v, a).expect("in range"));
        }
        println!();
    }
}
