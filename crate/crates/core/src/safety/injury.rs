use serde::{Deserialize, Serialize};

use super::{Result, SafetyError};

pub const INJURY_INTERCEPT: f64 = -2.9893;
/// Coefficient of squared impact speed (km/h by default).
pub const INJURY_SPEED_SQ: f64 = 0.0013;
/// Coefficient of age in years.
pub const INJURY_AGE: f64 = 0.0286;

/// Unit the injury model expects its impact speed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedUnit {
    #[default]
    Kmh,
    Ms,
}

impl SpeedUnit {
    /// Converts a simulator speed in m/s to this unit.
    pub fn from_ms(self, v: f64) -> f64 {
        match self {
            SpeedUnit::Kmh => v * 3.6,
            SpeedUnit::Ms => v,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpeedUnit::Kmh => "km/h",
            SpeedUnit::Ms => "m/s",
        }
    }
}

/// Probability of severe injury or death: `p_collision` times the logistic
/// of `-2.9893 + 0.0013 V² + 0.0286 A`, with `V` already in the model's unit.
pub fn injury_probability(p_collision: f64, v: f64, age: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_collision) {
        return Err(SafetyError::Domain(format!("collision probability {p_collision}")));
    }
    if !(v >= 0.0 && v.is_finite()) || !(age >= 0.0 && age.is_finite()) {
        return Err(SafetyError::Domain(format!("V = {v}, A = {age}")));
    }
    let l = INJURY_INTERCEPT + INJURY_SPEED_SQ * v * v + INJURY_AGE * age;
    // 1/(1+e^-L) equals e^L/(1+e^L) and cannot overflow for large L.
    Ok(p_collision / (1.0 + (-l).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        let base = (-2.9893f64).exp() / (1.0 + (-2.9893f64).exp());
        assert!((injury_probability(1.0, 0.0, 0.0).unwrap() - base).abs() < 1e-15);
        assert!((injury_probability(1.0, 0.0, 0.0).unwrap() - 0.04786).abs() < 1e-4);
        let l: f64 = -2.9893 + 0.0013 * 2500.0 + 0.0286 * 30.0;
        assert!((l - 1.1187).abs() < 1e-12);
        assert!((injury_probability(1.0, 50.0, 30.0).unwrap() - 0.7537).abs() < 1e-3);
    }

    #[test]
    fn zero_collision_probability_zero_injury() {
        for v in [0.0, 10.0, 80.0] {
            for a in [0.0, 40.0, 90.0] {
                assert_eq!(injury_probability(0.0, v, a).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn out_of_range_inputs_rejected() {
        assert!(injury_probability(1.1, 0.0, 0.0).is_err());
        assert!(injury_probability(-0.1, 0.0, 0.0).is_err());
        assert!(injury_probability(1.0, -1.0, 0.0).is_err());
        assert!(injury_probability(1.0, 1.0, -1.0).is_err());
        assert!(injury_probability(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn unit_conversion() {
        assert!((SpeedUnit::Kmh.from_ms(10.0) - 36.0).abs() < 1e-12);
        assert_eq!(SpeedUnit::Ms.from_ms(10.0), 10.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn increasing_in_speed_and_age(v in 0.01f64..100.0, a in 0.0f64..100.0, dv in 0.01f64..10.0, da in 0.01f64..10.0) {
                let p = injury_probability(1.0, v, a).unwrap();
                prop_assert!(injury_probability(1.0, v + dv, a).unwrap() > p);
                prop_assert!(injury_probability(1.0, v, a + da).unwrap() > p);
            }

            #[test]
            fn linear_in_collision_probability(p in 0.0f64..=1.0, v in 0.0f64..100.0, a in 0.0f64..100.0) {
                let one = injury_probability(1.0, v, a).unwrap();
                let got = injury_probability(p, v, a).unwrap();
                prop_assert!((got - p * one).abs() <= 1e-15);
            }
        }
    }
}
