use serde::{Deserialize, Serialize};

use super::{Result, WorldError};

/// RGB color with components in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rgb(pub [f64; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0.05, 0.05, 0.05]);
    pub const WHITE: Rgb = Rgb([0.92, 0.92, 0.92]);
    pub const RED: Rgb = Rgb([0.75, 0.1, 0.1]);
    pub const BLUE: Rgb = Rgb([0.1, 0.2, 0.75]);
    pub const GRAY: Rgb = Rgb([0.5, 0.5, 0.5]);

    pub fn distance(&self, other: &Rgb) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|c| (0.0..=1.0).contains(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneDirection {
    /// Traffic moves toward `+x`.
    Forward,
    /// Traffic moves toward `-x`.
    Backward,
}

impl LaneDirection {
    pub fn heading(self) -> f64 {
        match self {
            LaneDirection::Forward => 0.0,
            LaneDirection::Backward => std::f64::consts::PI,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            LaneDirection::Forward => 1.0,
            LaneDirection::Backward => -1.0,
        }
    }
}

/// Straight lane parallel to the world `x` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lane {
    pub center_y: f64,
    pub width: f64,
    pub direction: LaneDirection,
    pub x_min: f64,
    pub x_max: f64,
}

impl Lane {
    pub fn y_range(&self) -> (f64, f64) {
        (self.center_y - self.width / 2.0, self.center_y + self.width / 2.0)
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
}

/// Marked crossing at `x`, spanning `[y_min, y_max]` across the road.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Crosswalk {
    pub x: f64,
    pub width: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Extruded polygon standing on the ground (buildings, poles, hedges).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticObject {
    pub footprint: Vec<[f64; 2]>,
    pub height: f64,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadLayout {
    pub lanes: Vec<Lane>,
    #[serde(default)]
    pub crosswalk: Option<Crosswalk>,
    #[serde(default)]
    pub intersection: bool,
    #[serde(default)]
    pub static_objects: Vec<StaticObject>,
}

impl RoadLayout {
    pub fn validate(&self) -> Result<()> {
        if self.lanes.is_empty() {
            return Err(WorldError::Config("layout has no lanes".into()));
        }
        for (i, lane) in self.lanes.iter().enumerate() {
            if !(lane.width > 0.0) {
                return Err(WorldError::Config(format!("lane {i} has width {}", lane.width)));
            }
            if !(lane.x_max > lane.x_min) {
                return Err(WorldError::Config(format!("lane {i} has empty extent")));
            }
        }
        if let Some(cw) = &self.crosswalk {
            if !(cw.width > 0.0) || !(cw.y_max > cw.y_min) {
                return Err(WorldError::Config("crosswalk has empty extent".into()));
            }
            let crosses = self.lanes.iter().any(|l| {
                let (lo, hi) = l.y_range();
                cw.y_min < hi && cw.y_max > lo && cw.x >= l.x_min && cw.x <= l.x_max
            });
            if !crosses {
                return Err(WorldError::Config("crosswalk does not intersect any lane".into()));
            }
        }
        for (i, obj) in self.static_objects.iter().enumerate() {
            if obj.footprint.len() < 3 || !(obj.height > 0.0) || !obj.color.is_valid() {
                return Err(WorldError::Config(format!("static object {i} is malformed")));
            }
        }
        Ok(())
    }

    pub fn lane(&self, index: usize) -> Result<&Lane> {
        self.lanes
            .get(index)
            .ok_or_else(|| WorldError::Config(format!("lane {index} does not exist")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lane(center_y: f64) -> Lane {
        Lane {
            center_y,
            width: 3.5,
            direction: LaneDirection::Forward,
            x_min: -100.0,
            x_max: 100.0,
        }
    }

    #[test]
    fn crosswalk_must_touch_a_lane() {
        let mut layout = RoadLayout {
            lanes: vec![lane(0.0)],
            crosswalk: Some(Crosswalk { x: 0.0, width: 3.0, y_min: -3.0, y_max: 3.0 }),
            intersection: true,
            static_objects: Vec::new(),
        };
        layout.validate().unwrap();
        layout.crosswalk = Some(Crosswalk { x: 0.0, width: 3.0, y_min: 10.0, y_max: 12.0 });
        assert!(layout.validate().is_err());
    }

    #[test]
    fn lane_width_must_be_positive() {
        let mut l = lane(0.0);
        l.width = 0.0;
        let layout = RoadLayout { lanes: vec![l], crosswalk: None, intersection: false, static_objects: Vec::new() };
        assert!(layout.validate().is_err());
    }

    #[test]
    fn color_distance() {
        assert_eq!(Rgb::BLACK.distance(&Rgb::BLACK), 0.0);
        assert!((Rgb([0.0; 3]).distance(&Rgb([1.0; 3])) - 3f64.sqrt()).abs() < 1e-15);
    }
}
