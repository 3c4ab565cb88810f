use serde::{Deserialize, Serialize};

use super::control::EgoMemory;
use super::scenario::{ControllerKind, VehicleRole};
use super::Rgb;
use crate::stochastic::PedestrianProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    /// Index of the scenario role this vehicle plays.
    pub role_index: usize,
    pub role: VehicleRole,
    pub controller: ControllerKind,
    pub lane: usize,
    pub position: [f64; 2],
    pub heading: f64,
    pub speed: f64,
    pub accel: f64,
    /// Length, width, height.
    pub extent: [f64; 3],
    pub color: Rgb,
    /// Speed the controller returns to when unobstructed.
    pub cruise_speed: f64,
    pub destination: [f64; 2],
}

impl VehicleState {
    pub fn direction(&self) -> [f64; 2] {
        let (s, c) = self.heading.sin_cos();
        [c, s]
    }

    pub fn velocity(&self) -> [f64; 2] {
        let [c, s] = self.direction();
        [self.speed * c, self.speed * s]
    }

    /// Center of the front bumper.
    pub fn front(&self) -> [f64; 2] {
        let [c, s] = self.direction();
        let h = self.extent[0] / 2.0;
        [self.position[0] + h * c, self.position[1] + h * s]
    }

    /// Signed distance along the heading from the vehicle center.
    pub fn along(&self, p: [f64; 2]) -> f64 {
        let [c, s] = self.direction();
        (p[0] - self.position[0]) * c + (p[1] - self.position[1]) * s
    }

    pub fn reached_destination(&self) -> bool {
        self.along(self.destination) <= 0.0
    }
}

/// Pedestrian behavior state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "phase")]
pub enum WalkPhase {
    Walking,
    Hurrying,
    Reversing { remaining: f64 },
    Waiting,
    Arrived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PedestrianState {
    pub role_index: usize,
    pub position: [f64; 2],
    pub heading: f64,
    pub speed: f64,
    pub profile: PedestrianProfile,
    pub body_color: Rgb,
    /// Footprint width and depth, then body height.
    pub extent: [f64; 3],
    pub destination: [f64; 2],
    pub phase: WalkPhase,
}

impl PedestrianState {
    pub fn radius(&self) -> f64 {
        self.extent[0] / 2.0
    }

    pub fn velocity(&self) -> [f64; 2] {
        let (s, c) = self.heading.sin_cos();
        [self.speed * c, self.speed * s]
    }

    pub fn arrived(&self) -> bool {
        self.phase == WalkPhase::Arrived
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub frame: usize,
    pub time: f64,
    pub vehicles: Vec<VehicleState>,
    pub pedestrians: Vec<PedestrianState>,
    /// Index into `vehicles`.
    pub ego: usize,
    pub ego_memory: EgoMemory,
}

impl WorldState {
    pub fn ego_vehicle(&self) -> &VehicleState {
        &self.vehicles[self.ego]
    }

    pub fn all_finite(&self) -> bool {
        let v = self.vehicles.iter().all(|v| {
            v.position.iter().all(|x| x.is_finite())
                && v.heading.is_finite()
                && v.speed.is_finite()
                && v.accel.is_finite()
        });
        let p = self.pedestrians.iter().all(|p| {
            p.position.iter().all(|x| x.is_finite()) && p.heading.is_finite() && p.speed.is_finite()
        });
        v && p && self.time.is_finite()
    }

    /// The ego and every pedestrian are at their destinations. Background
    /// traffic cannot change the outcome any more, so it is not waited for.
    pub fn all_arrived(&self) -> bool {
        self.vehicles[self.ego].reached_destination() && self.pedestrians.iter().all(|p| p.arrived())
    }
}
