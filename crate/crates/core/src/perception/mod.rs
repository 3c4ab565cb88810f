//! Onboard and roadside camera models.
//!
//! A detector is replaced by a geometric proxy: a pedestrian is detected when
//! enough of five body sample points are in view and unoccluded, unless a
//! same-colored object right behind it makes it blend in. Range comes from
//! clustering a synthetic depth patch over the projected box. In `v2i` mode the
//! roadside detections are re-expressed in the vehicle camera and appended to
//! the onboard ones.

pub mod detect;
pub mod fusion;
pub mod visibility;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BoundingBox, CameraIntrinsics, PixelPoint, RigidTransform};
use crate::stochastic::rng::{substream, Stream, StreamKey};
use crate::world::{RoadLayout, VehicleState, WorldState};

pub use detect::{projected_bbox, true_depth, try_detect, Subject};
pub use fusion::fuse_v2i;
pub use visibility::{backdrop, collect_obstacles, visible_fraction, CameraView, Obstacle, Target};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("invalid sensor: {0}")]
    InvalidSensor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerceptionMode {
    SingleVehicle,
    V2i,
}

impl PerceptionMode {
    pub const ALL: [PerceptionMode; 2] = [PerceptionMode::SingleVehicle, PerceptionMode::V2i];

    pub fn as_str(self) -> &'static str {
        match self {
            PerceptionMode::SingleVehicle => "single_vehicle",
            PerceptionMode::V2i => "v2i",
        }
    }
}

impl std::fmt::Display for PerceptionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PerceptionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single_vehicle" | "sv" => Ok(PerceptionMode::SingleVehicle),
            "v2i" => Ok(PerceptionMode::V2i),
            other => Err(format!("unknown perception mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionSource {
    Onboard,
    Roadside,
}

/// A perceived pedestrian.
///
/// Roadside detections stored in an episode record have already been fused
/// into the vehicle camera, so `bbox` and `anchor` are vehicle-image pixels
/// and `bbox` is `None` when the pedestrian is behind that camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame: usize,
    pub source: DetectionSource,
    pub pedestrian: usize,
    pub bbox: Option<BoundingBox>,
    /// Pixel of the body reference point used for localization.
    pub anchor: Option<PixelPoint>,
    pub est_distance: f64,
    pub est_position_world: [f64; 2],
    /// Ground truth, for evaluation only.
    pub truth_position_world: [f64; 2],
    pub in_frame: bool,
}

/// Camera placement. Onboard mounts are given in the vehicle body frame
/// (`x` forward, `y` left, `z` up from the ground below the vehicle center),
/// roadside mounts in the world frame. Angles in degrees, pitch positive down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MountSpec {
    pub position: [f64; 3],
    pub yaw_deg: f64,
    pub pitch_deg: f64,
}

fn default_visibility_threshold() -> f64 {
    0.4
}
fn default_blend_delta() -> f64 {
    0.15
}
fn default_blend_detect_prob() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}
fn default_cluster_k() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub mount: MountSpec,
    pub intrinsics: CameraIntrinsics,
    pub max_range: f64,
    #[serde(default = "default_visibility_threshold")]
    pub visibility_threshold: f64,
    #[serde(default = "default_blend_delta")]
    pub blend_delta: f64,
    #[serde(default = "default_blend_detect_prob")]
    pub blend_detect_prob: f64,
    /// Quantize and dither depth samples to 1/256 of `max_range`.
    #[serde(default = "default_true")]
    pub depth_noise: bool,
    #[serde(default = "default_cluster_k")]
    pub cluster_k: usize,
}

impl SensorSpec {
    /// Windshield camera, 800x600 with a 90 degree field of view.
    pub fn onboard_default() -> Self {
        Self {
            mount: MountSpec {
                position: [0.8, 0.0, 1.4],
                yaw_deg: 0.0,
                pitch_deg: 0.0,
            },
            intrinsics: CameraIntrinsics::new(800, 600, 90.0).expect("valid default"),
            max_range: 50.0,
            visibility_threshold: default_visibility_threshold(),
            blend_delta: default_blend_delta(),
            blend_detect_prob: default_blend_detect_prob(),
            depth_noise: true,
            cluster_k: 2,
        }
    }

    /// Pole camera 6 m up, pitched 20 degrees down, looking back along the
    /// road at the crossing from the far corner.
    pub fn roadside_default() -> Self {
        Self {
            mount: MountSpec {
                position: [15.0, -9.0, 6.0],
                yaw_deg: 165.0,
                pitch_deg: 20.0,
            },
            max_range: 60.0,
            ..Self::onboard_default()
        }
    }

    pub fn validate(&self) -> Result<(), PerceptionError> {
        let bad = |m: &str| Err(PerceptionError::InvalidSensor(m.to_string()));
        let m = &self.mount;
        if m.position.iter().chain([m.yaw_deg, m.pitch_deg].iter()).any(|v| !v.is_finite()) {
            return bad("mount has non-finite entries");
        }
        if !(self.max_range > 0.0) {
            return bad("max_range must be positive");
        }
        if !(self.visibility_threshold > 0.0 && self.visibility_threshold <= 1.0) {
            return bad("visibility_threshold must be in (0, 1]");
        }
        if !(0.0..=3f64.sqrt()).contains(&self.blend_delta) {
            return bad("blend_delta must be in [0, sqrt(3)]");
        }
        if !(0.0..=1.0).contains(&self.blend_detect_prob) {
            return bad("blend_detect_prob must be in [0, 1]");
        }
        if self.cluster_k == 0 {
            return bad("cluster_k must be at least 1");
        }
        Ok(())
    }

    /// Depth quantization step.
    pub fn depth_step(&self) -> f64 {
        self.max_range / 256.0
    }

    /// The camera as placed in the world, for a world-frame mount.
    pub fn fixed_view(&self) -> CameraView {
        let m = &self.mount;
        CameraView::new(
            RigidTransform::camera_pose(m.position, m.yaw_deg.to_radians(), m.pitch_deg.to_radians()),
            self.intrinsics,
            self.max_range,
        )
    }

    /// The camera as carried by `vehicle`, for a body-frame mount.
    pub fn vehicle_view(&self, vehicle: &VehicleState) -> CameraView {
        let m = &self.mount;
        let (s, c) = vehicle.heading.sin_cos();
        let [px, py, pz] = m.position;
        let position = [
            vehicle.position[0] + px * c - py * s,
            vehicle.position[1] + px * s + py * c,
            pz,
        ];
        CameraView::new(
            RigidTransform::camera_pose(
                position,
                vehicle.heading + m.yaw_deg.to_radians(),
                m.pitch_deg.to_radians(),
            ),
            self.intrinsics,
            self.max_range,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorRig {
    pub onboard: SensorSpec,
    #[serde(default)]
    pub roadside: Option<SensorSpec>,
}

impl Default for SensorRig {
    fn default() -> Self {
        Self {
            onboard: SensorSpec::onboard_default(),
            roadside: Some(SensorSpec::roadside_default()),
        }
    }
}

impl SensorRig {
    pub fn validate(&self) -> Result<(), PerceptionError> {
        self.onboard.validate()?;
        if let Some(r) = &self.roadside {
            r.validate()?;
        }
        Ok(())
    }
}

/// Per-sensor random streams of one episode.
#[derive(Debug, Clone)]
pub struct SensorStreams {
    pub onboard: Stream,
    pub roadside: Stream,
}

impl SensorStreams {
    pub fn new(episode_seed: u64) -> Self {
        Self {
            onboard: substream(episode_seed, StreamKey::Sensor(0)),
            roadside: substream(episode_seed, StreamKey::Sensor(1)),
        }
    }
}

fn subjects(world: &WorldState) -> Vec<Subject> {
    world
        .pedestrians
        .iter()
        .enumerate()
        .map(|(i, p)| Subject {
            index: i,
            position: p.position,
            radius: p.radius(),
            height: p.extent[2],
            color: p.body_color,
        })
        .collect()
}

/// Detections available to the ego in this frame: onboard ones, then (in
/// `v2i` mode) fused roadside ones. The two sensors draw from separate
/// streams, so the onboard output never depends on the mode.
pub fn perceive(
    world: &WorldState,
    layout: &RoadLayout,
    rig: &SensorRig,
    mode: PerceptionMode,
    streams: &mut SensorStreams,
) -> Vec<Detection> {
    let ego = &world.vehicles[world.ego];
    let vehicle_view = rig.onboard.vehicle_view(ego);
    let subjects = subjects(world);
    let mut out = Vec::new();

    let onboard_obstacles = collect_obstacles(world, layout, Some(world.ego));
    for s in &subjects {
        if let Some(d) = try_detect(
            &rig.onboard,
            &vehicle_view,
            s,
            &onboard_obstacles,
            world.frame,
            DetectionSource::Onboard,
            &mut streams.onboard,
        ) {
            out.push(d);
        }
    }

    if mode == PerceptionMode::V2i {
        if let Some(roadside) = &rig.roadside {
            let view = roadside.fixed_view();
            let obstacles = collect_obstacles(world, layout, None);
            for s in &subjects {
                if let Some(d) = try_detect(
                    roadside,
                    &view,
                    s,
                    &obstacles,
                    world.frame,
                    DetectionSource::Roadside,
                    &mut streams.roadside,
                ) {
                    out.push(fuse_v2i(&d, &view, &vehicle_view));
                }
            }
        }
    }
    out
}
