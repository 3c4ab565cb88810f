use serde::{Deserialize, Serialize};

use super::layout::{Crosswalk, Lane, LaneDirection, RoadLayout, Rgb, StaticObject};
use super::{Result, WorldError};
use crate::perception::SensorRig;
use crate::safety::EvaluationConfig;
use crate::stochastic::{DemographicsTable, ExponentialModel, LogNormalModel};

pub const BUILTIN_SCENARIOS: [&str; 3] = ["crossing", "jaywalking", "background_blending"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleRole {
    Ego,
    Occluder,
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// Perception-driven cruise and brake.
    Ego,
    /// Never moves.
    Parked,
    /// Ground-truth car following and pedestrian yielding.
    Follower,
    /// Pedestrian walking to its destination.
    Walker,
}

/// Longitudinal placement of a vehicle in its lane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    /// Vehicle center at `x`.
    Fixed { x: f64 },
    /// Front bumper reaches `target_x` a uniformly drawn `offset` seconds after
    /// the pedestrian role `pedestrian` would enter this lane walking straight
    /// at its base speed.
    Arrival {
        target_x: f64,
        pedestrian: usize,
        offset_min: f64,
        offset_max: f64,
    },
    /// Behind vehicle role `leader` in the same lane, bumper to bumper gap of
    /// one sampled headway times the leader's speed.
    Follow { leader: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeedSpec {
    Stopped,
    Fixed { speed: f64 },
    /// Drawn from the scenario's speed model (intersection or not).
    Sampled,
}

fn default_vehicle_extent() -> [f64; 3] {
    [4.5, 1.9, 1.5]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub role: VehicleRole,
    pub lane: usize,
    pub placement: Placement,
    pub speed: SpeedSpec,
    #[serde(default = "default_vehicle_extent")]
    pub extent: [f64; 3],
    pub color: Rgb,
    /// Lateral shift from the lane center, positive to the left of `+x`.
    #[serde(default)]
    pub lateral_offset: f64,
}

fn default_height() -> f64 {
    1.75
}

fn default_radius() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianSpec {
    pub start: [f64; 2],
    pub color: Rgb,
    #[serde(default = "default_height")]
    pub height: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoleSpec {
    Vehicle(VehicleSpec),
    Pedestrian(PedestrianSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficRules {
    /// Sampled speeds are truncated to this value, m/s.
    #[serde(default)]
    pub speed_limit: Option<f64>,
    /// Background traffic also yields to pedestrians about to enter its lane,
    /// not only to those already in it.
    #[serde(default)]
    pub pedestrian_priority: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EgoParams {
    /// Constant braking deceleration, m/s^2.
    pub a_brake: f64,
    /// Acceleration back to cruise speed, m/s^2.
    pub a_resume: f64,
    /// Look-ahead for the path-conflict predicate, s.
    pub horizon: f64,
    /// The ego keeps going when its rear would pass a pedestrian this long
    /// before the pedestrian reaches the lane, s.
    pub clear_margin: f64,
    /// A track not refreshed for this long is dropped, s.
    pub track_timeout: f64,
    /// Detections younger than this feed the velocity estimate, s.
    pub velocity_window: f64,
}

impl Default for EgoParams {
    fn default() -> Self {
        Self {
            a_brake: 6.0,
            a_resume: 2.0,
            horizon: 7.0,
            clear_margin: 1.0,
            track_timeout: 1.0,
            velocity_window: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PedestrianParams {
    pub awareness_radius: f64,
    pub pass_first_factor: f64,
    /// Longest backward step of a yielding pedestrian, s.
    pub yield_duration: f64,
    /// A vehicle counts as approaching above this closing speed, m/s.
    pub closing_speed: f64,
}

impl Default for PedestrianParams {
    fn default() -> Self {
        Self {
            awareness_radius: 15.0,
            pass_first_factor: 1.5,
            yield_duration: 2.0,
            closing_speed: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficModels {
    pub headway: ExponentialModel,
    pub non_intersection_speed: LogNormalModel,
    pub intersection_speed: LogNormalModel,
}

impl Default for TrafficModels {
    fn default() -> Self {
        Self {
            headway: ExponentialModel::headway(),
            non_intersection_speed: LogNormalModel::non_intersection(),
            intersection_speed: LogNormalModel::intersection(),
        }
    }
}

impl TrafficModels {
    pub fn speed_model(&self, intersection: bool) -> &LogNormalModel {
        if intersection {
            &self.intersection_speed
        } else {
            &self.non_intersection_speed
        }
    }
}

fn default_frames() -> usize {
    600
}

fn default_dt() -> f64 {
    0.05
}

/// A scenario `S(k, Θ) = {R, M(k), D(k), X(t)}`: rules, one controller and one
/// destination per role, and everything else needed to roll out `X(t)` once
/// the initial parameters `Θ` are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub layout: RoadLayout,
    #[serde(default)]
    pub rules: TrafficRules,
    pub roles: Vec<RoleSpec>,
    pub controllers: Vec<ControllerKind>,
    pub destinations: Vec<[f64; 2]>,
    #[serde(default)]
    pub sensors: SensorRig,
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub ego: EgoParams,
    #[serde(default)]
    pub pedestrian: PedestrianParams,
    #[serde(default)]
    pub traffic: TrafficModels,
    #[serde(default)]
    pub demographics: DemographicsTable,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
}

fn cfg_err(msg: impl Into<String>) -> WorldError {
    WorldError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(cfg_err(format!("{name} must be positive, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn vehicle(&self, role: usize) -> Option<&VehicleSpec> {
        match self.roles.get(role) {
            Some(RoleSpec::Vehicle(v)) => Some(v),
            _ => None,
        }
    }

    pub fn pedestrian_spec(&self, role: usize) -> Option<&PedestrianSpec> {
        match self.roles.get(role) {
            Some(RoleSpec::Pedestrian(p)) => Some(p),
            _ => None,
        }
    }

    pub fn ego_role(&self) -> Option<usize> {
        self.controllers.iter().position(|c| *c == ControllerKind::Ego)
    }

    pub fn speed_model(&self) -> &LogNormalModel {
        self.traffic.speed_model(self.layout.intersection)
    }

    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        let k = self.roles.len();
        if k == 0 {
            return Err(cfg_err("scenario has no roles"));
        }
        if self.controllers.len() != k || self.destinations.len() != k {
            return Err(cfg_err(format!(
                "{k} roles but {} controllers and {} destinations",
                self.controllers.len(),
                self.destinations.len()
            )));
        }
        positive("dt", self.dt)?;
        if self.frames == 0 {
            return Err(cfg_err("frames must be at least 1"));
        }
        if self.controllers.iter().filter(|c| **c == ControllerKind::Ego).count() != 1 {
            return Err(cfg_err("exactly one role must use the ego controller"));
        }
        if let Some(limit) = self.rules.speed_limit {
            positive("rules.speed_limit", limit)?;
        }
        let e = &self.ego;
        positive("ego.a_brake", e.a_brake)?;
        positive("ego.a_resume", e.a_resume)?;
        positive("ego.horizon", e.horizon)?;
        if !(e.clear_margin >= 0.0) {
            return Err(cfg_err(format!("ego.clear_margin must be >= 0, got {}", e.clear_margin)));
        }
        positive("ego.track_timeout", e.track_timeout)?;
        positive("ego.velocity_window", e.velocity_window)?;
        let p = &self.pedestrian;
        positive("pedestrian.awareness_radius", p.awareness_radius)?;
        positive("pedestrian.pass_first_factor", p.pass_first_factor)?;
        positive("pedestrian.yield_duration", p.yield_duration)?;
        if !(p.closing_speed >= 0.0) {
            return Err(cfg_err("pedestrian.closing_speed must be nonnegative"));
        }
        self.sensors.validate().map_err(|e| cfg_err(e.to_string()))?;
        self.evaluation.validate().map_err(|e| cfg_err(e.to_string()))?;
        if self.destinations.iter().flatten().any(|v| !v.is_finite()) {
            return Err(cfg_err("destinations must be finite"));
        }

        for (i, (role, ctl)) in self.roles.iter().zip(&self.controllers).enumerate() {
            match role {
                RoleSpec::Vehicle(v) => self.validate_vehicle(i, v, *ctl)?,
                RoleSpec::Pedestrian(p) => {
                    if *ctl != ControllerKind::Walker {
                        return Err(cfg_err(format!("pedestrian role {i} needs the walker controller")));
                    }
                    positive(&format!("role {i} height"), p.height)?;
                    positive(&format!("role {i} radius"), p.radius)?;
                    if !p.color.is_valid() || p.start.iter().any(|v| !v.is_finite()) {
                        return Err(cfg_err(format!("pedestrian role {i} is malformed")));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_vehicle(&self, i: usize, v: &VehicleSpec, ctl: ControllerKind) -> Result<()> {
        let lane = self.layout.lane(v.lane)?;
        if v.extent.iter().any(|e| !(*e > 0.0)) || !v.color.is_valid() || !v.lateral_offset.is_finite() {
            return Err(cfg_err(format!("vehicle role {i} has a bad extent or color")));
        }
        match (ctl, v.role) {
            (ControllerKind::Walker, _) => {
                return Err(cfg_err(format!("vehicle role {i} cannot use the walker controller")))
            }
            (ControllerKind::Ego, VehicleRole::Ego) => {}
            (ControllerKind::Ego, _) | (_, VehicleRole::Ego) => {
                return Err(cfg_err(format!("role {i}: ego role and ego controller must go together")))
            }
            _ => {}
        }
        if ctl == ControllerKind::Parked && v.speed != SpeedSpec::Stopped {
            return Err(cfg_err(format!("parked vehicle role {i} must be stopped")));
        }
        if let SpeedSpec::Fixed { speed } = v.speed {
            if !(speed >= 0.0 && speed.is_finite()) {
                return Err(cfg_err(format!("vehicle role {i} has speed {speed}")));
            }
        }
        match v.placement {
            Placement::Fixed { x } => {
                if !(x - v.extent[0] / 2.0 >= lane.x_min && x + v.extent[0] / 2.0 <= lane.x_max) {
                    return Err(cfg_err(format!("vehicle role {i} is placed outside its lane")));
                }
            }
            Placement::Arrival {
                target_x,
                pedestrian,
                offset_min,
                offset_max,
            } => {
                if self.pedestrian_spec(pedestrian).is_none() {
                    return Err(cfg_err(format!("vehicle role {i} times its arrival on non-pedestrian role {pedestrian}")));
                }
                if !target_x.is_finite() || !(offset_max >= offset_min) || !offset_min.is_finite() || !offset_max.is_finite() {
                    return Err(cfg_err(format!("vehicle role {i} has a bad arrival window")));
                }
            }
            Placement::Follow { leader } => {
                if leader >= i {
                    return Err(cfg_err(format!("vehicle role {i} must follow an earlier role")));
                }
                match self.vehicle(leader) {
                    Some(l) if l.lane == v.lane => {}
                    _ => return Err(cfg_err(format!("vehicle role {i} follows {leader}, which is not a vehicle in its lane"))),
                }
            }
        }
        Ok(())
    }
}

const LANE_WIDTH: f64 = 3.5;
const ROAD_EDGE: f64 = 2.0 * LANE_WIDTH;

fn lane(center_y: f64, direction: LaneDirection) -> Lane {
    Lane {
        center_y,
        width: LANE_WIDTH,
        direction,
        x_min: -400.0,
        x_max: 400.0,
    }
}

fn block(x0: f64, x1: f64, y0: f64, y1: f64, height: f64, color: Rgb) -> StaticObject {
    StaticObject {
        footprint: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
        height,
        color,
    }
}

/// Four lanes along `x` (two each way). With `fence_gap = Some(g)` a 2 m
/// fence runs along the near curb except for `|x| < g`, where the pedestrian
/// comes through.
fn base_layout(intersection: bool, fence_gap: Option<f64>) -> RoadLayout {
    let fence_y = (-ROAD_EDGE - 0.6, -ROAD_EDGE);
    let static_objects = match fence_gap {
        Some(g) => vec![
            block(-80.0, -g, fence_y.0, fence_y.1, 2.0, Rgb::GRAY),
            block(g, 80.0, fence_y.0, fence_y.1, 2.0, Rgb::GRAY),
        ],
        None => Vec::new(),
    };
    RoadLayout {
        lanes: vec![
            lane(-1.5 * LANE_WIDTH, LaneDirection::Forward),
            lane(-0.5 * LANE_WIDTH, LaneDirection::Forward),
            lane(0.5 * LANE_WIDTH, LaneDirection::Backward),
            lane(1.5 * LANE_WIDTH, LaneDirection::Backward),
        ],
        crosswalk: intersection.then_some(Crosswalk {
            x: 0.0,
            width: 3.0,
            y_min: -ROAD_EDGE,
            y_max: ROAD_EDGE,
        }),
        intersection,
        static_objects,
    }
}

const EGO_LANE: usize = 1;
const CURB_LANE: usize = 0;
const PEDESTRIAN_START: [f64; 2] = [0.0, -14.0];
const PEDESTRIAN_GOAL: [f64; 2] = [0.0, ROAD_EDGE + 2.0];
const EGO_GOAL: [f64; 2] = [80.0, -0.5 * LANE_WIDTH];
/// Ego front reaches the crossing line this many seconds after the
/// pedestrian would step into the ego lane (negative: before).
const ARRIVAL_WINDOW: (f64, f64) = (-3.0, 5.0);

struct Builder {
    roles: Vec<RoleSpec>,
    controllers: Vec<ControllerKind>,
    destinations: Vec<[f64; 2]>,
}

impl Builder {
    fn new() -> Self {
        Self {
            roles: Vec::new(),
            controllers: Vec::new(),
            destinations: Vec::new(),
        }
    }

    fn push(&mut self, role: RoleSpec, ctl: ControllerKind, dest: [f64; 2]) -> usize {
        self.roles.push(role);
        self.controllers.push(ctl);
        self.destinations.push(dest);
        self.roles.len() - 1
    }

    fn pedestrian(&mut self, color: Rgb) -> usize {
        self.push(
            RoleSpec::Pedestrian(PedestrianSpec {
                start: PEDESTRIAN_START,
                color,
                height: default_height(),
                radius: default_radius(),
            }),
            ControllerKind::Walker,
            PEDESTRIAN_GOAL,
        )
    }

    fn ego_and_follower(&mut self, pedestrian: usize, offset: (f64, f64)) {
        let ego = self.push(
            RoleSpec::Vehicle(VehicleSpec {
                role: VehicleRole::Ego,
                lane: EGO_LANE,
                placement: Placement::Arrival {
                    target_x: 0.0,
                    pedestrian,
                    offset_min: offset.0,
                    offset_max: offset.1,
                },
                speed: SpeedSpec::Sampled,
                extent: default_vehicle_extent(),
                color: Rgb::WHITE,
                lateral_offset: 0.0,
            }),
            ControllerKind::Ego,
            EGO_GOAL,
        );
        self.push(
            RoleSpec::Vehicle(VehicleSpec {
                role: VehicleRole::Background,
                lane: EGO_LANE,
                placement: Placement::Follow { leader: ego },
                speed: SpeedSpec::Sampled,
                extent: default_vehicle_extent(),
                color: Rgb::BLUE,
                lateral_offset: 0.0,
            }),
            ControllerKind::Follower,
            EGO_GOAL,
        );
    }

    fn parked(&mut self, role: VehicleRole, x: f64, lateral_offset: f64, extent: [f64; 3], color: Rgb) {
        let spec = VehicleSpec {
            role,
            lane: CURB_LANE,
            placement: Placement::Fixed { x },
            speed: SpeedSpec::Stopped,
            extent,
            color,
            lateral_offset,
        };
        let y = -1.5 * LANE_WIDTH + lateral_offset;
        self.push(RoleSpec::Vehicle(spec), ControllerKind::Parked, [x, y]);
    }

    fn finish(self, name: &str, layout: RoadLayout, speed_limit: f64) -> ScenarioConfig {
        ScenarioConfig {
            name: name.to_string(),
            layout,
            rules: TrafficRules {
                speed_limit: Some(speed_limit),
                pedestrian_priority: false,
            },
            roles: self.roles,
            controllers: self.controllers,
            destinations: self.destinations,
            sensors: SensorRig::default(),
            frames: default_frames(),
            dt: default_dt(),
            ego: EgoParams::default(),
            pedestrian: PedestrianParams::default(),
            traffic: TrafficModels::default(),
            demographics: DemographicsTable::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

/// One of the three reference scenarios.
///
/// All share a four-lane road with the ego in the second lane from the near
/// curb and a pedestrian crossing at `x = 0` from the near sidewalk.
///
/// * `jaywalking`: mid-block, no crosswalk. The pedestrian steps through a
///   gap in the curbside fence and then past a box truck stopped in the curb
///   lane, which hides it until it is almost in the ego lane.
/// * `crossing`: intersection with a crosswalk. The fence stops short of the
///   corner, and a black car waits at the stop line in the curb lane.
/// * `background_blending`: open sidewalk, no occluder. A parked car with the
///   same dark color as the pedestrian's clothes stands right behind the
///   crossing line.
pub fn builtin_scenario(name: &str) -> Result<ScenarioConfig> {
    let mut b = Builder::new();
    match name {
        "jaywalking" => {
            let ped = b.pedestrian(Rgb::RED);
            b.ego_and_follower(ped, ARRIVAL_WINDOW);
            b.parked(VehicleRole::Occluder, -4.6, 0.0, [8.0, 2.5, 3.2], Rgb::GRAY);
            Ok(b.finish(name, base_layout(false, Some(0.8)), 16.7))
        }
        "crossing" => {
            let ped = b.pedestrian(Rgb::RED);
            b.ego_and_follower(ped, ARRIVAL_WINDOW);
            b.parked(VehicleRole::Occluder, -4.75, 0.0, default_vehicle_extent(), Rgb::BLACK);
            Ok(b.finish(name, base_layout(true, Some(9.5)), 13.9))
        }
        "background_blending" => {
            let ped = b.pedestrian(Rgb::BLACK);
            b.ego_and_follower(ped, ARRIVAL_WINDOW);
            let gap = 0.3;
            let x = default_radius() + gap + default_vehicle_extent()[0] / 2.0;
            // Pulled over against the curb.
            let offset = -(LANE_WIDTH - default_vehicle_extent()[1]) / 2.0 + 0.1;
            b.parked(VehicleRole::Background, x, offset, default_vehicle_extent(), Rgb::BLACK);
            Ok(b.finish(name, base_layout(false, None), 16.7))
        }
        other => Err(cfg_err(format!(
            "unknown scenario `{other}` (expected one of {})",
            BUILTIN_SCENARIOS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_SCENARIOS {
            builtin_scenario(name).unwrap().validate().unwrap();
        }
        assert!(builtin_scenario("roundabout").is_err());
    }

    #[test]
    fn crosswalk_only_at_the_intersection() {
        assert!(builtin_scenario("jaywalking").unwrap().layout.crosswalk.is_none());
        assert!(builtin_scenario("crossing").unwrap().layout.crosswalk.is_some());
        assert!(builtin_scenario("background_blending").unwrap().layout.crosswalk.is_none());
    }

    #[test]
    fn blending_backdrop_matches_clothes() {
        let s = builtin_scenario("background_blending").unwrap();
        let ped = s.roles.iter().find_map(|r| match r {
            RoleSpec::Pedestrian(p) => Some(*p),
            _ => None,
        });
        let car = s.roles.iter().find_map(|r| match r {
            RoleSpec::Vehicle(v) if v.role == VehicleRole::Background && v.speed == SpeedSpec::Stopped => Some(*v),
            _ => None,
        });
        let (ped, car) = (ped.unwrap(), car.unwrap());
        assert_eq!(ped.color, car.color);
        let Placement::Fixed { x } = car.placement else { panic!() };
        let gap = (x - car.extent[0] / 2.0) - (ped.start[0] + ped.radius);
        assert!(gap > 0.0 && gap < 0.5);
    }

    #[test]
    fn serde_round_trip() {
        for name in BUILTIN_SCENARIOS {
            let s = builtin_scenario(name).unwrap();
            let json = serde_json::to_string(&s).unwrap();
            let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
            assert_eq!(s, back);
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let mut s = builtin_scenario("jaywalking").unwrap();
        s.destinations.pop();
        assert!(s.validate().is_err());
        let mut s = builtin_scenario("jaywalking").unwrap();
        s.dt = 0.0;
        assert!(s.validate().is_err());
    }
}
