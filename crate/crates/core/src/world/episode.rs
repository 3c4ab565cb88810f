use serde::{Deserialize, Serialize};

use super::agents::{PedestrianState, VehicleState, WalkPhase, WorldState};
use super::control::{check_collision, step, CollisionEvent, EgoMemory};
use super::scenario::{ControllerKind, RoleSpec, ScenarioConfig};
use super::{Result, WorldError};
use crate::perception::{perceive, Detection, PerceptionMode, SensorStreams};
use crate::safety::{evaluate_episode, ConflictIndicators, EventLabel, SpeedUnit};
use crate::stochastic::{InitialScene, RoleInit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameState {
    pub frame: usize,
    pub time: f64,
    pub vehicles: Vec<AgentSnapshot>,
    pub pedestrians: Vec<AgentSnapshot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    AllArrived,
    Collision,
    FrameBudget,
}

/// Safety evaluation of one pedestrian in one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedestrianOutcome {
    pub pedestrian: usize,
    pub age: f64,
    pub indicators: ConflictIndicators,
    pub contact: bool,
    /// Ego speed at contact, or the conflicting speed when the label comes
    /// from a predicted overlap without contact, m/s.
    pub impact_speed: Option<f64>,
    /// Injury probability given a collision at `impact_speed`.
    pub injury_given_collision: Option<f64>,
    pub label: EventLabel,
}

/// Full log of one episode. Field order is the serialized order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub seed: u64,
    pub scenario: String,
    pub mode: PerceptionMode,
    pub dt: f64,
    /// Index of the ego in each frame's `vehicles`.
    pub ego_index: usize,
    pub ego_extent: [f64; 3],
    pub initial: InitialScene,
    pub frames: Vec<FrameState>,
    pub detections: Vec<Detection>,
    pub collisions: Vec<CollisionEvent>,
    pub termination: Termination,
    pub injury_speed_unit: SpeedUnit,
    pub outcomes: Vec<PedestrianOutcome>,
    pub label: EventLabel,
}

/// Places every role according to `theta`.
pub fn initial_world(scenario: &ScenarioConfig, theta: &InitialScene) -> Result<WorldState> {
    if theta.roles.len() != scenario.roles.len() {
        return Err(WorldError::Config(format!(
            "initial parameters cover {} roles, scenario has {}",
            theta.roles.len(),
            scenario.roles.len()
        )));
    }
    let mut vehicles = Vec::new();
    let mut pedestrians = Vec::new();
    let mut ego = None;
    for (i, (role, init)) in scenario.roles.iter().zip(&theta.roles).enumerate() {
        let controller = scenario.controllers[i];
        let destination = scenario.destinations[i];
        match (role, init) {
            (RoleSpec::Vehicle(spec), RoleInit::Vehicle { x, speed, .. }) => {
                let lane = scenario.layout.lane(spec.lane)?;
                if controller == ControllerKind::Ego {
                    ego = Some(vehicles.len());
                }
                vehicles.push(VehicleState {
                    role_index: i,
                    role: spec.role,
                    controller,
                    lane: spec.lane,
                    position: [*x, lane.center_y + spec.lateral_offset],
                    heading: lane.direction.heading(),
                    speed: *speed,
                    accel: 0.0,
                    extent: spec.extent,
                    color: spec.color,
                    cruise_speed: *speed,
                    destination,
                });
            }
            (RoleSpec::Pedestrian(spec), RoleInit::Pedestrian { profile }) => {
                let d = [destination[0] - spec.start[0], destination[1] - spec.start[1]];
                pedestrians.push(PedestrianState {
                    role_index: i,
                    position: spec.start,
                    heading: d[1].atan2(d[0]),
                    speed: profile.base_speed,
                    profile: *profile,
                    body_color: spec.color,
                    extent: [2.0 * spec.radius, 2.0 * spec.radius, spec.height],
                    destination,
                    phase: WalkPhase::Walking,
                });
            }
            _ => {
                return Err(WorldError::Config(format!(
                    "initial parameters of role {i} do not match its kind"
                )))
            }
        }
    }
    let ego = ego.ok_or_else(|| WorldError::Config("no ego vehicle".into()))?;
    Ok(WorldState {
        frame: 0,
        time: 0.0,
        vehicles,
        pedestrians,
        ego,
        ego_memory: EgoMemory::default(),
    })
}

fn snapshot(world: &WorldState) -> FrameState {
    FrameState {
        frame: world.frame,
        time: world.time,
        vehicles: world
            .vehicles
            .iter()
            .map(|v| AgentSnapshot {
                x: v.position[0],
                y: v.position[1],
                heading: v.heading,
                speed: v.speed,
            })
            .collect(),
        pedestrians: world
            .pedestrians
            .iter()
            .map(|p| AgentSnapshot {
                x: p.position[0],
                y: p.position[1],
                heading: p.heading,
                speed: p.speed,
            })
            .collect(),
    }
}

/// Rolls one episode out from `theta` and evaluates it.
///
/// Each frame: record the state, stop on ego contact, perceive, stop when
/// everyone has arrived or the frame budget is spent, otherwise step. The
/// sensor streams derive from `episode_seed` alone, so a record is a pure
/// function of the arguments.
pub fn run_episode(
    scenario: &ScenarioConfig,
    theta: &InitialScene,
    mode: PerceptionMode,
    episode_seed: u64,
) -> Result<EpisodeRecord> {
    let mut world = initial_world(scenario, theta)?;
    let mut streams = SensorStreams::new(episode_seed);
    let mut frames = Vec::new();
    let mut detections = Vec::new();
    let mut collisions = Vec::new();

    let termination = loop {
        if !world.all_finite() {
            return Err(WorldError::NumericalFault {
                frame: world.frame,
                detail: format!("non-finite agent state in {}", scenario.name),
            });
        }
        frames.push(snapshot(&world));
        if let Some(hit) = check_collision(&world) {
            collisions.push(hit);
            break Termination::Collision;
        }
        let seen = perceive(&world, &scenario.layout, &scenario.sensors, mode, &mut streams);
        if world.all_arrived() {
            detections.extend(seen);
            break Termination::AllArrived;
        }
        if world.frame + 1 >= scenario.frames {
            detections.extend(seen);
            break Termination::FrameBudget;
        }
        world = step(&world, &seen, scenario, scenario.dt);
        detections.extend(seen);
    };

    let ego = &world.vehicles[world.ego];
    let mut record = EpisodeRecord {
        episode: 0,
        seed: episode_seed,
        scenario: scenario.name.clone(),
        mode,
        dt: scenario.dt,
        ego_index: world.ego,
        ego_extent: ego.extent,
        initial: theta.clone(),
        frames,
        detections,
        collisions,
        termination,
        injury_speed_unit: scenario.evaluation.injury_speed_unit,
        outcomes: Vec::new(),
        label: EventLabel::NonConflict,
    };
    evaluate_episode(&mut record, &scenario.evaluation).map_err(|e| WorldError::NumericalFault {
        frame: record.frames.len(),
        detail: e.to_string(),
    })?;
    Ok(record)
}
