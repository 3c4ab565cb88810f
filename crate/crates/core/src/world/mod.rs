//! Road layout, agents, controllers and the per-frame episode loop.
//!
//! World frame: `x` along the road, `y` to the left of forward traffic, `z`
//! up, meters. Headings are radians from `+x`.

mod agents;
mod control;
mod episode;
mod layout;
mod scenario;
pub mod shapes;

pub use agents::{PedestrianState, VehicleState, WalkPhase, WorldState};
pub use control::{check_collision, ego_conflict_predicate, step, CollisionEvent, EgoMemory, Track};
pub use episode::{
    initial_world, run_episode, AgentSnapshot, EpisodeRecord, FrameState, PedestrianOutcome,
    Termination,
};
pub use layout::{Crosswalk, Lane, LaneDirection, RoadLayout, Rgb, StaticObject};
pub use scenario::{
    builtin_scenario, ControllerKind, EgoParams, PedestrianParams, PedestrianSpec, Placement,
    RoleSpec, ScenarioConfig, SpeedSpec, TrafficModels, TrafficRules, VehicleRole, VehicleSpec,
    BUILTIN_SCENARIOS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("scenario config: {0}")]
    Config(String),
    #[error("placement: {0}")]
    Placement(String),
    #[error("numerical fault at frame {frame}: {detail}")]
    NumericalFault { frame: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, WorldError>;
