//! Surrogate safety measures, event labels, injury severity and report
//! aggregation.

mod indicators;
mod injury;
mod report;

pub use indicators::{
    closest_approach, compute_indicators, episode_tracks, AgentTrack, ConflictIndicators,
};
pub use injury::{injury_probability, SpeedUnit, INJURY_AGE, INJURY_INTERCEPT, INJURY_SPEED_SQ};
pub use report::{
    aggregate, aggregate_summaries, detection_histogram, first_detection_distance,
    injury_surface, nearest_rank, EpisodeSummary, InjuryCell, SafetyReport, CSV_HEADER,
    SURFACE_AGES, SURFACE_SPEEDS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{EpisodeRecord, PedestrianOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SafetyError {
    #[error("trajectories are misaligned: {0}")]
    Alignment(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("cannot aggregate: {0}")]
    Aggregation(String),
    #[error("invalid evaluation settings: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, SafetyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventLabel {
    NonConflict,
    Conflict,
    Collision,
}

impl EventLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            EventLabel::NonConflict => "non_conflict",
            EventLabel::Conflict => "conflict",
            EventLabel::Collision => "collision",
        }
    }
}

impl std::fmt::Display for EventLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConflictCriteria {
    /// Conflict when TMD falls below this, s.
    #[serde(default = "d_tmd")]
    pub tmd: f64,
    /// Conflict when CS exceeds this, m/s.
    #[serde(default = "d_cs")]
    pub cs: f64,
    /// Conflicts need MD below this gate, m.
    #[serde(default = "d_gate")]
    pub md_gate: f64,
}

fn d_tmd() -> f64 {
    1.5
}
fn d_cs() -> f64 {
    1.0
}
fn d_gate() -> f64 {
    5.0
}
fn d_horizon() -> f64 {
    5.0
}
fn d_ego_half() -> f64 {
    0.95
}
fn d_ped_half() -> f64 {
    0.25
}

impl Default for ConflictCriteria {
    fn default() -> Self {
        Self {
            tmd: d_tmd(),
            cs: d_cs(),
            md_gate: d_gate(),
        }
    }
}

/// How episodes are scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Constant-velocity prediction horizon, s.
    #[serde(default = "d_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub criteria: ConflictCriteria,
    #[serde(default)]
    pub injury_speed_unit: SpeedUnit,
    /// Half-width of the ego's front bumper, m. The ego is reduced to the
    /// bumper midpoint with this radius.
    #[serde(default = "d_ego_half")]
    pub ego_half_extent: f64,
    #[serde(default = "d_ped_half")]
    pub pedestrian_half_extent: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            horizon: d_horizon(),
            criteria: ConflictCriteria::default(),
            injury_speed_unit: SpeedUnit::default(),
            ego_half_extent: d_ego_half(),
            pedestrian_half_extent: d_ped_half(),
        }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("evaluation.horizon", self.horizon, false),
            ("evaluation.criteria.tmd", self.criteria.tmd, false),
            ("evaluation.criteria.cs", self.criteria.cs, true),
            ("evaluation.criteria.md_gate", self.criteria.md_gate, false),
            ("evaluation.ego_half_extent", self.ego_half_extent, true),
            ("evaluation.pedestrian_half_extent", self.pedestrian_half_extent, true),
        ];
        for (name, v, zero_ok) in checks {
            let ok = v.is_finite() && (v > 0.0 || (zero_ok && v == 0.0));
            if !ok {
                return Err(SafetyError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Labels one episode-pedestrian pair.
pub fn classify_event(ind: &ConflictIndicators, contact: bool, criteria: &ConflictCriteria) -> EventLabel {
    if contact || ind.md <= 0.0 {
        EventLabel::Collision
    } else if (ind.tmd < criteria.tmd || ind.cs > criteria.cs) && ind.md < criteria.md_gate {
        EventLabel::Conflict
    } else {
        EventLabel::NonConflict
    }
}

/// Fills `outcomes` and `label` of a finished record. The episode label is
/// the most severe pedestrian label.
pub fn evaluate_episode(record: &mut EpisodeRecord, config: &EvaluationConfig) -> Result<()> {
    let tracks = episode_tracks(record, config)?;
    let ages: Vec<f64> = record
        .initial
        .roles
        .iter()
        .filter_map(|r| match r {
            crate::stochastic::RoleInit::Pedestrian { profile } => Some(profile.age),
            _ => None,
        })
        .collect();
    let (ego, peds) = tracks;
    if ages.len() != peds.len() {
        return Err(SafetyError::Alignment(format!(
            "{} pedestrian profiles for {} pedestrian tracks",
            ages.len(),
            peds.len()
        )));
    }
    let mut outcomes = Vec::with_capacity(peds.len());
    for (k, (ped, age)) in peds.iter().zip(ages).enumerate() {
        let indicators = compute_indicators(&ego, ped, config.horizon, record.dt)?;
        let hit = record.collisions.iter().find(|c| c.pedestrian == k);
        let contact = hit.is_some();
        let label = classify_event(&indicators, contact, &config.criteria);
        let impact_speed = match (hit, label) {
            (Some(c), _) => Some(c.impact_speed),
            (None, EventLabel::Collision) => Some(indicators.cs),
            _ => None,
        };
        let injury_given_collision = impact_speed
            .map(|v| injury_probability(1.0, config.injury_speed_unit.from_ms(v), age))
            .transpose()?;
        outcomes.push(PedestrianOutcome {
            pedestrian: k,
            age,
            indicators,
            contact,
            impact_speed,
            injury_given_collision,
            label,
        });
    }
    record.label = outcomes.iter().map(|o| o.label).max().unwrap_or(EventLabel::NonConflict);
    record.outcomes = outcomes;
    Ok(())
}
