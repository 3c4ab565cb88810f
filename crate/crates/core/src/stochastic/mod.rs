//! Traffic and pedestrian randomness: fitted distributions, maximum-likelihood
//! fits, the pedestrian population mixture, initial-scene sampling and the
//! seeded stream contract.

pub mod demographics;
pub mod distributions;
pub mod rng;
mod scene;

pub use demographics::{
    sample_profile, AgeGroup, DemographicCell, DemographicsTable, Gender, GroupSpeed,
    PedestrianProfile, RiskPreference,
};
pub use distributions::{
    exp_pdf, fit_exponential, fit_lognormal, lognormal_pdf, sample_headway, sample_speed,
    ExponentialModel, LogNormalModel, HEADWAY_RATE, INTERSECTION_SPEED, NON_INTERSECTION_SPEED,
};
pub use scene::{corridor_entry_time, sample_initial_scene, InitialScene, RoleInit};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("outside the support: {0}")]
    Domain(String),
    #[error("cannot fit: {0}")]
    Fit(String),
    #[error("degenerate fit: samples have zero spread")]
    DegenerateFit,
    #[error("demographics table: {0}")]
    Demographics(String),
    #[error("placement: {0}")]
    Placement(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;
