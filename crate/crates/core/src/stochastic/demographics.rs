//! Pedestrian population model: age group, gender and risk preference cells
//! with per-group walking speeds.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeGroup {
    Teen,
    Young,
    Middle,
    Older,
}

impl AgeGroup {
    pub const ALL: [AgeGroup; 4] = [AgeGroup::Teen, AgeGroup::Young, AgeGroup::Middle, AgeGroup::Older];

    /// Inclusive age bounds in years.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            AgeGroup::Teen => (13.0, 18.0),
            AgeGroup::Young => (19.0, 30.0),
            AgeGroup::Middle => (31.0, 59.0),
            AgeGroup::Older => (60.0, 85.0),
        }
    }

    /// Observed mean walking speed in m/s.
    pub fn default_mean_speed(self) -> f64 {
        match self {
            // Reported as 4.46 m/s, which is a run rather than a walk.
            AgeGroup::Teen => 1.46,
            AgeGroup::Young => 1.46,
            AgeGroup::Middle => 1.45,
            AgeGroup::Older => 1.03,
        }
    }

    pub fn contains(self, age: f64) -> bool {
        let (lo, hi) = self.bounds();
        age >= lo && age <= hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Female, Gender::Male];
}

/// How a pedestrian reacts to a closing vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskPreference {
    /// Keeps walking at the same speed.
    Unaware,
    /// Speeds up to cross ahead of the vehicle.
    PassFirst,
    /// Steps back to let the vehicle pass.
    YieldBack,
}

impl RiskPreference {
    pub const ALL: [RiskPreference; 3] = [
        RiskPreference::Unaware,
        RiskPreference::PassFirst,
        RiskPreference::YieldBack,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PedestrianProfile {
    pub age: f64,
    pub gender: Gender,
    pub age_group: AgeGroup,
    pub risk_preference: RiskPreference,
    pub base_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemographicCell {
    pub age_group: AgeGroup,
    pub gender: Gender,
    pub risk_preference: RiskPreference,
    pub weight: f64,
}

/// Walking-speed distribution of one age group: normal, truncated below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpeed {
    pub age_group: AgeGroup,
    pub mean: f64,
    #[serde(default = "default_spread")]
    pub std_dev: f64,
}

fn default_spread() -> f64 {
    0.15
}

fn default_min_speed() -> f64 {
    0.3
}

/// Mixed empirical pedestrian population.
///
/// Weights are renormalized when the table is built; an unnormalized table
/// on disk is fine as long as every weight is finite and nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableSpec", into = "TableSpec")]
pub struct DemographicsTable {
    cells: Vec<DemographicCell>,
    speeds: Vec<GroupSpeed>,
    min_speed: f64,
    cumulative: Vec<f64>,
    /// Weights as given, so serialization round-trips exactly.
    raw_weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableSpec {
    cells: Vec<DemographicCell>,
    #[serde(default)]
    speeds: Vec<GroupSpeed>,
    #[serde(default = "default_min_speed")]
    min_speed: f64,
}

impl TryFrom<TableSpec> for DemographicsTable {
    type Error = StatsError;
    fn try_from(s: TableSpec) -> Result<Self> {
        DemographicsTable::new(s.cells, s.speeds, s.min_speed)
    }
}

impl From<DemographicsTable> for TableSpec {
    fn from(t: DemographicsTable) -> Self {
        let mut cells = t.cells;
        for (c, w) in cells.iter_mut().zip(&t.raw_weights) {
            c.weight = *w;
        }
        Self {
            cells,
            speeds: t.speeds,
            min_speed: t.min_speed,
        }
    }
}

impl Default for DemographicsTable {
    /// Uniform over every (age group, gender, risk preference) cell.
    fn default() -> Self {
        let mut cells = Vec::new();
        for age_group in AgeGroup::ALL {
            for gender in Gender::ALL {
                for risk_preference in RiskPreference::ALL {
                    cells.push(DemographicCell {
                        age_group,
                        gender,
                        risk_preference,
                        weight: 1.0,
                    });
                }
            }
        }
        Self::new(cells, Vec::new(), default_min_speed()).expect("default table is valid")
    }
}

impl DemographicsTable {
    /// Missing groups in `speeds` fall back to the observed group means.
    pub fn new(
        mut cells: Vec<DemographicCell>,
        speeds: Vec<GroupSpeed>,
        min_speed: f64,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(StatsError::Demographics("table has no cells".into()));
        }
        if let Some(c) = cells.iter().find(|c| !(c.weight >= 0.0) || !c.weight.is_finite()) {
            return Err(StatsError::Demographics(format!(
                "weight {} is not a finite nonnegative number",
                c.weight
            )));
        }
        let raw_weights: Vec<f64> = cells.iter().map(|c| c.weight).collect();
        let total: f64 = raw_weights.iter().sum();
        if !(total > 0.0) {
            return Err(StatsError::Demographics("weights sum to zero".into()));
        }
        for c in &mut cells {
            c.weight /= total;
        }
        let check: f64 = cells.iter().map(|c| c.weight).sum();
        if (check - 1.0).abs() > 1e-9 {
            return Err(StatsError::Demographics(format!(
                "weights sum to {check} after renormalization"
            )));
        }
        if !(min_speed > 0.0) {
            return Err(StatsError::Demographics(format!("min_speed must be > 0, got {min_speed}")));
        }

        let mut full = Vec::with_capacity(AgeGroup::ALL.len());
        for group in AgeGroup::ALL {
            let given: Vec<&GroupSpeed> = speeds.iter().filter(|s| s.age_group == group).collect();
            if given.len() > 1 {
                return Err(StatsError::Demographics(format!("duplicate speed entry for {group:?}")));
            }
            let s = given.first().map(|s| **s).unwrap_or(GroupSpeed {
                age_group: group,
                mean: group.default_mean_speed(),
                std_dev: default_spread(),
            });
            if !(s.mean > min_speed) || !(s.std_dev >= 0.0) {
                return Err(StatsError::Demographics(format!(
                    "bad speed entry for {group:?}: mean {} std {}",
                    s.mean, s.std_dev
                )));
            }
            full.push(s);
        }

        let mut acc = 0.0;
        let cumulative = cells
            .iter()
            .map(|c| {
                acc += c.weight;
                acc
            })
            .collect();
        Ok(Self {
            cells,
            speeds: full,
            min_speed,
            cumulative,
            raw_weights,
        })
    }

    /// Every pedestrian drawn from this table lands in `group` with the given traits.
    pub fn single(group: AgeGroup, gender: Gender, risk: RiskPreference) -> Self {
        Self::new(
            vec![DemographicCell {
                age_group: group,
                gender,
                risk_preference: risk,
                weight: 1.0,
            }],
            Vec::new(),
            default_min_speed(),
        )
        .expect("single-cell table is valid")
    }

    pub fn cells(&self) -> &[DemographicCell] {
        &self.cells
    }

    pub fn min_speed(&self) -> f64 {
        self.min_speed
    }

    pub fn group_speed(&self, group: AgeGroup) -> GroupSpeed {
        *self
            .speeds
            .iter()
            .find(|s| s.age_group == group)
            .expect("all groups present")
    }

    /// Probability of the cell matching the given profile traits.
    pub fn cell_probability(&self, group: AgeGroup, gender: Gender, risk: RiskPreference) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.age_group == group && c.gender == gender && c.risk_preference == risk)
            .map(|c| c.weight)
            .sum()
    }

    fn pick_cell(&self, u: f64) -> &DemographicCell {
        let idx = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cells.len() - 1);
        &self.cells[idx]
    }
}

/// Draws one pedestrian: a cell by weight, an age uniform inside the group,
/// and a walking speed from the group's truncated normal.
pub fn sample_profile<R: Rng + ?Sized>(table: &DemographicsTable, rng: &mut R) -> PedestrianProfile {
    let cell = *table.pick_cell(rng.random::<f64>());
    let (lo, hi) = cell.age_group.bounds();
    let age = lo + (hi - lo) * rng.random::<f64>();
    let speed = table.group_speed(cell.age_group);
    let normal = Normal::standard();
    let mut base_speed = speed.mean;
    // Rejection keeps the truncated shape; the mean sits well above the floor.
    for _ in 0..1000 {
        let u: f64 = rng.sample(Open01);
        let v = speed.mean + speed.std_dev * normal.inverse_cdf(u);
        if v > table.min_speed {
            base_speed = v;
            break;
        }
    }
    PedestrianProfile {
        age,
        gender: cell.gender,
        age_group: cell.age_group,
        risk_preference: cell.risk_preference,
        base_speed,
    }
}
