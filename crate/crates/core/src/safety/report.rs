use serde::{Deserialize, Serialize};

use super::{injury_probability, EventLabel, Result, SafetyError, SpeedUnit};
use crate::perception::PerceptionMode;
use crate::world::EpisodeRecord;

/// Impact speeds of the injury surface, in the report's speed unit.
pub const SURFACE_SPEEDS: [f64; 17] = [
    0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0, 65.0, 70.0, 75.0, 80.0,
];
/// Ages of the injury surface, years.
pub const SURFACE_AGES: [f64; 8] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0];

pub const CSV_HEADER: &str =
    "scenario,mode,episodes,collision_rate,conflict_rate,mean_injury,fdd_p10,fdd_p50,fdd_p90";

/// What aggregation needs from one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episode: u64,
    pub label: EventLabel,
    /// Injury probability given the collision, for collision episodes.
    pub injury: Option<f64>,
    pub first_detection_distance: Option<f64>,
}

impl EpisodeSummary {
    pub fn from_record(rec: &EpisodeRecord) -> Self {
        let injury = (rec.label == EventLabel::Collision).then(|| {
            rec.outcomes
                .iter()
                .filter(|o| o.label == EventLabel::Collision)
                .filter_map(|o| o.injury_given_collision)
                .fold(0.0, f64::max)
        });
        Self {
            episode: rec.episode,
            label: rec.label,
            injury,
            first_detection_distance: first_detection_distance(rec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjuryCell {
    pub v: f64,
    pub a: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyReport {
    pub scenario: String,
    pub mode: PerceptionMode,
    pub episodes: usize,
    pub collisions: usize,
    pub conflicts: usize,
    pub collision_rate: f64,
    pub conflict_rate: f64,
    pub mean_injury_probability: f64,
    pub injury_speed_unit: SpeedUnit,
    pub fdd_p10: Option<f64>,
    pub fdd_p50: Option<f64>,
    pub fdd_p90: Option<f64>,
    /// First-detection distances of detected episodes, in episode order.
    pub first_detection_distances: Vec<f64>,
    /// `collision_rate` times the injury logistic on the (V, A) grid.
    pub injury_surface: Vec<InjuryCell>,
}

impl SafetyReport {
    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.mode,
            self.episodes,
            self.collision_rate,
            self.conflict_rate,
            self.mean_injury_probability,
            opt(self.fdd_p10),
            opt(self.fdd_p50),
            opt(self.fdd_p90)
        )
    }

    /// Header, one row, trailing newline.
    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}\n", self.csv_row())
    }
}

/// Ego-pedestrian distance (ego center to pedestrian center) at the earliest
/// frame with any detection the ego can use.
pub fn first_detection_distance(rec: &EpisodeRecord) -> Option<f64> {
    let first = rec.detections.iter().min_by_key(|d| d.frame)?;
    let f = rec.frames.get(first.frame)?;
    let e = f.vehicles.get(rec.ego_index)?;
    let p = f.pedestrians.get(first.pedestrian)?;
    Some(((p.x - e.x).powi(2) + (p.y - e.y).powi(2)).sqrt())
}

/// Nearest-rank percentile of ascending `sorted`.
pub fn nearest_rank(sorted: &[f64], pct: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// `p_collision` times the injury logistic over the fixed grid, speeds
/// varying slowest.
pub fn injury_surface(p_collision: f64) -> Result<Vec<InjuryCell>> {
    let mut cells = Vec::with_capacity(SURFACE_SPEEDS.len() * SURFACE_AGES.len());
    for &v in &SURFACE_SPEEDS {
        for &a in &SURFACE_AGES {
            cells.push(InjuryCell {
                v,
                a,
                p: injury_probability(p_collision, v, a)?,
            });
        }
    }
    Ok(cells)
}

pub fn aggregate(records: &[EpisodeRecord], scenario: &str, mode: PerceptionMode) -> Result<SafetyReport> {
    let unit = records.first().map(|r| r.injury_speed_unit).unwrap_or_default();
    if records.iter().any(|r| r.injury_speed_unit != unit) {
        return Err(SafetyError::Aggregation("records mix injury speed units".into()));
    }
    let summaries: Vec<_> = records.iter().map(EpisodeSummary::from_record).collect();
    aggregate_summaries(&summaries, scenario, mode, unit)
}

/// Folds summaries in the given order.
pub fn aggregate_summaries(
    summaries: &[EpisodeSummary],
    scenario: &str,
    mode: PerceptionMode,
    unit: SpeedUnit,
) -> Result<SafetyReport> {
    if summaries.is_empty() {
        return Err(SafetyError::Aggregation("no episodes".into()));
    }
    let n = summaries.len();
    let collisions = summaries.iter().filter(|s| s.label == EventLabel::Collision).count();
    let conflicts = summaries.iter().filter(|s| s.label == EventLabel::Conflict).count();
    let collision_rate = collisions as f64 / n as f64;
    let conflict_rate = conflicts as f64 / n as f64;
    let injury_sum: f64 = summaries.iter().filter_map(|s| s.injury).sum();
    let mean_injury_probability = if collisions > 0 {
        (injury_sum / collisions as f64) * collision_rate
    } else {
        0.0
    };
    let distances: Vec<f64> = summaries.iter().filter_map(|s| s.first_detection_distance).collect();
    let mut sorted = distances.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(SafetyReport {
        scenario: scenario.to_string(),
        mode,
        episodes: n,
        collisions,
        conflicts,
        collision_rate,
        conflict_rate,
        mean_injury_probability,
        injury_speed_unit: unit,
        fdd_p10: nearest_rank(&sorted, 10.0),
        fdd_p50: nearest_rank(&sorted, 50.0),
        fdd_p90: nearest_rank(&sorted, 90.0),
        first_detection_distances: distances,
        injury_surface: injury_surface(collision_rate)?,
    })
}

/// 1 m bins from 0 to the largest distance in either report: rows of
/// `(left, right, count_a, count_b)`.
pub fn detection_histogram(a: &SafetyReport, b: &SafetyReport) -> Vec<(f64, f64, usize, usize)> {
    let max = a
        .first_detection_distances
        .iter()
        .chain(&b.first_detection_distances)
        .fold(0.0f64, |m, &d| m.max(d));
    let bins = (max.floor() as usize) + 1;
    let count = |ds: &[f64]| {
        let mut c = vec![0usize; bins];
        for &d in ds {
            c[(d.floor() as usize).min(bins - 1)] += 1;
        }
        c
    };
    let (ca, cb) = (count(&a.first_detection_distances), count(&b.first_detection_distances));
    (0..bins).map(|i| (i as f64, i as f64 + 1.0, ca[i], cb[i])).collect()
}
