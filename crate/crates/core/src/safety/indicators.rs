use serde::{Deserialize, Serialize};

use super::{EvaluationConfig, Result, SafetyError};
use crate::world::EpisodeRecord;

/// Positions and velocities of one agent at every recorded frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTrack {
    pub positions: Vec<[f64; 2]>,
    /// Empty means "differentiate `positions`".
    pub velocities: Vec<[f64; 2]>,
    pub half_extent: f64,
}

impl AgentTrack {
    pub fn new(positions: Vec<[f64; 2]>, velocities: Vec<[f64; 2]>, half_extent: f64) -> Self {
        Self {
            positions,
            velocities,
            half_extent,
        }
    }

    fn velocity_at(&self, k: usize, dt: f64) -> [f64; 2] {
        if !self.velocities.is_empty() {
            return self.velocities[k];
        }
        let n = self.positions.len();
        if n < 2 {
            return [0.0, 0.0];
        }
        let (a, b) = if k + 1 < n { (k, k + 1) } else { (k - 1, k) };
        [
            (self.positions[b][0] - self.positions[a][0]) / dt,
            (self.positions[b][1] - self.positions[a][1]) / dt,
        ]
    }
}

/// MD, TMD and CS of one ego-pedestrian pair, plus the frame they come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictIndicators {
    pub md: f64,
    pub tmd: f64,
    pub cs: f64,
    pub frame: usize,
}

/// Time in `[0, horizon]` at which `|r + w t|` is smallest, and that
/// distance.
pub fn closest_approach(r: [f64; 2], w: [f64; 2], horizon: f64) -> (f64, f64) {
    let ww = w[0] * w[0] + w[1] * w[1];
    let t = if ww > 0.0 {
        (-(r[0] * w[0] + r[1] * w[1]) / ww).clamp(0.0, horizon)
    } else {
        0.0
    };
    let d = [r[0] + w[0] * t, r[1] + w[1] * t];
    (t, (d[0] * d[0] + d[1] * d[1]).sqrt())
}

/// Constant-velocity surrogate safety measures.
///
/// At each frame both agents are extrapolated over `[0, horizon]`; the
/// predicted minimum center distance minus both half-extents is that frame's
/// MD. The episode MD is the smallest of these, and TMD and CS (relative
/// speed) are read off the earliest frame attaining it.
pub fn compute_indicators(
    ego: &AgentTrack,
    ped: &AgentTrack,
    horizon: f64,
    dt: f64,
) -> Result<ConflictIndicators> {
    let n = ego.positions.len();
    if n == 0 || ped.positions.len() != n {
        return Err(SafetyError::Alignment(format!(
            "ego has {n} frames, pedestrian {}",
            ped.positions.len()
        )));
    }
    for t in [ego, ped] {
        if !t.velocities.is_empty() && t.velocities.len() != n {
            return Err(SafetyError::Alignment(format!(
                "{} velocities for {n} positions",
                t.velocities.len()
            )));
        }
    }
    if !(dt > 0.0) || !(horizon >= 0.0) {
        return Err(SafetyError::Domain(format!("dt = {dt}, horizon = {horizon}")));
    }
    let reach = ego.half_extent + ped.half_extent;
    let mut per_frame = Vec::with_capacity(n);
    for k in 0..n {
        let (pe, pp) = (ego.positions[k], ped.positions[k]);
        let (ve, vp) = (ego.velocity_at(k, dt), ped.velocity_at(k, dt));
        let r = [pp[0] - pe[0], pp[1] - pe[1]];
        let w = [vp[0] - ve[0], vp[1] - ve[1]];
        let (t, d) = closest_approach(r, w, horizon);
        per_frame.push((d - reach, t, (w[0] * w[0] + w[1] * w[1]).sqrt()));
    }
    let md = per_frame.iter().map(|f| f.0).fold(f64::INFINITY, f64::min);
    let frame = per_frame
        .iter()
        .position(|f| f.0 <= md + 1e-9)
        .expect("minimum is attained");
    let (md, tmd, cs) = per_frame[frame];
    Ok(ConflictIndicators { md, tmd, cs, frame })
}

/// Ego (front-bumper point) and pedestrian tracks of a record.
pub fn episode_tracks(record: &EpisodeRecord, config: &EvaluationConfig) -> Result<(AgentTrack, Vec<AgentTrack>)> {
    let n_peds = record.frames.first().map_or(0, |f| f.pedestrians.len());
    let half_len = record.ego_extent[0] / 2.0;
    let mut ego = AgentTrack::new(Vec::new(), Vec::new(), config.ego_half_extent);
    let mut peds = vec![AgentTrack::new(Vec::new(), Vec::new(), config.pedestrian_half_extent); n_peds];
    for f in &record.frames {
        let e = f.vehicles.get(record.ego_index).ok_or_else(|| {
            SafetyError::Alignment(format!("frame {} lacks vehicle {}", f.frame, record.ego_index))
        })?;
        let (s, c) = e.heading.sin_cos();
        ego.positions.push([e.x + half_len * c, e.y + half_len * s]);
        ego.velocities.push([e.speed * c, e.speed * s]);
        if f.pedestrians.len() != n_peds {
            return Err(SafetyError::Alignment(format!("frame {} changes the pedestrian count", f.frame)));
        }
        for (t, p) in peds.iter_mut().zip(&f.pedestrians) {
            let (s, c) = p.heading.sin_cos();
            t.positions.push([p.x, p.y]);
            t.velocities.push([p.speed * c, p.speed * s]);
        }
    }
    Ok((ego, peds))
}
