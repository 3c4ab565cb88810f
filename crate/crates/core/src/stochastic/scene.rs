//! Draws the initial parameters `Θ` of one episode.
//!
//! The joint density factorizes over roles: each vehicle contributes its speed
//! density (truncated at the speed limit when one is set) times a headway
//! density for followers or a uniform arrival-offset density, and each
//! pedestrian contributes its demographic cell weight times uniform age and
//! truncated-normal walking-speed densities.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::demographics::{sample_profile, PedestrianProfile};
use super::distributions::{exp_pdf, lognormal_pdf, LogNormalModel};
use super::rng::{substream, StreamKey};
use super::{Result, StatsError};
use crate::world::{Lane, Placement, RoleSpec, ScenarioConfig, SpeedSpec, VehicleSpec};

/// Sampled initial state of one role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoleInit {
    Vehicle {
        /// Center position along the lane.
        x: f64,
        speed: f64,
        /// Drawn headway for followers, s.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        headway: Option<f64>,
        /// Drawn arrival offset for timed vehicles, s.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arrival_offset: Option<f64>,
    },
    Pedestrian {
        profile: PedestrianProfile,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialScene {
    pub roles: Vec<RoleInit>,
}

const FOLLOW_ATTEMPTS: usize = 64;
const LIMIT_ATTEMPTS: usize = 1000;

/// Time for a pedestrian walking straight from `start` at `speed` to touch
/// the lane's strip, or zero when it already does.
pub fn corridor_entry_time(start: [f64; 2], radius: f64, speed: f64, lane: &Lane) -> f64 {
    let (lo, hi) = lane.y_range();
    let y = start[1];
    let gap = if y + radius < lo {
        lo - (y + radius)
    } else if y - radius > hi {
        (y - radius) - hi
    } else {
        0.0
    };
    gap / speed
}

fn draw_speed<R: Rng + ?Sized>(model: &LogNormalModel, limit: Option<f64>, rng: &mut R) -> f64 {
    let mut v = model.sample(rng);
    if let Some(limit) = limit {
        for _ in 0..LIMIT_ATTEMPTS {
            if v <= limit {
                return v;
            }
            v = model.sample(rng);
        }
        v = v.min(limit);
    }
    v
}

fn placement_err(msg: String) -> StatsError {
    StatsError::Placement(msg)
}

fn fits(lane: &Lane, x: f64, length: f64) -> bool {
    x - length / 2.0 >= lane.x_min && x + length / 2.0 <= lane.x_max
}

/// Samples `Θ` for the episode with seed `episode_seed`. Role `i` draws from
/// its own sub-stream, so adding a role leaves the others' draws unchanged.
pub fn sample_initial_scene(config: &ScenarioConfig, episode_seed: u64) -> Result<InitialScene> {
    capacity_check(config)?;
    let mut out: Vec<Option<RoleInit>> = vec![None; config.roles.len()];

    for (i, role) in config.roles.iter().enumerate() {
        if let RoleSpec::Pedestrian(_) = role {
            let mut rng = substream(episode_seed, StreamKey::Role(i));
            out[i] = Some(RoleInit::Pedestrian {
                profile: sample_profile(&config.demographics, &mut rng),
            });
        }
    }

    for (i, role) in config.roles.iter().enumerate() {
        let RoleSpec::Vehicle(spec) = role else { continue };
        let mut rng = substream(episode_seed, StreamKey::Role(i));
        let lane = config
            .layout
            .lanes
            .get(spec.lane)
            .ok_or_else(|| placement_err(format!("role {i} uses missing lane {}", spec.lane)))?;
        let sign = lane.direction.sign();
        let speed = match spec.speed {
            SpeedSpec::Stopped => 0.0,
            SpeedSpec::Fixed { speed } => speed,
            SpeedSpec::Sampled => draw_speed(config.speed_model(), config.rules.speed_limit, &mut rng),
        };
        let length = spec.extent[0];

        let init = match spec.placement {
            Placement::Fixed { x } => RoleInit::Vehicle {
                x,
                speed,
                headway: None,
                arrival_offset: None,
            },
            Placement::Arrival {
                target_x,
                pedestrian,
                offset_min,
                offset_max,
            } => {
                let offset = offset_min + (offset_max - offset_min) * rng.random::<f64>();
                let (ped, base_speed) = match (config.pedestrian_spec(pedestrian), &out[pedestrian]) {
                    (Some(p), Some(RoleInit::Pedestrian { profile })) => (p, profile.base_speed),
                    _ => return Err(placement_err(format!("role {i} times its arrival on a non-pedestrian"))),
                };
                let t = (corridor_entry_time(ped.start, ped.radius, base_speed, lane) + offset).max(0.0);
                let x = target_x - sign * (length / 2.0 + speed * t);
                RoleInit::Vehicle {
                    x,
                    speed,
                    headway: None,
                    arrival_offset: Some(offset),
                }
            }
            Placement::Follow { leader } => {
                let (leader_x, leader_speed, leader_len) = match (&out[leader], config.vehicle(leader)) {
                    (Some(RoleInit::Vehicle { x, speed, .. }), Some(l)) => (*x, *speed, l.extent[0]),
                    _ => return Err(placement_err(format!("role {i} follows unplaced role {leader}"))),
                };
                let pace = if leader_speed > 0.0 { leader_speed } else { speed };
                if !(pace > 0.0) {
                    return Err(placement_err(format!(
                        "role {i}: a stopped vehicle cannot follow a stopped leader by headway"
                    )));
                }
                let mut placed = None;
                for _ in 0..FOLLOW_ATTEMPTS {
                    let h = config.traffic.headway.sample(&mut rng);
                    let gap = h * pace;
                    let x = leader_x - sign * (leader_len / 2.0 + gap + length / 2.0);
                    if gap > 0.0 && fits(lane, x, length) {
                        placed = Some((x, h));
                        break;
                    }
                }
                let (x, h) = placed.ok_or_else(|| {
                    placement_err(format!("role {i} does not fit behind role {leader} in lane {}", spec.lane))
                })?;
                RoleInit::Vehicle {
                    x,
                    speed,
                    headway: Some(h),
                    arrival_offset: None,
                }
            }
        };
        if let RoleInit::Vehicle { x, .. } = init {
            if !fits(lane, x, length) {
                return Err(placement_err(format!("role {i} lands at x = {x:.1}, outside lane {}", spec.lane)));
            }
        }
        out[i] = Some(init);
    }

    Ok(InitialScene {
        roles: out.into_iter().map(|r| r.expect("every role placed")).collect(),
    })
}

/// Rejects scenarios whose lanes cannot hold their vehicles end to end.
fn capacity_check(config: &ScenarioConfig) -> Result<()> {
    for (li, lane) in config.layout.lanes.iter().enumerate() {
        let used: f64 = config
            .roles
            .iter()
            .filter_map(|r| match r {
                RoleSpec::Vehicle(v) if v.lane == li => Some(v.extent[0]),
                _ => None,
            })
            .sum();
        if used > lane.length() {
            return Err(placement_err(format!(
                "lane {li} is {:.1} m long but its vehicles need {used:.1} m",
                lane.length()
            )));
        }
    }
    Ok(())
}

impl InitialScene {
    /// Log of the product-form density of `Θ` under `config`.
    pub fn log_density(&self, config: &ScenarioConfig) -> Result<f64> {
        let mut total = 0.0;
        for (i, (init, role)) in self.roles.iter().zip(&config.roles).enumerate() {
            match (init, role) {
                (RoleInit::Pedestrian { profile }, RoleSpec::Pedestrian(_)) => {
                    total += pedestrian_log_density(config, profile)?;
                }
                (
                    RoleInit::Vehicle {
                        speed,
                        headway,
                        arrival_offset,
                        ..
                    },
                    RoleSpec::Vehicle(spec),
                ) => {
                    total += vehicle_log_density(config, spec, *speed, *headway, *arrival_offset)?;
                }
                _ => return Err(StatsError::Domain(format!("role {i} does not match the scenario"))),
            }
        }
        Ok(total)
    }
}

fn vehicle_log_density(
    config: &ScenarioConfig,
    spec: &VehicleSpec,
    speed: f64,
    headway: Option<f64>,
    offset: Option<f64>,
) -> Result<f64> {
    let mut ld = 0.0;
    if spec.speed == SpeedSpec::Sampled {
        let model = config.speed_model();
        ld += lognormal_pdf(model, speed)?.ln();
        if let Some(limit) = config.rules.speed_limit {
            ld -= model.cdf(limit).ln();
        }
    }
    if let Some(h) = headway {
        ld += exp_pdf(&config.traffic.headway, h)?.ln();
    }
    if let (Some(_), Placement::Arrival { offset_min, offset_max, .. }) = (offset, spec.placement) {
        if offset_max > offset_min {
            ld -= (offset_max - offset_min).ln();
        }
    }
    Ok(ld)
}

fn pedestrian_log_density(config: &ScenarioConfig, p: &PedestrianProfile) -> Result<f64> {
    let t = &config.demographics;
    let w = t.cell_probability(p.age_group, p.gender, p.risk_preference);
    let (lo, hi) = p.age_group.bounds();
    let g = t.group_speed(p.age_group);
    if !(w > 0.0) || !p.age_group.contains(p.age) || !(p.base_speed > t.min_speed()) {
        return Err(StatsError::Domain(format!("profile {p:?} has zero density")));
    }
    let speed = if g.std_dev > 0.0 {
        let n = Normal::new(g.mean, g.std_dev).map_err(|e| StatsError::InvalidModel(e.to_string()))?;
        n.ln_pdf(p.base_speed) - (1.0 - n.cdf(t.min_speed())).ln()
    } else {
        0.0
    };
    Ok(w.ln() - (hi - lo).ln() + speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::rng::episode_seed;
    use crate::world::{builtin_scenario, ControllerKind, Rgb, VehicleRole};

    fn ped_only() -> ScenarioConfig {
        let mut s = builtin_scenario("jaywalking").unwrap();
        s.roles.retain(|r| matches!(r, RoleSpec::Pedestrian(_)));
        s.controllers = vec![ControllerKind::Walker];
        s.destinations.truncate(1);
        s
    }

    #[test]
    fn pedestrian_only_scene_has_one_profile() {
        let s = ped_only();
        let theta = sample_initial_scene(&s, 9).unwrap();
        assert_eq!(theta.roles.len(), 1);
        assert!(matches!(theta.roles[0], RoleInit::Pedestrian { .. }));
    }

    #[test]
    fn same_seed_same_theta() {
        let s = builtin_scenario("crossing").unwrap();
        for i in 0..20 {
            let seed = episode_seed(42, i);
            assert_eq!(sample_initial_scene(&s, seed).unwrap(), sample_initial_scene(&s, seed).unwrap());
        }
    }

    fn two_in_a_lane() -> ScenarioConfig {
        let mut s = builtin_scenario("jaywalking").unwrap();
        // Keep pedestrian, ego and follower.
        s.roles.truncate(3);
        s.controllers.truncate(3);
        s.destinations.truncate(3);
        s
    }

    #[test]
    fn follower_gap_is_headway_times_leader_speed() {
        let s = two_in_a_lane();
        for i in 0..10_000u64 {
            let theta = sample_initial_scene(&s, episode_seed(3, i)).unwrap();
            let (RoleInit::Vehicle { x: xl, speed: vl, .. }, RoleInit::Vehicle { x: xf, headway: Some(h), .. }) =
                (theta.roles[1], theta.roles[2])
            else {
                panic!("unexpected roles");
            };
            let gap = (xl - 2.25) - (xf + 2.25);
            assert!(gap > 0.0);
            assert!((gap - h * vl).abs() < 1e-9 * (1.0 + gap));
        }
    }

    #[test]
    fn speed_limit_truncates() {
        let s = two_in_a_lane();
        let limit = s.rules.speed_limit.unwrap();
        for i in 0..2000u64 {
            let theta = sample_initial_scene(&s, episode_seed(5, i)).unwrap();
            for r in theta.roles {
                if let RoleInit::Vehicle { speed, .. } = r {
                    assert!(speed <= limit);
                }
            }
        }
    }

    #[test]
    fn arrival_offset_times_the_ego() {
        let s = two_in_a_lane();
        let RoleSpec::Pedestrian(ped) = s.roles[0] else { panic!() };
        let lane = s.layout.lanes[1];
        for i in 0..200u64 {
            let theta = sample_initial_scene(&s, episode_seed(8, i)).unwrap();
            let RoleInit::Pedestrian { profile } = theta.roles[0] else { panic!() };
            let RoleInit::Vehicle { x, speed, arrival_offset: Some(off), .. } = theta.roles[1] else { panic!() };
            let t_entry = corridor_entry_time(ped.start, ped.radius, profile.base_speed, &lane);
            let front = x + 2.25;
            assert!((front + speed * (t_entry + off) - 0.0).abs() < 1e-9);
        }
    }

    #[test]
    fn overfull_lane_is_a_placement_error() {
        let mut s = two_in_a_lane();
        for _ in 0..200 {
            s.roles.push(RoleSpec::Vehicle(VehicleSpec {
                role: VehicleRole::Background,
                lane: 3,
                placement: Placement::Fixed { x: 0.0 },
                speed: SpeedSpec::Stopped,
                extent: [4.5, 1.9, 1.5],
                color: Rgb::GRAY,
                lateral_offset: 0.0,
            }));
            s.controllers.push(ControllerKind::Parked);
            s.destinations.push([0.0, 5.25]);
        }
        assert!(matches!(sample_initial_scene(&s, 1), Err(StatsError::Placement(_))));
    }

    #[test]
    fn log_density_is_finite_and_factorizes() {
        let s = two_in_a_lane();
        let theta = sample_initial_scene(&s, 77).unwrap();
        let joint = theta.log_density(&s).unwrap();
        assert!(joint.is_finite());
        let mut sum = 0.0;
        for (init, role) in theta.roles.iter().zip(&s.roles) {
            let single = ScenarioConfig {
                roles: vec![*role],
                ..s.clone()
            };
            sum += InitialScene { roles: vec![*init] }.log_density(&single).unwrap();
        }
        assert!((joint - sum).abs() < 1e-12);
    }
}
