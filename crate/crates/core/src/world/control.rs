use serde::{Deserialize, Serialize};

use super::agents::{PedestrianState, VehicleState, WalkPhase, WorldState};
use super::scenario::{ControllerKind, EgoParams, PedestrianParams, ScenarioConfig};
use super::shapes::point_rect_distance;
use super::Lane;
use crate::perception::Detection;
use crate::stochastic::RiskPreference;

/// What the ego knows about one pedestrian, built from detections only.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub pedestrian: usize,
    /// Recent `(time, estimated position)` pairs, oldest first.
    pub history: Vec<(f64, [f64; 2])>,
    pub last_seen: f64,
}

impl Track {
    pub fn position(&self) -> [f64; 2] {
        self.history.last().map(|h| h.1).unwrap_or([f64::NAN; 2])
    }

    /// Endpoint finite difference over the history window; zero with a
    /// single observation.
    pub fn velocity(&self) -> [f64; 2] {
        match (self.history.first(), self.history.last()) {
            (Some(a), Some(b)) if b.0 - a.0 > 1e-9 => {
                let dt = b.0 - a.0;
                [(b.1[0] - a.1[0]) / dt, (b.1[1] - a.1[1]) / dt]
            }
            _ => [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EgoMemory {
    pub tracks: Vec<Track>,
    /// Whether the ego was braking for a pedestrian at the last step.
    pub braking: bool,
}

impl EgoMemory {
    /// Folds this frame's detections in and drops stale tracks. Several
    /// detections of one pedestrian in a frame are averaged.
    pub fn update(&mut self, time: f64, detections: &[Detection], params: &EgoParams) {
        let mut seen: Vec<(usize, [f64; 2], usize)> = Vec::new();
        for d in detections {
            match seen.iter_mut().find(|s| s.0 == d.pedestrian) {
                Some(s) => {
                    s.1[0] += d.est_position_world[0];
                    s.1[1] += d.est_position_world[1];
                    s.2 += 1;
                }
                None => seen.push((d.pedestrian, d.est_position_world, 1)),
            }
        }
        for (ped, sum, n) in seen {
            let p = [sum[0] / n as f64, sum[1] / n as f64];
            match self.tracks.iter_mut().find(|t| t.pedestrian == ped) {
                Some(t) => {
                    t.history.push((time, p));
                    t.last_seen = time;
                }
                None => self.tracks.push(Track {
                    pedestrian: ped,
                    history: vec![(time, p)],
                    last_seen: time,
                }),
            }
        }
        let window = params.velocity_window;
        for t in &mut self.tracks {
            let last = t.last_seen;
            t.history.retain(|h| last - h.0 <= window + 1e-9);
        }
        self.tracks
            .retain(|t| time - t.last_seen <= params.track_timeout + 1e-9);
    }
}

/// True when a pedestrian at `p` moving with `vel` is ahead of the vehicle's
/// front bumper and inside its lane strip (widened by `radius`), or predicted
/// to enter it within `horizon` seconds before the vehicle's rear, at its
/// current speed, has passed the pedestrian with `clear_margin` seconds to
/// spare.
pub fn ego_conflict_predicate(
    ego: &VehicleState,
    lane: &Lane,
    p: [f64; 2],
    vel: [f64; 2],
    radius: f64,
    horizon: f64,
    clear_margin: f64,
) -> bool {
    let along = ego.along(p);
    if along - radius <= ego.extent[0] / 2.0 {
        return false;
    }
    let (lo, hi) = lane.y_range();
    let (lo, hi) = (lo - radius, hi + radius);
    let y = p[1];
    if (lo..=hi).contains(&y) {
        return true;
    }
    let vy = vel[1];
    let t_enter = if y < lo && vy > 0.0 {
        (lo - y) / vy
    } else if y > hi && vy < 0.0 {
        (hi - y) / vy
    } else {
        return false;
    };
    if t_enter > horizon {
        return false;
    }
    let t_clear = if ego.speed > 0.0 {
        (along + radius + ego.extent[0] / 2.0) / ego.speed
    } else {
        f64::INFINITY
    };
    t_clear + clear_margin > t_enter
}

fn approach_accel(v: &VehicleState, target: f64, a_up: f64, dt: f64) -> f64 {
    if v.speed < target {
        a_up.min((target - v.speed) / dt)
    } else {
        0.0
    }
}

fn ego_accel(world: &WorldState, scenario: &ScenarioConfig, dt: f64, braking: &mut bool) -> f64 {
    let ego = world.ego_vehicle();
    let lane = &scenario.layout.lanes[ego.lane];
    let params = &scenario.ego;
    let threatened = world.ego_memory.tracks.iter().any(|t| {
        let radius = world
            .pedestrians
            .get(t.pedestrian)
            .map(|p| p.radius())
            .unwrap_or(0.25);
        ego_conflict_predicate(ego, lane, t.position(), t.velocity(), radius, params.horizon, params.clear_margin)
    });
    *braking = threatened;
    if threatened {
        if ego.speed > 0.0 {
            -params.a_brake.min(ego.speed / dt)
        } else {
            0.0
        }
    } else {
        approach_accel(ego, ego.cruise_speed, params.a_resume, dt)
    }
}

const FOLLOW_STANDSTILL: f64 = 2.0;
const FOLLOW_TIME_GAP: f64 = 1.0;

fn follower_accel(world: &WorldState, i: usize, scenario: &ScenarioConfig, dt: f64) -> f64 {
    let me = &world.vehicles[i];
    let lane = &scenario.layout.lanes[me.lane];
    let a_brake = scenario.ego.a_brake;
    let mut must_stop = false;

    // Nearest vehicle ahead in the same lane.
    let lead_gap = world
        .vehicles
        .iter()
        .enumerate()
        .filter(|(j, o)| *j != i && o.lane == me.lane)
        .map(|(_, o)| me.along(o.position) - (me.extent[0] + o.extent[0]) / 2.0)
        .filter(|g| *g > -me.extent[0])
        .fold(f64::INFINITY, f64::min);
    let desired = FOLLOW_STANDSTILL + FOLLOW_TIME_GAP * me.speed;
    if lead_gap < desired {
        must_stop = true;
    }

    let horizon = if scenario.rules.pedestrian_priority {
        scenario.ego.horizon
    } else {
        0.0
    };
    for p in &world.pedestrians {
        let ahead = me.along(p.position) - p.radius() - me.extent[0] / 2.0;
        let stopping = me.speed * me.speed / (2.0 * a_brake) + FOLLOW_STANDSTILL;
        if ahead > 0.0
            && ahead <= stopping + 10.0
            && ego_conflict_predicate(me, lane, p.position, p.velocity(), p.radius(), horizon, f64::INFINITY)
        {
            must_stop = true;
        }
    }
    if must_stop {
        if me.speed > 0.0 {
            -a_brake.min(me.speed / dt)
        } else {
            0.0
        }
    } else {
        approach_accel(me, me.cruise_speed, scenario.ego.a_resume, dt)
    }
}

fn unit(v: [f64; 2]) -> Option<[f64; 2]> {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    (n > 1e-12).then(|| [v[0] / n, v[1] / n])
}

/// Vehicles near `p`, approaching it, whose lane the pedestrian has not yet
/// stepped into. With `include_occupied`, lanes the pedestrian is standing in
/// count as well.
fn threatening(
    p: &PedestrianState,
    world: &WorldState,
    scenario: &ScenarioConfig,
    params: &PedestrianParams,
    include_occupied: bool,
) -> bool {
    let Some(dir) = unit([p.destination[0] - p.position[0], p.destination[1] - p.position[1]]) else {
        return false;
    };
    let r = p.radius();
    world.vehicles.iter().any(|v| {
        let d = [p.position[0] - v.position[0], p.position[1] - v.position[1]];
        let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if dist > params.awareness_radius || dist < 1e-9 {
            return false;
        }
        let vel = v.velocity();
        let closing = (vel[0] * d[0] + vel[1] * d[1]) / dist;
        if closing <= params.closing_speed {
            return false;
        }
        let (lo, hi) = scenario.layout.lanes[v.lane].y_range();
        let y = p.position[1];
        let ahead = if dir[1] > 0.0 {
            y + r < lo
        } else if dir[1] < 0.0 {
            y - r > hi
        } else {
            false
        };
        let inside = y + r >= lo && y - r <= hi;
        ahead || (include_occupied && inside)
    })
}

fn update_pedestrian(world: &WorldState, i: usize, scenario: &ScenarioConfig, dt: f64) -> PedestrianState {
    let params = &scenario.pedestrian;
    let mut p = world.pedestrians[i].clone();
    if p.arrived() {
        p.speed = 0.0;
        return p;
    }
    let to_goal = [p.destination[0] - p.position[0], p.destination[1] - p.position[1]];
    let Some(dir) = unit(to_goal) else {
        p.phase = WalkPhase::Arrived;
        p.speed = 0.0;
        return p;
    };
    let base = p.profile.base_speed;
    let forward = dir[1].atan2(dir[0]);

    p.phase = match (p.profile.risk_preference, p.phase) {
        (RiskPreference::Unaware, _) => WalkPhase::Walking,
        (RiskPreference::PassFirst, _) => {
            if threatening(&p, world, scenario, params, true) {
                WalkPhase::Hurrying
            } else {
                WalkPhase::Walking
            }
        }
        (RiskPreference::YieldBack, phase) => {
            let threat = threatening(&p, world, scenario, params, false);
            match phase {
                WalkPhase::Walking | WalkPhase::Hurrying if threat => WalkPhase::Reversing {
                    remaining: params.yield_duration,
                },
                WalkPhase::Reversing { remaining } if threat => {
                    if remaining > 1e-9 {
                        WalkPhase::Reversing { remaining }
                    } else {
                        WalkPhase::Waiting
                    }
                }
                WalkPhase::Waiting if threat => WalkPhase::Waiting,
                _ => WalkPhase::Walking,
            }
        }
    };

    match p.phase {
        WalkPhase::Walking => {
            p.heading = forward;
            p.speed = base;
        }
        WalkPhase::Hurrying => {
            p.heading = forward;
            p.speed = base * params.pass_first_factor;
        }
        WalkPhase::Reversing { remaining } => {
            p.heading = forward + std::f64::consts::PI;
            p.speed = base;
            p.phase = WalkPhase::Reversing {
                remaining: remaining - dt,
            };
        }
        WalkPhase::Waiting | WalkPhase::Arrived => {
            p.speed = 0.0;
        }
    }
    p
}

/// Advances the world by one frame.
///
/// Controllers act on the current state and this frame's ego detections, then
/// every agent moves: `position += speed * dt` along its heading, after which
/// `speed = max(0, speed + accel * dt)`. Pedestrians set their speed directly
/// and snap to their destination when they would overshoot it.
pub fn step(world: &WorldState, detections: &[Detection], scenario: &ScenarioConfig, dt: f64) -> WorldState {
    let mut next = world.clone();
    next.ego_memory.update(world.time, detections, &scenario.ego);
    let mut braking = false;
    let accels: Vec<f64> = (0..next.vehicles.len())
        .map(|i| match next.vehicles[i].controller {
            ControllerKind::Ego => ego_accel(&next, scenario, dt, &mut braking),
            ControllerKind::Follower => follower_accel(&next, i, scenario, dt),
            ControllerKind::Parked | ControllerKind::Walker => 0.0,
        })
        .collect();
    for (v, a) in next.vehicles.iter_mut().zip(accels) {
        v.accel = a;
    }
    next.ego_memory.braking = braking;

    for v in &mut next.vehicles {
        let [c, s] = v.direction();
        v.position[0] += v.speed * c * dt;
        v.position[1] += v.speed * s * dt;
        v.speed = (v.speed + v.accel * dt).max(0.0);
    }

    for i in 0..next.pedestrians.len() {
        let mut p = update_pedestrian(world, i, scenario, dt);
        let to_goal = [p.destination[0] - p.position[0], p.destination[1] - p.position[1]];
        let remaining = (to_goal[0] * to_goal[0] + to_goal[1] * to_goal[1]).sqrt();
        let forward = matches!(p.phase, WalkPhase::Walking | WalkPhase::Hurrying);
        if forward && p.speed * dt >= remaining {
            p.position = p.destination;
            p.speed = 0.0;
            p.phase = WalkPhase::Arrived;
        } else {
            let [vx, vy] = p.velocity();
            p.position[0] += vx * dt;
            p.position[1] += vy * dt;
        }
        next.pedestrians[i] = p;
    }

    next.frame += 1;
    next.time = next.frame as f64 * dt;
    next
}

/// Ego-pedestrian contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub frame: usize,
    pub pedestrian: usize,
    /// Ego speed at first contact, m/s.
    pub impact_speed: f64,
    pub pedestrian_age: f64,
}

/// First pedestrian whose footprint disc touches the ego's footprint
/// rectangle. Touching counts: the sets are closed.
pub fn check_collision(world: &WorldState) -> Option<CollisionEvent> {
    let ego = world.ego_vehicle();
    world.pedestrians.iter().enumerate().find_map(|(i, p)| {
        let d = point_rect_distance(p.position, ego.position, ego.heading, ego.extent[0], ego.extent[1]);
        (d <= p.radius()).then_some(CollisionEvent {
            frame: world.frame,
            pedestrian: i,
            impact_speed: ego.speed,
            pedestrian_age: p.profile.age,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::{AgeGroup, Gender, PedestrianProfile};
    use crate::world::{builtin_scenario, Rgb, VehicleRole};

    fn vehicle(x: f64, speed: f64, controller: ControllerKind) -> VehicleState {
        VehicleState {
            role_index: 0,
            role: if controller == ControllerKind::Ego { VehicleRole::Ego } else { VehicleRole::Background },
            controller,
            lane: 1,
            position: [x, -1.75],
            heading: 0.0,
            speed,
            accel: 0.0,
            extent: [4.5, 1.9, 1.5],
            color: Rgb::WHITE,
            cruise_speed: speed,
            destination: [1e4, -1.75],
        }
    }

    fn pedestrian(pos: [f64; 2], risk: RiskPreference) -> PedestrianState {
        PedestrianState {
            role_index: 1,
            position: pos,
            heading: std::f64::consts::FRAC_PI_2,
            speed: 1.4,
            profile: PedestrianProfile {
                age: 25.0,
                gender: Gender::Female,
                age_group: AgeGroup::Young,
                risk_preference: risk,
                base_speed: 1.4,
            },
            body_color: Rgb::RED,
            extent: [0.5, 0.5, 1.75],
            destination: [pos[0], 9.0],
            phase: WalkPhase::Walking,
        }
    }

    fn world(vehicles: Vec<VehicleState>, pedestrians: Vec<PedestrianState>) -> WorldState {
        WorldState {
            frame: 0,
            time: 0.0,
            vehicles,
            pedestrians,
            ego: 0,
            ego_memory: EgoMemory::default(),
        }
    }

    #[test]
    fn cruising_advances_exactly() {
        let s = builtin_scenario("jaywalking").unwrap();
        let w = world(vec![vehicle(-50.0, 8.0, ControllerKind::Ego)], vec![]);
        let n = step(&w, &[], &s, 0.05);
        assert_eq!(n.vehicles[0].position[0], -50.0 + 8.0 * 0.05);
        assert_eq!(n.vehicles[0].speed, 8.0);
        assert_eq!(n.frame, 1);
    }

    #[test]
    fn yield_back_steps_backward() {
        let s = builtin_scenario("jaywalking").unwrap();
        let ego = vehicle(-8.0, 8.0, ControllerKind::Ego);
        let p = pedestrian([0.0, -6.0], RiskPreference::YieldBack);
        let w = world(vec![ego], vec![p]);
        let n = step(&w, &[], &s, 0.05);
        let vy = n.pedestrians[0].velocity()[1];
        assert!(vy <= 0.0, "vy = {vy}");
        assert!(n.pedestrians[0].position[1] < -6.0);
        // Without a threat the same pedestrian keeps walking.
        let w = world(vec![vehicle(-80.0, 8.0, ControllerKind::Ego)], vec![pedestrian([0.0, -6.0], RiskPreference::YieldBack)]);
        assert!(step(&w, &[], &s, 0.05).pedestrians[0].velocity()[1] > 0.0);
    }

    #[test]
    fn pass_first_hurries() {
        let s = builtin_scenario("jaywalking").unwrap();
        let w = world(vec![vehicle(-8.0, 8.0, ControllerKind::Ego)], vec![pedestrian([0.0, -6.0], RiskPreference::PassFirst)]);
        let n = step(&w, &[], &s, 0.05);
        assert!((n.pedestrians[0].speed - 1.4 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn braking_distance_matches_closed_form() {
        let s = builtin_scenario("jaywalking").unwrap();
        for v0 in [5.0, 8.0, 13.0] {
            let mut w = world(vec![vehicle(0.0, v0, ControllerKind::Ego)], vec![]);
            w.ego_memory.tracks.push(Track {
                pedestrian: 0,
                history: vec![(0.0, [200.0, -1.75])],
                last_seen: 0.0,
            });
            // Keep the phantom track alive.
            let mut s2 = s.clone();
            s2.ego.track_timeout = 1e9;
            s2.ego.velocity_window = 1e9;
            let mut frames = 0;
            while w.vehicles[0].speed > 0.0 && frames < 10_000 {
                w = step(&w, &[], &s2, 0.05);
                frames += 1;
            }
            let travelled = w.vehicles[0].position[0];
            let closed = v0 * v0 / (2.0 * s.ego.a_brake);
            assert!((travelled - closed).abs() <= v0 * 0.05, "{travelled} vs {closed}");
        }
    }

    #[test]
    fn collision_contact_rules() {
        let ego = vehicle(0.0, 8.0, ControllerKind::Ego);
        let far = world(vec![ego.clone()], vec![pedestrian([10.0, -1.75], RiskPreference::Unaware)]);
        assert!(check_collision(&far).is_none());
        let bumper = world(vec![ego.clone()], vec![pedestrian([2.4, -1.75], RiskPreference::Unaware)]);
        let hit = check_collision(&bumper).unwrap();
        assert_eq!(hit.impact_speed, 8.0);
        assert_eq!(hit.pedestrian_age, 25.0);
        // Exact tangency: disc edge on the front face.
        let touch = world(vec![ego], vec![pedestrian([2.25 + 0.25, -1.75], RiskPreference::Unaware)]);
        assert!(check_collision(&touch).is_some());
    }

    #[test]
    fn predicate_cases() {
        let s = builtin_scenario("jaywalking").unwrap();
        let lane = s.layout.lanes[1];
        let ego = vehicle(-20.0, 8.0, ControllerKind::Ego);
        // In the lane ahead.
        assert!(ego_conflict_predicate(&ego, &lane, [0.0, -1.0], [0.0, 0.0], 0.25, 5.0, 1.0));
        // Behind the bumper.
        assert!(!ego_conflict_predicate(&ego, &lane, [-30.0, -1.0], [0.0, 0.0], 0.25, 5.0, 1.0));
        // Approaching, enters within the horizon.
        assert!(ego_conflict_predicate(&ego, &lane, [0.0, -8.0], [0.0, 1.4], 0.25, 5.0, 1.0));
        // Close and fast enough to be past well before the pedestrian arrives.
        let quick = vehicle(-5.0, 10.0, ControllerKind::Ego);
        assert!(!ego_conflict_predicate(&quick, &lane, [0.0, -8.0], [0.0, 1.4], 0.25, 5.0, 1.0));
        assert!(ego_conflict_predicate(&quick, &lane, [0.0, -8.0], [0.0, 1.4], 0.25, 5.0, 2.5));
        // Approaching too slowly.
        assert!(!ego_conflict_predicate(&ego, &lane, [0.0, -14.0], [0.0, 1.4], 0.25, 5.0, 1.0));
        // Walking away on the far side.
        assert!(!ego_conflict_predicate(&ego, &lane, [0.0, 3.0], [0.0, 1.4], 0.25, 5.0, 1.0));
    }

    #[test]
    fn tracks_expire() {
        let params = EgoParams::default();
        let mut m = EgoMemory::default();
        let d = Detection {
            frame: 0,
            source: crate::perception::DetectionSource::Onboard,
            pedestrian: 0,
            bbox: None,
            anchor: None,
            est_distance: 10.0,
            est_position_world: [1.0, 2.0],
            truth_position_world: [1.0, 2.0],
            in_frame: true,
        };
        m.update(0.0, std::slice::from_ref(&d), &params);
        assert_eq!(m.tracks.len(), 1);
        let mut d2 = d;
        d2.est_position_world = [1.0, 2.5];
        m.update(0.25, &[d2], &params);
        assert!((m.tracks[0].velocity()[1] - 2.0).abs() < 1e-12);
        m.update(2.0, &[], &params);
        assert!(m.tracks.is_empty());
    }
}
