//! Line-of-sight tests from a camera to the pedestrian.

use nalgebra::Vector3;

use crate::geometry::{project, CameraIntrinsics, CameraPoint, RigidTransform};
use crate::world::shapes::{oriented_rect, segment_prism_entry, Point2};
use crate::world::{Rgb, RoadLayout, VehicleState, WorldState};

/// A camera placed in the world for one frame.
#[derive(Debug, Clone, Copy)]
pub struct CameraView {
    /// World-to-camera pose.
    pub pose: RigidTransform,
    pub intrinsics: CameraIntrinsics,
    pub max_range: f64,
}

impl CameraView {
    pub fn new(pose: RigidTransform, intrinsics: CameraIntrinsics, max_range: f64) -> Self {
        Self {
            pose,
            intrinsics,
            max_range,
        }
    }

    pub fn center(&self) -> Vector3<f64> {
        self.pose.origin()
    }

    pub fn to_camera(&self, world: [f64; 3]) -> CameraPoint {
        self.pose.apply(CameraPoint::new(world[0], world[1], world[2]))
    }

    /// In front of the camera, on the sensor, and within range.
    pub fn sees_point(&self, world: [f64; 3]) -> bool {
        let c = self.center();
        let range = ((world[0] - c.x).powi(2) + (world[1] - c.y).powi(2) + (world[2] - c.z).powi(2)).sqrt();
        if range > self.max_range {
            return false;
        }
        match project(self.to_camera(world), &self.intrinsics) {
            Ok(px) => self.intrinsics.in_image(px),
            Err(_) => false,
        }
    }
}

/// Anything that can block a ray or sit behind a pedestrian.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub footprint: Vec<Point2>,
    pub height: f64,
    pub color: Rgb,
}

impl Obstacle {
    pub fn from_vehicle(v: &VehicleState) -> Self {
        Self {
            footprint: oriented_rect(v.position, v.heading, v.extent[0], v.extent[1]).to_vec(),
            height: v.extent[2],
            color: v.color,
        }
    }

    /// Earliest hit parameter along `a -> b` within `[t_min, t_max]`.
    pub fn hit(&self, a: [f64; 3], b: [f64; 3], t_min: f64, t_max: f64) -> Option<f64> {
        segment_prism_entry(a, b, &self.footprint, self.height, t_min, t_max)
    }
}

/// Every vehicle except `exclude_vehicle`, plus the layout's static objects.
pub fn collect_obstacles(
    world: &WorldState,
    layout: &RoadLayout,
    exclude_vehicle: Option<usize>,
) -> Vec<Obstacle> {
    world
        .vehicles
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude_vehicle)
        .map(|(_, v)| Obstacle::from_vehicle(v))
        .chain(layout.static_objects.iter().map(|o| Obstacle {
            footprint: o.footprint.clone(),
            height: o.height,
            color: o.color,
        }))
        .collect()
}

/// Ground-plane position plus body height of the pedestrian being looked at.
#[derive(Debug, Clone, Copy)]
pub struct Target {
    pub position: [f64; 2],
    pub height: f64,
}

/// Head, torso center, both shoulders and feet.
pub fn sample_points(cam_center: Vector3<f64>, target: &Target) -> [[f64; 3]; 5] {
    let [x, y] = target.position;
    let h = target.height;
    let (dx, dy) = (x - cam_center.x, y - cam_center.y);
    let n = (dx * dx + dy * dy).sqrt();
    let (px, py) = if n > 1e-9 { (-dy / n, dx / n) } else { (0.0, 1.0) };
    let shoulder = 0.2;
    [
        [x, y, h],
        [x, y, 0.55 * h],
        [x + px * shoulder, y + py * shoulder, 0.82 * h],
        [x - px * shoulder, y - py * shoulder, 0.82 * h],
        [x, y, 0.05],
    ]
}

fn ray_blocked(from: [f64; 3], to: [f64; 3], obstacles: &[Obstacle]) -> bool {
    const EPS: f64 = 1e-9;
    obstacles.iter().any(|o| o.hit(from, to, EPS, 1.0 - EPS).is_some())
}

/// Share of the five body sample points that are in view, in range and unoccluded.
pub fn visible_fraction(view: &CameraView, target: &Target, obstacles: &[Obstacle]) -> f64 {
    let c = view.center();
    let from = [c.x, c.y, c.z];
    let visible = sample_points(c, target)
        .iter()
        .filter(|p| view.sees_point(**p) && !ray_blocked(from, **p, obstacles))
        .count();
    visible as f64 / 5.0
}

/// Nearest obstacle surface within `reach` meters behind the target along the
/// camera ray through its torso. Returns the hit point and color.
pub fn backdrop(
    view: &CameraView,
    target: &Target,
    obstacles: &[Obstacle],
    reach: f64,
) -> Option<([f64; 3], Rgb)> {
    let c = view.center();
    let torso = [target.position[0], target.position[1], 0.55 * target.height];
    let d = [torso[0] - c.x, torso[1] - c.y, torso[2] - c.z];
    let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if len < 1e-9 {
        return None;
    }
    let end = [
        torso[0] + d[0] / len * reach,
        torso[1] + d[1] / len * reach,
        torso[2] + d[2] / len * reach,
    ];
    obstacles
        .iter()
        .filter_map(|o| o.hit(torso, end, 0.0, 1.0).map(|t| (t, o.color)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(t, color)| {
            (
                [
                    torso[0] + t * (end[0] - torso[0]),
                    torso[1] + t * (end[1] - torso[1]),
                    torso[2] + t * (end[2] - torso[2]),
                ],
                color,
            )
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::intrinsics_from_spec;

    fn view_at(pos: [f64; 3], yaw: f64) -> CameraView {
        CameraView::new(
            RigidTransform::camera_pose(pos, yaw, 0.0),
            intrinsics_from_spec(800, 600, 90.0).unwrap(),
            50.0,
        )
    }

    fn wall(x0: f64, x1: f64, y0: f64, y1: f64, height: f64) -> Obstacle {
        Obstacle {
            footprint: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
            height,
            color: Rgb::GRAY,
        }
    }

    #[test]
    fn clear_view_is_fully_visible() {
        let v = view_at([0.0, 0.0, 1.0], 0.0);
        let t = Target { position: [25.0, 0.0], height: 1.75 };
        assert_eq!(visible_fraction(&v, &t, &[]), 1.0);
    }

    #[test]
    fn opaque_wall_hides_everything() {
        let v = view_at([0.0, 0.0, 1.0], 0.0);
        let t = Target { position: [25.0, 0.0], height: 1.75 };
        let w = wall(10.0, 11.0, -5.0, 5.0, 4.0);
        assert_eq!(visible_fraction(&v, &t, &[w]), 0.0);
    }

    #[test]
    fn low_occluder_leaves_only_the_head() {
        // Camera at 1.5 m: the ray to the head climbs above a 1.5 m roof while
        // the shoulder rays (1.435 m) descend into it.
        let v = view_at([0.0, 0.0, 1.5], 0.0);
        let t = Target { position: [20.0, 0.0], height: 1.75 };
        let car = wall(17.0, 19.0, -1.0, 1.0, 1.5);
        let from = [0.0, 0.0, 1.5];
        let pts = sample_points(v.center(), &t);
        let blocked: Vec<bool> = pts.iter().map(|p| car.hit(from, *p, 1e-9, 1.0 - 1e-9).is_some()).collect();
        assert_eq!(blocked, vec![false, true, true, true, true]);
        assert!((visible_fraction(&v, &t, &[car]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_or_behind_is_invisible() {
        let v = view_at([0.0, 0.0, 1.0], 0.0);
        let far = Target { position: [80.0, 0.0], height: 1.75 };
        assert_eq!(visible_fraction(&v, &far, &[]), 0.0);
        let behind = Target { position: [-10.0, 0.0], height: 1.75 };
        assert_eq!(visible_fraction(&v, &behind, &[]), 0.0);
        let wide = Target { position: [5.0, 30.0], height: 1.75 };
        assert_eq!(visible_fraction(&v, &wide, &[]), 0.0);
    }

    #[test]
    fn backdrop_found_only_within_reach() {
        let v = view_at([0.0, 0.0, 1.0], 0.0);
        let t = Target { position: [20.0, 0.0], height: 1.75 };
        let near = wall(20.4, 24.0, -1.0, 1.0, 1.5);
        let (hit, color) = backdrop(&v, &t, std::slice::from_ref(&near), 2.0).unwrap();
        assert!((hit[0] - 20.4).abs() < 1e-9);
        assert_eq!(color, Rgb::GRAY);
        let far = wall(23.0, 26.0, -1.0, 1.0, 1.5);
        assert!(backdrop(&v, &t, &[far], 2.0).is_none());
    }
}
