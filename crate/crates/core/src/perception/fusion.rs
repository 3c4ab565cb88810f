//! Roadside-to-vehicle mapping of detections.

use super::visibility::CameraView;
use super::{Detection, DetectionSource};
use crate::geometry::{backproject, project, transfer_point, BoundingBox, PixelPoint};

/// Re-expresses a roadside detection in the vehicle camera.
///
/// Every bbox corner and the anchor pixel are lifted at the roadside range
/// estimate, carried into the vehicle camera frame and projected with the
/// vehicle intrinsics. When any lifted point ends up behind the vehicle
/// camera the box is dropped and `in_frame` is cleared; the world position
/// estimate stays usable either way. The fused `est_distance` is the depth
/// along the vehicle optical axis, or the straight-line range when the point
/// is behind the camera.
pub fn fuse_v2i(roadside: &Detection, roadside_view: &CameraView, vehicle_view: &CameraView) -> Detection {
    let depth = roadside.est_distance;
    let k_i = &roadside_view.intrinsics;
    let k_v = &vehicle_view.intrinsics;
    let t_i = &roadside_view.pose;
    let t_v = &vehicle_view.pose;

    let lift = |p: PixelPoint| {
        backproject(p, depth, k_i)
            .map(|c| transfer_point(c, t_i, t_v))
            .expect("detections always carry a positive range")
    };

    let bbox = roadside.bbox.and_then(|b| {
        let pixels: Option<Vec<PixelPoint>> = b
            .corners()
            .iter()
            .map(|c| project(lift(*c), k_v).ok())
            .collect();
        pixels.and_then(BoundingBox::enclosing)
    });

    let anchor_cam = roadside.anchor.map(lift).unwrap_or_else(|| {
        // Without an anchor pixel fall back to the world estimate.
        let [x, y] = roadside.est_position_world;
        vehicle_view.to_camera([x, y, 0.0])
    });
    let anchor = project(anchor_cam, k_v).ok();
    let world = t_v.inverse().apply(anchor_cam);
    let est_distance = if anchor_cam.z > 0.0 {
        anchor_cam.z
    } else {
        anchor_cam.norm()
    };
    let in_frame = bbox.is_some() && anchor.map(|a| k_v.in_image(a)).unwrap_or(false);

    Detection {
        frame: roadside.frame,
        source: DetectionSource::Roadside,
        pedestrian: roadside.pedestrian,
        bbox,
        anchor,
        est_distance,
        est_position_world: [world.x, world.y],
        truth_position_world: roadside.truth_position_world,
        in_frame,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bbox_iou, intrinsics_from_spec, RigidTransform};
    use crate::perception::detect::{projected_bbox, try_detect, Subject};
    use crate::perception::SensorSpec;
    use crate::stochastic::rng::stream_from_seed;
    use crate::world::Rgb;

    fn subject() -> Subject {
        Subject { index: 0, position: [3.0, -6.0], radius: 0.25, height: 1.75, color: Rgb::RED }
    }

    fn exact() -> SensorSpec {
        SensorSpec { depth_noise: false, ..SensorSpec::roadside_default() }
    }

    #[test]
    fn colocated_cameras_reproduce_the_box() {
        let k = intrinsics_from_spec(800, 600, 90.0).unwrap();
        let pose = RigidTransform::camera_pose([10.0, -12.0, 6.0], 2.4, 0.35);
        let view = CameraView::new(pose, k, 60.0);
        let mut rng = stream_from_seed(1);
        let det = try_detect(&SensorSpec::roadside_default(), &view, &subject(), &[], 0, DetectionSource::Roadside, &mut rng).unwrap();
        let fused = fuse_v2i(&det, &view, &view);
        let (a, b) = (det.bbox.unwrap(), fused.bbox.unwrap());
        for (x, y) in [(a.u_min, b.u_min), (a.v_min, b.v_min), (a.u_max, b.u_max), (a.v_max, b.v_max)] {
            assert!((x - y).abs() < 1e-6);
        }
        assert!(fused.in_frame);
        assert_eq!(fused.source, DetectionSource::Roadside);
    }

    #[test]
    fn noiseless_fusion_recovers_world_position() {
        let k_i = intrinsics_from_spec(800, 600, 90.0).unwrap();
        let k_v = intrinsics_from_spec(1280, 720, 100.0).unwrap();
        let roadside = CameraView::new(RigidTransform::camera_pose([10.0, -12.0, 6.0], 2.4, 0.35), k_i, 60.0);
        let vehicle = CameraView::new(RigidTransform::camera_pose([-15.0, -1.75, 1.4], 0.0, 0.0), k_v, 50.0);
        let mut rng = stream_from_seed(2);
        let det = try_detect(&exact(), &roadside, &subject(), &[], 0, DetectionSource::Roadside, &mut rng).unwrap();
        let fused = fuse_v2i(&det, &roadside, &vehicle);
        assert!((fused.est_position_world[0] - 3.0).abs() < 1e-6);
        assert!((fused.est_position_world[1] + 6.0).abs() < 1e-6);
        assert!(fused.est_distance > 0.0);
    }

    #[test]
    fn same_orientation_fusion_gives_unit_iou() {
        // Shared center and orientation, different intrinsics: the pixel map
        // is affine, so the fused box equals the directly projected one.
        let pose = RigidTransform::camera_pose([0.0, 0.0, 1.6], 0.1, 0.05);
        let roadside = CameraView::new(pose, intrinsics_from_spec(800, 600, 90.0).unwrap(), 60.0);
        let vehicle = CameraView::new(pose, intrinsics_from_spec(1920, 1080, 70.0).unwrap(), 60.0);
        let s = Subject { position: [18.0, 2.0], ..subject() };
        let mut rng = stream_from_seed(3);
        let det = try_detect(&exact(), &roadside, &s, &[], 0, DetectionSource::Roadside, &mut rng).unwrap();
        let fused = fuse_v2i(&det, &roadside, &vehicle);
        let truth = projected_bbox(&vehicle, &s).unwrap();
        assert!((bbox_iou(&fused.bbox.unwrap(), &truth) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn behind_vehicle_camera_is_flagged() {
        let k = intrinsics_from_spec(800, 600, 90.0).unwrap();
        let roadside = CameraView::new(RigidTransform::camera_pose([10.0, -12.0, 6.0], 2.4, 0.35), k, 60.0);
        // Vehicle has already driven past and looks away.
        let vehicle = CameraView::new(RigidTransform::camera_pose([20.0, -1.75, 1.4], 0.0, 0.0), k, 50.0);
        let mut rng = stream_from_seed(4);
        let det = try_detect(&exact(), &roadside, &subject(), &[], 0, DetectionSource::Roadside, &mut rng).unwrap();
        let fused = fuse_v2i(&det, &roadside, &vehicle);
        assert!(!fused.in_frame);
        assert!(fused.bbox.is_none());
        assert!(fused.est_distance > 0.0);
        assert!((fused.est_position_world[0] - 3.0).abs() < 1e-6);
    }
}
