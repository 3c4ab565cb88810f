//! Geometric stand-in for an image detector plus depth-camera ranging.

use rand::Rng;

use super::visibility::{backdrop, visible_fraction, CameraView, Obstacle, Target};
use super::{Detection, DetectionSource, SensorSpec};
use crate::geometry::{
    backproject, pedestrian_distance_from_bbox, project, BoundingBox, CameraPoint, DepthPatch,
    PixelPoint,
};

/// How far behind the pedestrian a backdrop can blend with it.
pub const BACKDROP_REACH: f64 = 2.0;
pub const PATCH_COLS: usize = 10;
pub const PATCH_ROWS: usize = 20;
/// Columns of the depth patch covered by the pedestrian (7 of 10).
const BODY_COLS: std::ops::Range<usize> = 2..9;

/// What the detector is looking at.
#[derive(Debug, Clone, Copy)]
pub struct Subject {
    pub index: usize,
    pub position: [f64; 2],
    pub radius: f64,
    pub height: f64,
    pub color: crate::world::Rgb,
}

impl Subject {
    pub fn target(&self) -> Target {
        Target {
            position: self.position,
            height: self.height,
        }
    }

    /// Body center used for ranging and localization.
    pub fn reference_point(&self) -> [f64; 3] {
        [self.position[0], self.position[1], 0.5 * self.height]
    }

    fn box_corners(&self) -> [[f64; 3]; 8] {
        let [x, y] = self.position;
        let r = self.radius;
        let mut out = [[0.0; 3]; 8];
        let mut i = 0;
        for dx in [-r, r] {
            for dy in [-r, r] {
                for z in [0.0, self.height] {
                    out[i] = [x + dx, y + dy, z];
                    i += 1;
                }
            }
        }
        out
    }
}

/// Image-plane box of the pedestrian's bounding prism; `None` if any corner
/// is behind the camera.
pub fn projected_bbox(view: &CameraView, subject: &Subject) -> Option<BoundingBox> {
    let pixels: Option<Vec<PixelPoint>> = subject
        .box_corners()
        .iter()
        .map(|c| project(view.to_camera(*c), &view.intrinsics).ok())
        .collect();
    BoundingBox::enclosing(pixels?)
}

fn quantize<R: Rng + ?Sized>(depth: f64, step: f64, noisy: bool, rng: &mut R) -> f64 {
    if !noisy {
        return depth;
    }
    let dithered = depth + (rng.random::<f64>() - 0.5) * step;
    ((dithered / step).round() * step).max(step)
}

/// Synthetic depth image over `bbox`: body pixels at the pedestrian's depth,
/// the rest at the backdrop's depth, or at the sensor's maximum range when
/// nothing stands behind.
pub fn depth_patch<R: Rng + ?Sized>(
    bbox: BoundingBox,
    body_depth: f64,
    background_depth: f64,
    sensor: &SensorSpec,
    rng: &mut R,
) -> DepthPatch {
    let step = sensor.depth_step();
    let mut depths = Vec::with_capacity(PATCH_COLS * PATCH_ROWS);
    for _row in 0..PATCH_ROWS {
        for col in 0..PATCH_COLS {
            let d = if BODY_COLS.contains(&col) {
                body_depth
            } else {
                background_depth
            };
            depths.push(quantize(d, step, sensor.depth_noise, rng));
        }
    }
    DepthPatch::new(bbox, PATCH_COLS, PATCH_ROWS, depths)
}

/// Outcome of the blending test, exposed for analysis and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlendCheck {
    NoBackdrop,
    Contrasting,
    /// Backdrop color close to the body color; carries the success draw.
    Blended { draw: f64 },
}

impl BlendCheck {
    pub fn passes(&self, detect_prob: f64) -> bool {
        match self {
            BlendCheck::NoBackdrop | BlendCheck::Contrasting => true,
            BlendCheck::Blended { draw } => *draw < detect_prob,
        }
    }
}

/// Attempts one detection of `subject` by a camera.
///
/// Detection needs the visible fraction to reach the sensor threshold and the
/// blending test to pass. A same-colored backdrop within two meters behind
/// the pedestrian lets the detection through only with the sensor's blend
/// probability, decided by one draw from `rng`.
#[allow(clippy::too_many_arguments)]
pub fn try_detect<R: Rng + ?Sized>(
    sensor: &SensorSpec,
    view: &CameraView,
    subject: &Subject,
    obstacles: &[Obstacle],
    frame: usize,
    source: DetectionSource,
    rng: &mut R,
) -> Option<Detection> {
    let target = subject.target();
    let visibility = visible_fraction(view, &target, obstacles);
    if visibility < sensor.visibility_threshold {
        return None;
    }
    let behind = backdrop(view, &target, obstacles, BACKDROP_REACH);
    let blend = match behind {
        None => BlendCheck::NoBackdrop,
        Some((_, color)) if color.distance(&subject.color) < sensor.blend_delta => {
            BlendCheck::Blended {
                draw: rng.random::<f64>(),
            }
        }
        Some(_) => BlendCheck::Contrasting,
    };
    if !blend.passes(sensor.blend_detect_prob) {
        return None;
    }

    let bbox = projected_bbox(view, subject)?;
    let reference = view.to_camera(subject.reference_point());
    let anchor = project(reference, &view.intrinsics).ok()?;
    let background_depth = match behind {
        Some((hit, _)) => view.to_camera(hit).z.max(reference.z),
        None => sensor.max_range,
    };
    let patch = depth_patch(bbox, reference.z, background_depth, sensor, rng);
    let est_distance =
        pedestrian_distance_from_bbox(&bbox, &patch, sensor.cluster_k, rng).ok()?;
    let est_camera = backproject(anchor, est_distance, &view.intrinsics).ok()?;
    let est_world = view.pose.inverse().apply(est_camera);

    Some(Detection {
        frame,
        source,
        pedestrian: subject.index,
        bbox: Some(bbox),
        anchor: Some(anchor),
        est_distance,
        est_position_world: [est_world.x, est_world.y],
        truth_position_world: subject.position,
        in_frame: view.intrinsics.in_image(anchor),
    })
}

/// Camera-frame depth of the subject's reference point.
pub fn true_depth(view: &CameraView, subject: &Subject) -> f64 {
    let p: CameraPoint = view.to_camera(subject.reference_point());
    p.z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{intrinsics_from_spec, RigidTransform};
    use crate::stochastic::rng::stream_from_seed;
    use crate::world::Rgb;

    fn sensor(noise: bool) -> SensorSpec {
        SensorSpec {
            depth_noise: noise,
            ..SensorSpec::onboard_default()
        }
    }

    fn view() -> CameraView {
        CameraView::new(
            RigidTransform::camera_pose([0.0, 0.0, 1.4], 0.0, 0.0),
            intrinsics_from_spec(800, 600, 90.0).unwrap(),
            50.0,
        )
    }

    fn subject(x: f64, y: f64) -> Subject {
        Subject {
            index: 0,
            position: [x, y],
            radius: 0.25,
            height: 1.75,
            color: Rgb::RED,
        }
    }

    #[test]
    fn clear_view_ranges_within_tolerance() {
        let mut rng = stream_from_seed(1);
        for x in [5.0, 12.0, 23.7, 41.0] {
            let s = subject(x, 1.0);
            let d = try_detect(&sensor(true), &view(), &s, &[], 3, DetectionSource::Onboard, &mut rng)
                .expect("visible pedestrian is detected");
            let truth = true_depth(&view(), &s);
            assert!((d.est_distance - truth).abs() < 0.1, "x={x}: {} vs {truth}", d.est_distance);
            assert_eq!(d.frame, 3);
            assert!(d.in_frame);
        }
    }

    #[test]
    fn noiseless_ranging_is_exact() {
        let mut rng = stream_from_seed(2);
        let s = subject(17.3, -2.2);
        let d = try_detect(&sensor(false), &view(), &s, &[], 0, DetectionSource::Onboard, &mut rng).unwrap();
        assert_eq!(d.est_distance, true_depth(&view(), &s));
        assert!((d.est_position_world[0] - 17.3).abs() < 1e-9);
        assert!((d.est_position_world[1] + 2.2).abs() < 1e-9);
    }

    #[test]
    fn hidden_pedestrian_is_not_detected() {
        let mut rng = stream_from_seed(3);
        let wall = Obstacle {
            footprint: vec![[8.0, -5.0], [9.0, -5.0], [9.0, 5.0], [8.0, 5.0]],
            height: 3.0,
            color: Rgb::GRAY,
        };
        assert!(try_detect(&sensor(true), &view(), &subject(20.0, 0.0), &[wall], 0, DetectionSource::Onboard, &mut rng).is_none());
    }

    #[test]
    fn blended_backdrop_suppresses_detection() {
        let parked = Obstacle {
            footprint: vec![[20.3, -1.0], [24.8, -1.0], [24.8, 1.0], [20.3, 1.0]],
            height: 1.5,
            color: Rgb::BLACK,
        };
        let mut s = subject(20.0, 0.0);
        s.color = Rgb::BLACK;
        let never = SensorSpec { blend_detect_prob: 0.0, ..sensor(true) };
        let mut rng = stream_from_seed(4);
        for _ in 0..200 {
            assert!(try_detect(&never, &view(), &s, std::slice::from_ref(&parked), 0, DetectionSource::Onboard, &mut rng).is_none());
        }
        // A contrasting backdrop is no obstacle to detection, and the depth
        // clustering still picks the pedestrian over the car behind.
        s.color = Rgb::WHITE;
        let d = try_detect(&never, &view(), &s, &[parked], 0, DetectionSource::Onboard, &mut rng).unwrap();
        assert!((d.est_distance - true_depth(&view(), &s)).abs() < 0.1);
    }
}
