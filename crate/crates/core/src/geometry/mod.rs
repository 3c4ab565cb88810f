//! Pinhole camera mathematics.
//!
//! Camera frames follow the usual computer-vision convention: `X` to the
//! right, `Y` down, `Z` along the optical axis. World frames are
//! right-handed with `z` up.

mod cluster;
mod transform;

pub use cluster::{cluster_depths, pedestrian_distance_from_bbox, DepthCluster, DepthPatch};
pub use transform::RigidTransform;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid camera spec: {0}")]
    InvalidSpec(String),
    #[error("depth must be positive, got {0}")]
    InvalidDepth(f64),
    #[error("point is behind the camera (Z = {0})")]
    BehindCamera(f64),
    #[error("rotation block is not a proper rotation: {0}")]
    NotRigid(String),
    #[error("no samples to cluster")]
    EmptyInput,
    #[error("cluster count {k} is invalid for {n} samples")]
    InvalidClusterCount { k: usize, n: usize },
    #[error("depth patch does not cover the bounding box")]
    PatchDoesNotCoverBox,
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// Continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

/// A point expressed in a camera frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CameraPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_vector(self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: nalgebra::Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
}

impl BoundingBox {
    /// Builds a box, swapping coordinates if they were given out of order.
    pub fn new(u0: f64, v0: f64, u1: f64, v1: f64) -> Self {
        Self {
            u_min: u0.min(u1),
            v_min: v0.min(v1),
            u_max: u0.max(u1),
            v_max: v0.max(v1),
        }
    }

    /// Smallest box containing every point. `None` for an empty iterator.
    pub fn enclosing<I: IntoIterator<Item = PixelPoint>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Self::new(first.u, first.v, first.u, first.v);
        for p in it {
            b.u_min = b.u_min.min(p.u);
            b.v_min = b.v_min.min(p.v);
            b.u_max = b.u_max.max(p.u);
            b.v_max = b.v_max.max(p.v);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.u_max - self.u_min
    }

    pub fn height(&self) -> f64 {
        self.v_max - self.v_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> PixelPoint {
        PixelPoint::new(
            0.5 * (self.u_min + self.u_max),
            0.5 * (self.v_min + self.v_max),
        )
    }

    /// Corners in the order top-left, top-right, bottom-right, bottom-left.
    pub fn corners(&self) -> [PixelPoint; 4] {
        [
            PixelPoint::new(self.u_min, self.v_min),
            PixelPoint::new(self.u_max, self.v_min),
            PixelPoint::new(self.u_max, self.v_max),
            PixelPoint::new(self.u_min, self.v_max),
        ]
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        p.u >= self.u_min && p.u <= self.u_max && p.v >= self.v_min && p.v <= self.v_max
    }

    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        other.u_min >= self.u_min
            && other.v_min >= self.v_min
            && other.u_max <= self.u_max
            && other.v_max <= self.v_max
    }
}

/// Intersection over union of two boxes; 0 when they are disjoint or both degenerate.
pub fn bbox_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.u_max.min(b.u_max) - a.u_min.max(b.u_min)).max(0.0);
    let ih = (a.v_max.min(b.v_max) - a.v_min.max(b.v_min)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Pinhole intrinsics built from image size and horizontal field of view.
///
/// The focal length is `width / (2 tan(fov / 2))` and the principal point
/// sits exactly at the image center. Square pixels, so `fx == fy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntrinsicsSpec", into = "IntrinsicsSpec")]
pub struct CameraIntrinsics {
    width: u32,
    height: u32,
    fov_deg: f64,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntrinsicsSpec {
    width: u32,
    height: u32,
    fov_deg: f64,
}

impl TryFrom<IntrinsicsSpec> for CameraIntrinsics {
    type Error = GeometryError;

    fn try_from(s: IntrinsicsSpec) -> Result<Self> {
        intrinsics_from_spec(s.width, s.height, s.fov_deg)
    }
}

impl From<CameraIntrinsics> for IntrinsicsSpec {
    fn from(k: CameraIntrinsics) -> Self {
        Self {
            width: k.width,
            height: k.height,
            fov_deg: k.fov_deg,
        }
    }
}

pub fn intrinsics_from_spec(width: u32, height: u32, fov_deg: f64) -> Result<CameraIntrinsics> {
    if width == 0 || height == 0 {
        return Err(GeometryError::InvalidSpec(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    if !(fov_deg > 0.0 && fov_deg < 180.0) {
        return Err(GeometryError::InvalidSpec(format!(
            "horizontal fov must be in (0, 180) degrees, got {fov_deg}"
        )));
    }
    let f = width as f64 / (2.0 * (fov_deg.to_radians() / 2.0).tan());
    Ok(CameraIntrinsics {
        width,
        height,
        fov_deg,
        fx: f,
        fy: f,
        cx: width as f64 / 2.0,
        cy: height as f64 / 2.0,
    })
}

impl CameraIntrinsics {
    pub fn new(width: u32, height: u32, fov_deg: f64) -> Result<Self> {
        intrinsics_from_spec(width, height, fov_deg)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn fov_deg(&self) -> f64 {
        self.fov_deg
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }

    pub fn fy(&self) -> f64 {
        self.fy
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn matrix(&self) -> nalgebra::Matrix3<f64> {
        nalgebra::Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Whether the pixel lies on the sensor.
    pub fn in_image(&self, p: PixelPoint) -> bool {
        p.u >= 0.0 && p.u <= self.width as f64 && p.v >= 0.0 && p.v <= self.height as f64
    }
}

/// Lifts a pixel to the camera frame at the given depth.
pub fn backproject(p: PixelPoint, depth: f64, k: &CameraIntrinsics) -> Result<CameraPoint> {
    if !(depth > 0.0) || !depth.is_finite() {
        return Err(GeometryError::InvalidDepth(depth));
    }
    Ok(CameraPoint::new(
        (p.u - k.cx) * depth / k.fx,
        (p.v - k.cy) * depth / k.fy,
        depth,
    ))
}

/// Projects a camera-frame point onto the pixel plane.
pub fn project(p: CameraPoint, k: &CameraIntrinsics) -> Result<PixelPoint> {
    if !(p.z > 0.0) {
        return Err(GeometryError::BehindCamera(p.z));
    }
    Ok(PixelPoint::new(
        k.fx * p.x / p.z + k.cx,
        k.fy * p.y / p.z + k.cy,
    ))
}

/// Maps a point from the roadside camera frame into the vehicle camera frame.
///
/// `roadside` and `vehicle` are the world-to-camera poses of the two cameras.
pub fn transfer_point(
    p: CameraPoint,
    roadside: &RigidTransform,
    vehicle: &RigidTransform,
) -> CameraPoint {
    vehicle.apply(roadside.inverse().apply(p))
}

/// Pixel in one camera, at a known depth, to pixel in another camera.
pub fn map_pixel(
    p: PixelPoint,
    depth: f64,
    k_from: &CameraIntrinsics,
    from: &RigidTransform,
    to: &RigidTransform,
    k_to: &CameraIntrinsics,
) -> Result<PixelPoint> {
    let lifted = backproject(p, depth, k_from)?;
    let moved = transfer_point(lifted, from, to);
    project(moved, k_to)
}
