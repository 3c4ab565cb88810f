use nalgebra::{Matrix3, Matrix4, Vector3};

use super::{CameraPoint, GeometryError, Result};

const RIGID_TOL: f64 = 1e-9;

/// Proper rigid motion `p -> R p + t`.
///
/// Camera mounts are stored world-to-camera: applying the transform to a
/// world point yields its coordinates in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    /// Validates that `rotation` is orthonormal with determinant +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(GeometryError::NotRigid("non-finite entry".into()));
        }
        let gram = rotation.transpose() * rotation;
        let off = (gram - Matrix3::identity()).abs().max();
        if off > RIGID_TOL {
            return Err(GeometryError::NotRigid(format!(
                "R^T R deviates from identity by {off:e}"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > RIGID_TOL {
            return Err(GeometryError::NotRigid(format!("determinant {det}")));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: [f64; 3]) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::new(t[0], t[1], t[2]),
        }
    }

    /// World-to-camera transform for a camera at `position` (world frame,
    /// `z` up) with heading `yaw` about `+z` and downward `pitch`, both in
    /// radians. The optical axis is
    /// `(cos pitch cos yaw, cos pitch sin yaw, -sin pitch)`.
    pub fn camera_pose(position: [f64; 3], yaw: f64, pitch: f64) -> Self {
        let (sy, cy) = yaw.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let forward = Vector3::new(cp * cy, cp * sy, -sp);
        let right = Vector3::new(sy, -cy, 0.0);
        let down = forward.cross(&right);
        let rotation = Matrix3::from_rows(&[
            right.transpose(),
            down.transpose(),
            forward.transpose(),
        ]);
        let c = Vector3::new(position[0], position[1], position[2]);
        Self {
            rotation,
            translation: -(rotation * c),
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// Position of the transform's origin expressed in the source frame.
    /// For a world-to-camera pose this is the camera center in world coordinates.
    pub fn origin(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn apply_vec(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn apply(&self, p: CameraPoint) -> CameraPoint {
        CameraPoint::from_vector(self.apply_vec(&p.to_vector()))
    }
}
