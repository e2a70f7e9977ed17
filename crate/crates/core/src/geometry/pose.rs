use serde::{Deserialize, Serialize};

use super::{GeometryError, Mat3, Vec3};
use crate::scalar::Scalar;

/// Tolerance on the entries of R·Rᵀ − I accepted at construction.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-9;

/// Rigid transform in SE(3): `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPose3<T>", into = "RawPose3<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Pose3<T> {
    translation: Vec3<T>,
    rotation: Mat3<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct RawPose3<T> {
    translation: Vec3<T>,
    rotation: [[T; 3]; 3],
}

impl<T: Scalar> TryFrom<RawPose3<T>> for Pose3<T> {
    type Error = GeometryError;

    fn try_from(raw: RawPose3<T>) -> Result<Self, Self::Error> {
        Pose3::new(raw.translation, Mat3::from_rows(raw.rotation))
    }
}

impl<T: Scalar> From<Pose3<T>> for RawPose3<T> {
    fn from(p: Pose3<T>) -> Self {
        Self {
            translation: p.translation,
            rotation: p.rotation.rows,
        }
    }
}

impl<T: Scalar> Pose3<T> {
    pub fn new(translation: Vec3<T>, rotation: Mat3<T>) -> Result<Self, GeometryError> {
        let tol = T::lit(ORTHONORMAL_TOLERANCE);
        let err = rotation.orthonormality_error();
        if !(err <= tol) || (rotation.determinant() - T::one()).abs() > tol {
            return Err(GeometryError::NotARotation {
                error: err.to_f64_lossy(),
            });
        }
        if !(translation.x.is_finite() && translation.y.is_finite() && translation.z.is_finite()) {
            return Err(GeometryError::NonFinite("translation"));
        }
        Ok(Self {
            translation,
            rotation,
        })
    }

    pub fn identity() -> Self {
        Self {
            translation: Vec3::zeros(),
            rotation: Mat3::identity(),
        }
    }

    pub fn from_translation(t: Vec3<T>) -> Self {
        Self {
            translation: t,
            rotation: Mat3::identity(),
        }
    }

    pub fn from_rotation(r: Mat3<T>) -> Result<Self, GeometryError> {
        Self::new(Vec3::zeros(), r)
    }

    /// Rotation Rz(yaw)·Ry(pitch)·Rx(roll), always a valid rotation.
    pub fn from_xyz_rpy(translation: Vec3<T>, roll: T, pitch: T, yaw: T) -> Self {
        Self {
            translation,
            rotation: Mat3::from_rpy(roll, pitch, yaw),
        }
    }

    pub fn translation(&self) -> Vec3<T> {
        self.translation
    }

    pub fn rotation(&self) -> &Mat3<T> {
        &self.rotation
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            translation: self.rotation * other.translation + self.translation,
            rotation: self.rotation * other.rotation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            translation: -(rt * self.translation),
            rotation: rt,
        }
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation * p + self.translation
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3<T>) -> Vec3<T> {
        self.rotation * v
    }

    /// 4×4 homogeneous form, row-major.
    pub fn to_homogeneous(&self) -> [[T; 4]; 4] {
        let r = &self.rotation.rows;
        let t = self.translation;
        let (z, o) = (T::zero(), T::one());
        [
            [r[0][0], r[0][1], r[0][2], t.x],
            [r[1][0], r[1][1], r[1][2], t.y],
            [r[2][0], r[2][1], r[2][2], t.z],
            [z, z, z, o],
        ]
    }
}

/// Planar pose on a known support plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Pose2<T> {
    pub x: T,
    pub y: T,
    /// Heading in radians, in (−π, π].
    pub gamma: T,
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle<T: Scalar>(angle: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let wrapped = angle - two_pi * ((angle - pi) / two_pi).ceil();
    // ceil can round onto the excluded endpoint for inputs just above -π.
    if wrapped <= -pi {
        wrapped + two_pi
    } else {
        wrapped
    }
}

impl<T: Scalar> Pose2<T> {
    pub fn new(x: T, y: T, gamma: T) -> Self {
        Self {
            x,
            y,
            gamma: wrap_angle(gamma),
        }
    }

    pub fn from_degrees(x: T, y: T, gamma_deg: T) -> Self {
        Self::new(x, y, gamma_deg.to_radians())
    }

    /// Places the planar pose at `height` with an in-plane rotation about z.
    pub fn lift(&self, height: T) -> Pose3<T> {
        Pose3 {
            translation: Vec3::new(self.x, self.y, height),
            rotation: Mat3::rot_z(self.gamma),
        }
    }

    /// Inverse of [`Pose2::lift`]; out-of-plane components are dropped.
    pub fn project(pose: &Pose3<T>) -> Self {
        let r = pose.rotation();
        Self::new(
            pose.translation().x,
            pose.translation().y,
            r.rows[1][0].atan2(r.rows[0][0]),
        )
    }
}
