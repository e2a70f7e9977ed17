//! Rigid transforms, rays and ray–surface intersection.
//!
//! Everything here is in meters. Values are immutable after construction and
//! every operation is pure, so geometry can be shared freely across threads.

mod linalg;
mod obj;
mod pose;
mod raycast;

pub use linalg::{Mat3, Vec3};
pub use obj::{load_obj, parse_obj, write_obj};
pub use pose::{wrap_angle, Pose2, Pose3, ORTHONORMAL_TOLERANCE};
pub use raycast::{
    intersect_triangle, Aabb, Hit, OrientedBox, Ray, Surface, TriangleMesh, UNIT_TOLERANCE,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("rotation is not orthonormal with det +1 (max |R·Rᵀ−I| = {error:e})")]
    NotARotation { error: f64 },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("ray direction has zero length")]
    DegenerateDirection,
    #[error("box half-extents must be strictly positive")]
    NonPositiveExtent,
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("triangle {triangle} references vertex {index} but mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("OBJ line {line}: {reason}")]
    MalformedObj { line: usize, reason: &'static str },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}
