use crate::geometry::{Hit, Pose3, Ray, Surface, Vec3};
use crate::scalar::Scalar;

use super::SensorError;

/// Diagonal field of view of the 8×8 multizone sensor, degrees.
pub const DIAGONAL_FOV_DEG: f64 = 65.0;
pub const ZONES_PER_AXIS: usize = 8;

/// Fixed beam directions of a square multizone sensor, in the sensor frame
/// (+z is the boresight). Beams are row-major; row 0 has the lowest elevation
/// (most negative y angle), column 0 the most negative x angle.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamGrid<T> {
    per_axis_fov: T,
    zones_per_axis: usize,
    axis_angles: Vec<T>,
    directions: Vec<Vec3<T>>,
}

impl<T: Scalar> BeamGrid<T> {
    /// Zone centers split the per-axis field of view (diagonal / √2) evenly.
    pub fn new(diagonal_fov: T, zones_per_axis: usize) -> Result<Self, SensorError> {
        if zones_per_axis == 0 {
            return Err(SensorError::InvalidGrid("zones_per_axis must be at least 1"));
        }
        if !(diagonal_fov > T::zero() && diagonal_fov < T::PI()) {
            return Err(SensorError::InvalidGrid("diagonal field of view must lie in (0, π)"));
        }
        let per_axis_fov = diagonal_fov / T::SQRT_2();
        let n = T::from_usize_lossy(zones_per_axis);
        let half = T::lit(0.5);
        let axis_angles: Vec<T> = (0..zones_per_axis)
            .map(|k| -per_axis_fov * half + (T::from_usize_lossy(k) + half) * per_axis_fov / n)
            .collect();
        let mut directions = Vec::with_capacity(zones_per_axis * zones_per_axis);
        for &elevation in &axis_angles {
            for &azimuth in &axis_angles {
                let d = Vec3::new(azimuth.tan(), elevation.tan(), T::one());
                directions.push(d.normalized().expect("finite beam direction"));
            }
        }
        Ok(Self {
            per_axis_fov,
            zones_per_axis,
            axis_angles,
            directions,
        })
    }

    /// The 65° diagonal, 8×8 configuration.
    pub fn multizone_8x8() -> Self {
        Self::new(T::lit(DIAGONAL_FOV_DEG).to_radians(), ZONES_PER_AXIS).expect("valid default grid")
    }

    pub fn per_axis_fov(&self) -> T {
        self.per_axis_fov
    }

    pub fn zones_per_axis(&self) -> usize {
        self.zones_per_axis
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Per-axis zone-center angles, ascending.
    pub fn axis_angles(&self) -> &[T] {
        &self.axis_angles
    }

    pub fn directions(&self) -> &[Vec3<T>] {
        &self.directions
    }

    /// (row, column) of a beam index.
    pub fn row_col(&self, beam: usize) -> (usize, usize) {
        (beam / self.zones_per_axis, beam % self.zones_per_axis)
    }

    /// Cosine between a beam and the boresight.
    pub fn boresight_cosine(&self, beam: usize) -> T {
        self.directions[beam].z
    }
}

/// Casts every beam of `grid` from `sensor_pose` against a surface expressed in
/// the same parent frame. One hit per beam, in grid order.
pub fn raycast_scene<T: Scalar>(
    sensor_pose: &Pose3<T>,
    grid: &BeamGrid<T>,
    surface: &Surface<T>,
) -> Vec<Hit<T>> {
    let origin = sensor_pose.translation();
    grid.directions()
        .iter()
        .map(|&d| surface.raycast(&Ray::from_unit(origin, sensor_pose.transform_vector(d))))
        .collect()
}
