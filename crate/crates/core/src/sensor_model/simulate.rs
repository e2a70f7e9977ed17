use rand::Rng;

use super::noise::{check_operating_range, MAX_RANGE_MM};
use super::{BeamGrid, NoiseModel};
use crate::geometry::{Pose3, Ray, Surface};
use crate::scalar::Scalar;

/// One 8×8 (in general n×n) frame of readings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanFrame<T> {
    pub sensor_id: usize,
    pub timestamp_index: usize,
    /// Meters; meaningless where `valid` is false.
    pub ranges: Vec<T>,
    pub valid: Vec<bool>,
}

impl<T: Scalar> ScanFrame<T> {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn range_mm(&self, beam: usize) -> T {
        self.ranges[beam] * T::lit(1000.0)
    }
}

/// Ray-cast truth for one beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamTruth<T> {
    pub hit: bool,
    /// Radial distance projected on the boresight, mm (the firmware-compensated quantity).
    pub axis_range_mm: T,
    /// Incidence angles of the hit surface in the sensor frame, degrees.
    pub theta_deg: T,
    pub phi_deg: T,
}

impl<T: Scalar> BeamTruth<T> {
    fn miss() -> Self {
        Self {
            hit: false,
            axis_range_mm: T::lit(MAX_RANGE_MM),
            theta_deg: T::zero(),
            phi_deg: T::zero(),
        }
    }
}

/// Casts the given beams of a sensor against a surface placed at `object_pose`.
///
/// The ray is moved into the object frame rather than moving the surface, so
/// the same object-frame mesh serves every particle hypothesis. Beams that miss
/// report the maximum operating range.
pub fn predict_beams<T: Scalar>(
    object_pose: &Pose3<T>,
    sensor_pose: &Pose3<T>,
    grid: &BeamGrid<T>,
    surface: &Surface<T>,
    beams: impl IntoIterator<Item = usize>,
    out: &mut Vec<BeamTruth<T>>,
) {
    let sensor_in_object = object_pose.inverse().compose(sensor_pose);
    let origin = sensor_in_object.translation();
    let rotation = sensor_in_object.rotation();
    let to_sensor = rotation.transpose();
    let mm = T::lit(1000.0);
    out.clear();
    for beam in beams {
        let d = grid.directions()[beam];
        let ray = Ray::from_unit(origin, *rotation * d);
        let hit = surface.raycast(&ray);
        if !hit.valid {
            out.push(BeamTruth::miss());
            continue;
        }
        let mut n = to_sensor * hit.normal;
        if n.z > T::zero() {
            n = -n;
        }
        out.push(BeamTruth {
            hit: true,
            axis_range_mm: hit.distance * d.z * mm,
            theta_deg: n.x.atan2(-n.z).to_degrees(),
            phi_deg: n.y.atan2(-n.z).to_degrees(),
        });
    }
}

/// Forward model of the sensor: the inverse of the PSM correction pipeline plus
/// Gaussian read noise.
#[derive(Debug, Clone)]
pub struct ReadingSimulator<T> {
    pub grid: BeamGrid<T>,
    pub noise: NoiseModel<T>,
    /// Multiplies the tabulated σ; 0 gives noiseless readings.
    pub sigma_scale: T,
}

impl<T: Scalar> ReadingSimulator<T> {
    pub fn new(grid: BeamGrid<T>, noise: NoiseModel<T>) -> Self {
        Self {
            grid,
            noise,
            sigma_scale: T::one(),
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.sigma_scale = T::zero();
        self
    }

    pub fn with_sigma_scale(mut self, scale: T) -> Self {
        self.sigma_scale = scale;
        self
    }

    /// Raw reading (mm) for a true axis range: add the incidence error, undo the
    /// bias correction, then add noise with σ taken at the biased range.
    /// `None` when the reading leaves the operating range.
    pub fn reading_mm<R: Rng + ?Sized>(&self, truth: &BeamTruth<T>, rng: &mut R) -> Option<T> {
        if !truth.hit {
            return None;
        }
        let skewed = self
            .noise
            .inject_orientation_error(truth.axis_range_mm, truth.theta_deg, truth.phi_deg);
        let biased = self.noise.inverse_bias(skewed);
        let sigma = self.noise.sigma_at(biased).ok()?;
        // Draw even when σ = 0 so noisy and noiseless runs consume the stream alike.
        let noisy = biased + self.sigma_scale * sigma * T::standard_normal(rng);
        check_operating_range(noisy).ok().map(|_| noisy)
    }

    /// Simulates one frame from a sensor at `sensor_pose` viewing `surface` placed
    /// at `object_pose` (both in the world frame).
    pub fn simulate_scan<R: Rng + ?Sized>(
        &self,
        object_pose: &Pose3<T>,
        sensor_pose: &Pose3<T>,
        surface: &Surface<T>,
        sensor_id: usize,
        timestamp_index: usize,
        rng: &mut R,
    ) -> ScanFrame<T> {
        let mut truths = Vec::with_capacity(self.grid.len());
        predict_beams(object_pose, sensor_pose, &self.grid, surface, 0..self.grid.len(), &mut truths);
        let mut ranges = Vec::with_capacity(truths.len());
        let mut valid = Vec::with_capacity(truths.len());
        for truth in &truths {
            match self.reading_mm(truth, rng) {
                Some(mm) => {
                    ranges.push(mm / T::lit(1000.0));
                    valid.push(true);
                }
                None => {
                    ranges.push(T::zero());
                    valid.push(false);
                }
            }
        }
        ScanFrame {
            sensor_id,
            timestamp_index,
            ranges,
            valid,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, Vec3};
    use crate::sensor_model::{OrientationCoeffs, MIN_RANGE_MM};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Large slab whose near face is the plane z = `distance`.
    fn wall(distance: f64) -> Surface<f64> {
        Surface::Aabb(Aabb::new(Vec3::new(0.0, 0.0, distance + 0.5), Vec3::new(10.0, 10.0, 0.5)).unwrap())
    }

    fn identity_noise() -> NoiseModel<f64> {
        NoiseModel::characterized()
            .with_range_line(1.0, 0.0)
            .unwrap()
            .with_orientation(OrientationCoeffs::zero())
            .unwrap()
    }

    #[test]
    fn identity_model_reads_plane_distance_on_every_beam() {
        let sim = ReadingSimulator::new(BeamGrid::multizone_8x8(), identity_noise()).noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let frame = sim.simulate_scan(&Pose3::identity(), &Pose3::identity(), &wall(0.3), 0, 0, &mut rng);
        assert_eq!(frame.valid_count(), 64);
        for r in &frame.ranges {
            assert_abs_diff_eq!(*r, 0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn noiseless_reading_inverts_bias_line() {
        let truth = BeamTruth {
            hit: true,
            axis_range_mm: 463.35,
            theta_deg: 0.0,
            phi_deg: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let no_orientation = NoiseModel::characterized()
            .with_orientation(OrientationCoeffs::zero())
            .unwrap();
        let sim = ReadingSimulator::new(BeamGrid::multizone_8x8(), no_orientation).noiseless();
        assert_abs_diff_eq!(sim.reading_mm(&truth, &mut rng).unwrap(), 500.0, epsilon = 1e-9);
        // With the full model the 0.06 % normal-incidence term is injected too.
        let sim = ReadingSimulator::new(BeamGrid::multizone_8x8(), NoiseModel::characterized()).noiseless();
        let expect = (463.35 * 1.0006 + 18.15) / 0.963;
        assert_abs_diff_eq!(sim.reading_mm(&truth, &mut rng).unwrap(), expect, epsilon = 1e-9);
    }

    #[test]
    fn beam_spread_matches_table_sigma() {
        // Plane placed so the biased reading sits at 400 mm measured.
        let noise = NoiseModel::characterized();
        let true_mm = noise.apply_orientation_correction(noise.correct_range(400.0).unwrap(), 0.0, 0.0);
        let sim = ReadingSimulator::new(BeamGrid::multizone_8x8(), noise);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let surface = wall(true_mm / 1000.0);
        let mut center = Vec::new();
        for t in 0..100 {
            let frame = sim.simulate_scan(&Pose3::identity(), &Pose3::identity(), &surface, 0, t, &mut rng);
            // Beam 27 is adjacent to the boresight; its truth is the plane distance.
            center.push(frame.range_mm(27));
            for beam in 0..64 {
                assert!(frame.valid[beam]);
                assert!(frame.range_mm(beam) >= MIN_RANGE_MM);
            }
        }
        let mean = center.iter().sum::<f64>() / center.len() as f64;
        let var = center.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (center.len() - 1) as f64;
        let sd = var.sqrt();
        assert!((2.1..=2.7).contains(&sd), "sample σ {sd}");
    }

    #[test]
    fn surface_outside_fov_gives_no_valid_beams() {
        let sim = ReadingSimulator::new(BeamGrid::multizone_8x8(), NoiseModel::characterized());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let behind = Surface::Aabb(Aabb::new(Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.2, 0.2, 0.2)).unwrap());
        let frame = sim.simulate_scan(&Pose3::identity(), &Pose3::identity(), &behind, 0, 0, &mut rng);
        assert_eq!(frame.valid_count(), 0);
    }

    #[test]
    fn readings_beyond_operating_range_are_invalid() {
        let sim = ReadingSimulator::new(BeamGrid::multizone_8x8(), NoiseModel::characterized()).noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frame = sim.simulate_scan(&Pose3::identity(), &Pose3::identity(), &wall(5.0), 0, 0, &mut rng);
        assert_eq!(frame.valid_count(), 0);
        // 10 mm true reads ~29.6 mm raw: inside the operating range.
        let frame = sim.simulate_scan(&Pose3::identity(), &Pose3::identity(), &wall(0.010), 0, 0, &mut rng);
        assert!(frame.valid.iter().all(|&v| v));
    }

    #[test]
    fn tilted_plane_reports_incidence_angles() {
        let tilt = 12f64.to_radians();
        let mut truths = Vec::new();
        let sensor = Pose3::from_xyz_rpy(Vec3::zeros(), 0.0, tilt, 0.0);
        predict_beams(&Pose3::identity(), &sensor, &BeamGrid::multizone_8x8(), &wall(0.3), 0..64, &mut truths);
        for t in &truths {
            assert!(t.hit);
            assert_abs_diff_eq!(t.theta_deg.abs(), 12.0, epsilon = 1e-9);
            assert_abs_diff_eq!(t.phi_deg, 0.0, epsilon = 1e-9);
        }
    }
}
