use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::CharacterizeError;
use crate::scalar::Scalar;
use crate::seed::{derive_seed, rng_from_seed};
use crate::sensor_model::{NoiseModel, CHARACTERIZED_ANGLE_DEG, MIN_RANGE_MM};

/// Far end of the range sweep, mm.
pub const SWEEP_MAX_MM: f64 = 800.0;
/// Sensor-to-pivot distance of the incidence sweep, mm.
pub const ORIENTATION_RADIUS_MM: f64 = 200.0;

/// Frames at one commanded pose.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord<T> {
    true_range_mm: T,
    theta_deg: T,
    phi_deg: T,
    readings: Vec<T>,
}

impl<T: Scalar> SweepRecord<T> {
    pub fn new(true_range_mm: T, theta_deg: T, phi_deg: T, readings: Vec<T>) -> Result<Self, CharacterizeError> {
        let bad = |m: String| Err(CharacterizeError::InvalidRecord(m));
        if readings.len() < 2 {
            return bad(format!("{} readings, need at least 2", readings.len()));
        }
        if readings.iter().any(|r| !r.is_finite()) {
            return bad("non-finite reading".into());
        }
        if !(true_range_mm >= T::lit(MIN_RANGE_MM) && true_range_mm <= T::lit(SWEEP_MAX_MM)) {
            return bad(format!("commanded range {true_range_mm} mm outside 20–800 mm"));
        }
        let limit = T::lit(CHARACTERIZED_ANGLE_DEG);
        if !(theta_deg.abs() <= limit && phi_deg.abs() <= limit) {
            return bad(format!("angles ({theta_deg}, {phi_deg})° outside ±25°"));
        }
        Ok(Self {
            true_range_mm,
            theta_deg,
            phi_deg,
            readings,
        })
    }

    pub fn true_range_mm(&self) -> T {
        self.true_range_mm
    }

    pub fn theta_deg(&self) -> T {
        self.theta_deg
    }

    pub fn phi_deg(&self) -> T {
        self.phi_deg
    }

    pub fn readings(&self) -> &[T] {
        &self.readings
    }

    pub fn mean(&self) -> T {
        crate::scalar::compensated_sum(self.readings.iter().copied()) / T::from_usize_lossy(self.readings.len())
    }

    /// Sample standard deviation (n − 1).
    pub fn std_dev(&self) -> T {
        let m = self.mean();
        let ss = crate::scalar::compensated_sum(self.readings.iter().map(|r| (*r - m) * (*r - m)));
        (ss / T::from_usize_lossy(self.readings.len() - 1)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    /// Rotation about the vertical axis: θ varies, φ = 0.
    Xy,
    /// Rotation about the horizontal axis: φ varies, θ = 0.
    Zy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SweepConfig<T> {
    pub frames_per_pose: usize,
    /// Multiplies the tabulated σ; 0 turns noise off.
    pub sigma_scale: T,
    /// Spread of the incidence sweep relative to the range sweep.
    pub orientation_sigma_ratio: T,
}

impl<T: Scalar> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            frames_per_pose: 100,
            sigma_scale: T::one(),
            orientation_sigma_ratio: T::lit(0.1),
        }
    }
}

/// 20–200 mm in 5 mm steps, then to 800 mm in 10 mm steps.
pub fn range_schedule<T: Scalar>() -> Vec<T> {
    (20..=200)
        .step_by(5)
        .chain((210..=800).step_by(10))
        .map(|mm| T::lit(mm as f64))
        .collect()
}

/// −25° to 25° in 5° steps.
pub fn orientation_schedule<T: Scalar>() -> Vec<T> {
    (-5..=5).map(|k| T::lit(5.0 * k as f64)).collect()
}

/// Normal-incidence sweep. Each reading is the raw mean the model predicts for
/// the commanded range plus Gaussian spread at the tabulated σ. Every pose
/// draws from its own stream derived from one seed taken from `rng`.
pub fn generate_range_sweep<T: Scalar, R: RngCore + ?Sized>(
    noise: &NoiseModel<T>,
    config: &SweepConfig<T>,
    rng: &mut R,
) -> Result<Vec<SweepRecord<T>>, CharacterizeError> {
    let base = rng.next_u64();
    range_schedule::<T>()
        .into_iter()
        .enumerate()
        .map(|(i, true_mm)| {
            let raw = noise.inverse_bias(true_mm);
            let sigma = config.sigma_scale * noise.sigma_at(raw)?;
            let mut stream = rng_from_seed(derive_seed(base, &[i as u64]));
            let readings = draw(raw, sigma, config.frames_per_pose, &mut stream);
            SweepRecord::new(true_mm, T::zero(), T::zero(), readings)
        })
        .collect()
}

/// Incidence sweep at a fixed 200 mm radius. The incidence error is applied to
/// the true range first and the range bias on top, so fitting inverts them in
/// the opposite order.
pub fn generate_orientation_sweep<T: Scalar, R: RngCore + ?Sized>(
    noise: &NoiseModel<T>,
    plane: Plane,
    config: &SweepConfig<T>,
    rng: &mut R,
) -> Result<Vec<SweepRecord<T>>, CharacterizeError> {
    let base = rng.next_u64();
    let true_mm = T::lit(ORIENTATION_RADIUS_MM);
    orientation_schedule::<T>()
        .into_iter()
        .enumerate()
        .map(|(i, angle)| {
            let (theta, phi) = match plane {
                Plane::Xy => (angle, T::zero()),
                Plane::Zy => (T::zero(), angle),
            };
            let raw = noise.inverse_bias(noise.inject_orientation_error(true_mm, theta, phi));
            let sigma = config.sigma_scale * config.orientation_sigma_ratio * noise.sigma_at(raw)?;
            let mut stream = rng_from_seed(derive_seed(base, &[i as u64]));
            let readings = draw(raw, sigma, config.frames_per_pose, &mut stream);
            SweepRecord::new(true_mm, theta, phi, readings)
        })
        .collect()
}

fn draw<T: Scalar, R: Rng + ?Sized>(mean: T, sigma: T, n: usize, rng: &mut R) -> Vec<T> {
    (0..n).map(|_| mean + sigma * T::standard_normal(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor_model::OrientationCoeffs;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schedules_have_expected_pose_counts() {
        let r = range_schedule::<f64>();
        assert_eq!(r.len(), (200 - 20) / 5 + 1 + (800 - 200) / 10);
        assert_eq!(r.len(), 97);
        assert_eq!((r[0], r[36], r[37], r[96]), (20.0, 200.0, 210.0, 800.0));
        assert_eq!(orientation_schedule::<f64>().len(), 11);
    }

    #[test]
    fn noiseless_readings_equal_inverse_bias() {
        let noise = NoiseModel::characterized();
        let config = SweepConfig {
            sigma_scale: 0.0,
            ..Default::default()
        };
        let sweep = generate_range_sweep(&noise, &config, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for rec in &sweep {
            let expect = (rec.true_range_mm() + 18.15) / 0.963;
            assert!(rec.readings().iter().all(|r| *r == noise.inverse_bias(rec.true_range_mm())));
            assert_abs_diff_eq!(rec.readings()[0], expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn mean_at_400_mm_is_within_monte_carlo_bound() {
        let noise = NoiseModel::characterized();
        let sweep =
            generate_range_sweep(&noise, &SweepConfig::default(), &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let rec = sweep.iter().find(|r| r.true_range_mm() == 400.0).unwrap();
        let expect: f64 = (400.0 + 18.15) / 0.963;
        let sigma = noise.sigma_at(expect).unwrap();
        assert!((rec.mean() - expect).abs() < 3.0 * sigma / 10.0);
    }

    #[test]
    fn zero_orientation_coefficients_give_zero_percent_error() {
        let noise = NoiseModel::characterized().with_orientation(OrientationCoeffs::zero()).unwrap();
        let config = SweepConfig {
            sigma_scale: 0.0,
            ..Default::default()
        };
        for plane in [Plane::Xy, Plane::Zy] {
            let sweep = generate_orientation_sweep(&noise, plane, &config, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            for rec in sweep {
                let corrected = noise.correct_range(rec.mean()).unwrap();
                assert_abs_diff_eq!((corrected / 200.0 - 1.0) * 100.0, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn generated_error_at_25_degrees() {
        let noise = NoiseModel::characterized();
        let config = SweepConfig {
            sigma_scale: 0.0,
            ..Default::default()
        };
        let sweep = generate_orientation_sweep(&noise, Plane::Xy, &config, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let last = sweep.last().unwrap();
        assert_eq!(last.theta_deg(), 25.0);
        let e = (noise.correct_range(last.mean()).unwrap() / 200.0 - 1.0) * 100.0;
        assert_abs_diff_eq!(e, -0.625 + 0.01945 + 0.06, epsilon = 1e-9);
    }

    #[test]
    fn record_rejects_single_reading_and_out_of_envelope_geometry() {
        assert!(SweepRecord::new(100.0, 0.0, 0.0, vec![1.0]).is_err());
        assert!(SweepRecord::new(900.0, 0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(SweepRecord::new(100.0, 30.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(SweepRecord::new(100.0, 0.0, 0.0, vec![1.0, 2.0]).is_ok());
    }
}
