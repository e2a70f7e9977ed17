use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FilterConfig, MclError, ParticleSet};
use crate::geometry::{wrap_angle, Pose2};
use crate::scalar::{CompensatedSum, Scalar};

/// Translation and heading error between two planar poses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PoseError<T> {
    /// Meters.
    pub e_x: T,
    /// Degrees, in [0, 180].
    pub e_gamma: T,
}

/// M particles drawn around `config.init_center` with uniform weights.
pub fn init_particles<T: Scalar, R: Rng + ?Sized>(
    config: &FilterConfig<T>,
    rng: &mut R,
) -> Result<ParticleSet<T>, MclError> {
    config.validate()?;
    let c = config.init_center;
    let sa = config.init_sigma_ang_deg.to_radians();
    let particles = (0..config.particle_count)
        .map(|_| {
            let dx = config.init_sigma_pos * T::standard_normal(rng);
            let dy = config.init_sigma_pos * T::standard_normal(rng);
            let dg = sa * T::standard_normal(rng);
            Pose2::new(c.x + dx, c.y + dy, c.gamma + dg)
        })
        .collect();
    ParticleSet::uniform(particles)
}

/// Systematic resampling to the same size, then Gaussian roughening.
pub fn resample<T: Scalar, R: Rng + ?Sized>(
    ps: &ParticleSet<T>,
    config: &FilterConfig<T>,
    rng: &mut R,
) -> ParticleSet<T> {
    let m = ps.len();
    let step = T::one() / T::from_usize_lossy(m);
    let start = T::unit_uniform(rng) * step;
    let mut chosen = Vec::with_capacity(m);
    let mut cumulative = CompensatedSum::new();
    cumulative.add(ps.weights()[0]);
    let mut j = 0;
    for i in 0..m {
        let u = start + T::from_usize_lossy(i) * step;
        while u >= cumulative.total() && j + 1 < m {
            j += 1;
            cumulative.add(ps.weights()[j]);
        }
        chosen.push(ps.particles()[j]);
    }
    let sa = config.roughening_ang_deg.to_radians();
    let particles = chosen
        .into_iter()
        .map(|p| {
            let dx = config.roughening_pos * T::standard_normal(rng);
            let dy = config.roughening_pos * T::standard_normal(rng);
            let dg = sa * T::standard_normal(rng);
            Pose2::new(p.x + dx, p.y + dy, p.gamma + dg)
        })
        .collect();
    ParticleSet::uniform(particles).expect("non-empty")
}

/// Weighted mean position and weighted circular mean heading.
pub fn estimate<T: Scalar>(ps: &ParticleSet<T>) -> Pose2<T> {
    let mut x = CompensatedSum::new();
    let mut y = CompensatedSum::new();
    let mut s = CompensatedSum::new();
    let mut c = CompensatedSum::new();
    for (p, w) in ps.particles().iter().zip(ps.weights()) {
        x.add(*w * p.x);
        y.add(*w * p.y);
        s.add(*w * p.gamma.sin());
        c.add(*w * p.gamma.cos());
    }
    let total = ps.weight_sum();
    Pose2::new(x.total() / total, y.total() / total, s.total().atan2(c.total()))
}

/// Highest-weight particle; the lowest index wins ties.
pub fn best_particle<T: Scalar>(ps: &ParticleSet<T>) -> Pose2<T> {
    let mut best = 0;
    for (i, w) in ps.weights().iter().enumerate() {
        if *w > ps.weights()[best] {
            best = i;
        }
    }
    ps.particles()[best]
}

pub fn pose_error<T: Scalar>(truth: &Pose2<T>, est: &Pose2<T>) -> PoseError<T> {
    PoseError {
        e_x: (truth.x - est.x).hypot(truth.y - est.y),
        e_gamma: wrap_angle(truth.gamma - est.gamma).abs().to_degrees(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_init_weights() {
        let ps = init_particles(&FilterConfig::<f64>::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(ps.len(), 500);
        assert!(ps.weights().iter().all(|w| *w == 0.002));
    }

    #[test]
    fn zero_sigma_init_collapses_to_center() {
        let center = Pose2::new(0.3, -0.2, 1.0);
        let config = FilterConfig {
            init_sigma_pos: 0.0,
            init_sigma_ang_deg: 0.0,
            ..FilterConfig::centered_at(center)
        };
        let ps = init_particles(&config, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(ps.particles().iter().all(|p| *p == center));
    }

    #[test]
    fn single_heavy_particle_is_copied() {
        let a = Pose2::new(1.0, 0.0, 0.0);
        let b = Pose2::new(2.0, 0.0, 0.0);
        let ps = ParticleSet::new(vec![a, b, a, b], vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let config = FilterConfig {
            roughening_pos: 0.0,
            roughening_ang_deg: 0.0,
            ..FilterConfig::default()
        };
        let out = resample(&ps, &config, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(out.particles().iter().all(|p| *p == b));
    }

    #[test]
    fn pose_error_arithmetic() {
        let truth = Pose2::from_degrees(0.5, 0.3, 30.0);
        let est = Pose2::from_degrees(0.53, 0.34, 28.0);
        let e = pose_error(&truth, &est);
        assert_abs_diff_eq!(e.e_x, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(e.e_gamma, 2.0, epsilon = 1e-9);
        let z = pose_error(&truth, &truth);
        assert_eq!((z.e_x, z.e_gamma), (0.0, 0.0));
    }

    #[test]
    fn circular_mean_wraps_through_pi() {
        let ps = ParticleSet::<f64>::uniform(vec![Pose2::from_degrees(0.0, 0.0, 179.0), Pose2::from_degrees(0.0, 0.0, -179.0)])
            .unwrap();
        let g = estimate(&ps).gamma.to_degrees().abs();
        assert_abs_diff_eq!(g, 180.0, epsilon = 1e-9);
    }

    #[test]
    fn identical_particles_estimate_themselves() {
        let p = Pose2::from_degrees(0.2, 0.1, -45.0);
        let ps = ParticleSet::uniform(vec![p; 7]).unwrap();
        let e = pose_error(&p, &estimate(&ps));
        assert!(e.e_x < 1e-15 && e.e_gamma < 1e-12);
        assert_eq!(best_particle(&ps), p);
    }
}
