//! Particle-filter localization of an object's planar pose.

mod filter;
mod run;
mod update;

pub use filter::{best_particle, estimate, init_particles, pose_error, resample, PoseError};
pub use run::{read_trace_csv, run_localization, write_trace_csv, Localization, TraceRow};
pub use update::{sample_log_likelihood, update_weights, UpdateOutcome};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Pose2;
use crate::scalar::Scalar;
use crate::sensor_model::SensorError;

#[derive(Debug, Error)]
pub enum MclError {
    #[error("invalid filter config: {0}")]
    InvalidConfig(String),
    #[error("particle set: {0}")]
    InvalidParticles(String),
    #[error("localization needs at least one data sample")]
    NoSamples,
    #[error("unknown measurement mode `{0}` (expected averaged or per-beam)")]
    UnknownMode(String),
    #[error(transparent)]
    Sensor(#[from] SensorError),
}

/// How the beams of one sensor enter the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementMode {
    /// Average the accepted beams and compare the mean against the mean truth.
    #[default]
    Averaged,
    /// Treat beams as independent and multiply their likelihoods.
    PerBeam,
}

impl fmt::Display for MeasurementMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasurementMode::Averaged => "averaged",
            MeasurementMode::PerBeam => "per-beam",
        })
    }
}

impl FromStr for MeasurementMode {
    type Err = MclError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "averaged" => Ok(MeasurementMode::Averaged),
            "per-beam" | "per_beam" | "perbeam" => Ok(MeasurementMode::PerBeam),
            _ => Err(MclError::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FilterConfig<T> {
    pub particle_count: usize,
    pub init_center: Pose2<T>,
    /// Meters.
    pub init_sigma_pos: T,
    pub init_sigma_ang_deg: T,
    /// Per-axis jitter added to every resampled particle (meters).
    pub roughening_pos: T,
    pub roughening_ang_deg: T,
    pub measurement_mode: MeasurementMode,
    /// Evaluate particle likelihoods on the rayon pool. Results are identical either way.
    pub parallel: bool,
}

impl<T: Scalar> Default for FilterConfig<T> {
    fn default() -> Self {
        Self {
            particle_count: 500,
            init_center: Pose2::new(T::zero(), T::zero(), T::zero()),
            init_sigma_pos: T::lit(0.15),
            init_sigma_ang_deg: T::lit(6.0),
            roughening_pos: T::lit(0.002),
            roughening_ang_deg: T::lit(0.2),
            measurement_mode: MeasurementMode::Averaged,
            parallel: true,
        }
    }
}

impl<T: Scalar> FilterConfig<T> {
    pub fn centered_at(center: Pose2<T>) -> Self {
        Self {
            init_center: center,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), MclError> {
        if self.particle_count == 0 {
            return Err(MclError::InvalidConfig("particle_count must be at least 1".into()));
        }
        let sigmas = [
            ("init_sigma_pos", self.init_sigma_pos),
            ("init_sigma_ang_deg", self.init_sigma_ang_deg),
            ("roughening_pos", self.roughening_pos),
            ("roughening_ang_deg", self.roughening_ang_deg),
        ];
        for (name, s) in sigmas {
            if !(s >= T::zero() && s.is_finite()) {
                return Err(MclError::InvalidConfig(format!("{name} must be finite and ≥ 0, got {s}")));
            }
        }
        let c = self.init_center;
        if !(c.x.is_finite() && c.y.is_finite() && c.gamma.is_finite()) {
            return Err(MclError::InvalidConfig("init_center must be finite".into()));
        }
        Ok(())
    }
}

/// Weighted pose hypotheses. Weights are kept normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet<T> {
    particles: Vec<Pose2<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> ParticleSet<T> {
    /// Normalizes `weights`; they must be non-negative, finite and not all zero.
    pub fn new(particles: Vec<Pose2<T>>, weights: Vec<T>) -> Result<Self, MclError> {
        if particles.is_empty() || particles.len() != weights.len() {
            return Err(MclError::InvalidParticles(format!(
                "{} particles with {} weights",
                particles.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= T::zero() && w.is_finite())) {
            return Err(MclError::InvalidParticles("weights must be finite and non-negative".into()));
        }
        let mut set = Self { particles, weights };
        if !set.normalize() {
            return Err(MclError::InvalidParticles("all weights are zero".into()));
        }
        Ok(set)
    }

    pub fn uniform(particles: Vec<Pose2<T>>) -> Result<Self, MclError> {
        let w = vec![T::one(); particles.len()];
        Self::new(particles, w)
    }

    pub fn particles(&self) -> &[Pose2<T>] {
        &self.particles
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weight_sum(&self) -> T {
        crate::scalar::compensated_sum(self.weights.iter().copied())
    }

    /// `1 / Σ w²`.
    pub fn effective_sample_size(&self) -> T {
        T::one() / crate::scalar::compensated_sum(self.weights.iter().map(|w| *w * *w))
    }

    pub(crate) fn set_uniform(&mut self) {
        let w = T::one() / T::from_usize_lossy(self.weights.len());
        self.weights.iter_mut().for_each(|x| *x = w);
    }

    /// False (and weights untouched) when the sum is zero or not finite.
    fn normalize(&mut self) -> bool {
        let total = self.weight_sum();
        if !(total > T::zero() && total.is_finite()) {
            return false;
        }
        self.weights.iter_mut().for_each(|w| *w /= total);
        true
    }
}
