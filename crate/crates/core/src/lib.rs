//! Multizone time-of-flight sensor modelling and particle-filter object localization.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common instantiations.

pub mod bench;
pub mod characterize;
pub mod geometry;
pub mod mcl;
pub mod scalar;
pub mod seed;
pub mod sensor_model;
pub mod simulator;

pub use scalar::Scalar;

pub type Vec3d = geometry::Vec3<f64>;
pub type Pose2d = geometry::Pose2<f64>;
pub type Pose3d = geometry::Pose3<f64>;
pub type NoiseModeld = sensor_model::NoiseModel<f64>;
pub type Scened = simulator::Scene<f64>;
pub type ParticleSetd = mcl::ParticleSet<f64>;

pub type Vec3f = geometry::Vec3<f32>;
pub type Pose2f = geometry::Pose2<f32>;
pub type Pose3f = geometry::Pose3<f32>;
pub type NoiseModelf = sensor_model::NoiseModel<f32>;
pub type Scenef = simulator::Scene<f32>;
pub type ParticleSetf = mcl::ParticleSet<f32>;
