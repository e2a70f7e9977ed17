//! Multizone ToF sensor abstraction: beam grid, calibrated noise model,
//! forward simulation and the three measurement likelihoods.
//!
//! Geometry is in meters; everything calibration-related is in millimeters.

mod grid;
mod likelihood;
mod noise;
mod simulate;

pub use grid::{raycast_scene, BeamGrid, DIAGONAL_FOV_DEG, ZONES_PER_AXIS};
pub use likelihood::{
    log_gaussian, DatasheetSigma, LikelihoodModel, Method, DATASHEET_SIGMA_MM, IDEAL_EPSILON_MM,
};
pub use noise::{
    default_sigma_table, NoiseModel, OrientationCoeffs, OrientationError, CHARACTERIZED_ANGLE_DEG,
    MAX_RANGE_MM, MIN_RANGE_MM,
};
pub use simulate::{predict_beams, BeamTruth, ReadingSimulator, ScanFrame};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("invalid beam grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
    #[error("reading {range_mm} mm outside the 20–4000 mm operating range")]
    OutOfOperatingRange { range_mm: f64 },
    #[error("range {range_mm} mm is below the first σ-table knot at {first_knot_mm} mm")]
    BelowTable { range_mm: f64, first_knot_mm: f64 },
    #[error("calibration file line {line}: {reason}")]
    Calibration { line: usize, reason: String },
    #[error("unknown method `{0}` (expected psm, ds or is)")]
    UnknownMethod(String),
}
