//! Simulated characterization sweeps and least-squares recovery of the
//! [`NoiseModel`](crate::sensor_model::NoiseModel) parameters.

mod fit;
mod io;
mod lsq;
mod sweep;

pub use fit::{
    calibrate, fit_orientation_model, fit_orientation_plane, fit_range_model, FitReport,
    OrientationFit, RangeFit, Residual, SweepKind,
};
pub use io::{read_residuals_csv, read_sweep_csv, write_residuals_csv, write_sweep_csv};
pub use lsq::{least_squares, LeastSquares};
pub use sweep::{
    generate_orientation_sweep, generate_range_sweep, orientation_schedule, range_schedule, Plane,
    SweepConfig, SweepRecord, ORIENTATION_RADIUS_MM, SWEEP_MAX_MM,
};

use thiserror::Error;

use crate::sensor_model::SensorError;

#[derive(Debug, Error)]
pub enum CharacterizeError {
    #[error("invalid sweep record: {0}")]
    InvalidRecord(String),
    #[error("need at least {needed} distinct {what}, found {found}")]
    TooFewDistinct {
        what: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("rank-deficient least-squares design")]
    RankDeficient,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: {reason}")]
    CsvLayout { row: usize, reason: String },
    #[error(transparent)]
    Sensor(#[from] SensorError),
}
