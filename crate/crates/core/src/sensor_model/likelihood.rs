use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::noise::{interpolate, validate_table};
use super::{NoiseModel, SensorError};
use crate::scalar::Scalar;

/// Which measurement model weighs the particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Characterized model: bias/orientation correction and range-dependent σ.
    Psm,
    /// Datasheet confidence gate on the raw reading.
    Ds,
    /// Ideal-sensor gate at the sensor resolution.
    Is,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Psm, Method::Ds, Method::Is];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Psm => "psm",
            Method::Ds => "ds",
            Method::Is => "is",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = SensorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "psm" => Ok(Method::Psm),
            "ds" => Ok(Method::Ds),
            "is" => Ok(Method::Is),
            _ => Err(SensorError::UnknownMethod(s.to_string())),
        }
    }
}

/// Datasheet σ in millimeters as a piecewise-linear function of the measured range.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasheetSigma<T> {
    knots: Vec<(T, T)>,
}

impl<T: Scalar> DatasheetSigma<T> {
    pub fn new(knots: Vec<(T, T)>) -> Result<Self, SensorError> {
        validate_table(&knots)?;
        Ok(Self { knots })
    }

    /// The same σ at every range.
    pub fn constant(sigma_mm: T) -> Result<Self, SensorError> {
        Self::new(vec![(T::lit(20.0), sigma_mm)])
    }

    pub fn sigma_at(&self, range_mm: T) -> T {
        interpolate(&self.knots, range_mm)
    }

    pub fn knots(&self) -> &[(T, T)] {
        &self.knots
    }
}

impl<T: Scalar> Default for DatasheetSigma<T> {
    fn default() -> Self {
        Self::constant(T::lit(DATASHEET_SIGMA_MM)).expect("positive constant")
    }
}

pub const DATASHEET_SIGMA_MM: f64 = 15.0;
pub const IDEAL_EPSILON_MM: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum LikelihoodModel<T> {
    Psm(NoiseModel<T>),
    Ds(DatasheetSigma<T>),
    Is { epsilon_mm: T },
}

impl<T: Scalar> LikelihoodModel<T> {
    pub fn psm(noise: NoiseModel<T>) -> Self {
        Self::Psm(noise)
    }

    pub fn datasheet(table: DatasheetSigma<T>) -> Self {
        Self::Ds(table)
    }

    pub fn ideal(epsilon_mm: T) -> Result<Self, SensorError> {
        if !(epsilon_mm > T::zero() && epsilon_mm.is_finite()) {
            return Err(SensorError::InvalidModel("ideal-sensor epsilon must be positive"));
        }
        Ok(Self::Is { epsilon_mm })
    }

    /// Default parameters for each method.
    pub fn for_method(method: Method, noise: NoiseModel<T>) -> Self {
        match method {
            Method::Psm => Self::Psm(noise),
            Method::Ds => Self::Ds(DatasheetSigma::default()),
            Method::Is => Self::Is {
                epsilon_mm: T::lit(IDEAL_EPSILON_MM),
            },
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Self::Psm(_) => Method::Psm,
            Self::Ds(_) => Method::Ds,
            Self::Is { .. } => Method::Is,
        }
    }

    /// Log-density of a reading given the ray-cast true range (all mm).
    ///
    /// PSM compares the corrected mean against the truth with σ taken at the raw
    /// mean. DS and IS ignore the correction and gate the raw mean: inside the
    /// gate the Gaussian peak is returned, outside the density is zero (−∞ here).
    pub fn log_likelihood(&self, corrected_mean: T, true_range: T, raw_mean: T) -> Result<T, SensorError> {
        match self {
            Self::Psm(noise) => {
                let sigma = noise.sigma_at(raw_mean)?;
                Ok(log_gaussian(corrected_mean - true_range, sigma))
            }
            Self::Ds(table) => Ok(gate(true_range - raw_mean, table.sigma_at(raw_mean))),
            Self::Is { epsilon_mm } => Ok(gate(true_range - raw_mean, *epsilon_mm)),
        }
    }

    /// Density in mm⁻¹.
    pub fn likelihood(&self, corrected_mean: T, true_range: T, raw_mean: T) -> Result<T, SensorError> {
        Ok(self.log_likelihood(corrected_mean, true_range, raw_mean)?.exp())
    }
}

fn gate<T: Scalar>(residual: T, half_width: T) -> T {
    if residual.abs() < half_width {
        log_gaussian(T::zero(), half_width)
    } else {
        T::neg_infinity()
    }
}

/// `ln N(residual; 0, σ²)`.
pub fn log_gaussian<T: Scalar>(residual: T, sigma: T) -> T {
    let half = T::lit(0.5);
    let z = residual / sigma;
    -half * z * z - sigma.ln() - half * (T::PI() + T::PI()).ln()
}
