use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SensorError;
use crate::scalar::Scalar;

/// Datasheet operating range of the sensor, millimeters.
pub const MIN_RANGE_MM: f64 = 20.0;
pub const MAX_RANGE_MM: f64 = 4000.0;

/// Half-width of the characterized incidence envelope, degrees.
pub const CHARACTERIZED_ANGLE_DEG: f64 = 25.0;

/// Coefficients of `e = a·r² + b·r + c`, `r = √(θ² + φ²)` in degrees, `e` in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct OrientationCoeffs<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> OrientationCoeffs<T> {
    pub fn zero() -> Self {
        Self {
            a: T::zero(),
            b: T::zero(),
            c: T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationError<T> {
    /// Percent of the true range.
    pub percent: T,
    /// Set when (θ, φ) lies outside the ±25° characterized envelope.
    pub extrapolated: bool,
}

/// Calibrated range bias, incidence-angle error and range-dependent spread.
///
/// Ranges are millimeters. The bias line maps a mean raw reading `z̄` to the
/// true range `z* = slope·z̄ + offset`; the spread table gives σ as a percent of
/// the measured range at each knot and is interpolated linearly in between.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T> {
    range_slope: T,
    range_offset_mm: T,
    orientation: OrientationCoeffs<T>,
    sigma_table: Vec<(T, T)>,
}

impl<T: Scalar> Default for NoiseModel<T> {
    fn default() -> Self {
        Self::characterized()
    }
}

impl<T: Scalar> NoiseModel<T> {
    pub fn new(
        range_slope: T,
        range_offset_mm: T,
        orientation: OrientationCoeffs<T>,
        sigma_table: Vec<(T, T)>,
    ) -> Result<Self, SensorError> {
        if !(range_slope.is_finite() && range_slope != T::zero()) || !range_offset_mm.is_finite() {
            return Err(SensorError::InvalidModel("range line must be finite with non-zero slope"));
        }
        let o = orientation;
        if !(o.a.is_finite() && o.b.is_finite() && o.c.is_finite()) {
            return Err(SensorError::InvalidModel("orientation coefficients must be finite"));
        }
        validate_table(&sigma_table)?;
        Ok(Self {
            range_slope,
            range_offset_mm,
            orientation,
            sigma_table,
        })
    }

    /// Bias line 0.963·z̄ − 18.15 mm, orientation paraboloid
    /// (−10⁻³, 7.78×10⁻⁴, 0.06) and the five-knot spread table.
    pub fn characterized() -> Self {
        let l = T::lit;
        Self::new(
            l(0.963),
            l(-18.15),
            OrientationCoeffs {
                a: l(-1e-3),
                b: l(7.78e-4),
                c: l(0.06),
            },
            default_sigma_table(),
        )
        .expect("characterized model is valid")
    }

    pub fn range_slope(&self) -> T {
        self.range_slope
    }

    pub fn range_offset_mm(&self) -> T {
        self.range_offset_mm
    }

    pub fn orientation(&self) -> OrientationCoeffs<T> {
        self.orientation
    }

    pub fn sigma_table(&self) -> &[(T, T)] {
        &self.sigma_table
    }

    pub fn with_range_line(self, slope: T, offset_mm: T) -> Result<Self, SensorError> {
        Self::new(slope, offset_mm, self.orientation, self.sigma_table)
    }

    pub fn with_orientation(self, coeffs: OrientationCoeffs<T>) -> Result<Self, SensorError> {
        Self::new(self.range_slope, self.range_offset_mm, coeffs, self.sigma_table)
    }

    pub fn with_sigma_table(self, table: Vec<(T, T)>) -> Result<Self, SensorError> {
        Self::new(self.range_slope, self.range_offset_mm, self.orientation, table)
    }

    /// Maps a mean raw reading to the bias-corrected range.
    pub fn correct_range(&self, measured_mean_mm: T) -> Result<T, SensorError> {
        check_operating_range(measured_mean_mm)?;
        Ok(self.range_slope * measured_mean_mm + self.range_offset_mm)
    }

    /// Inverse of the bias line: the raw mean a sensor reports for a true range.
    pub fn inverse_bias(&self, true_mm: T) -> T {
        (true_mm - self.range_offset_mm) / self.range_slope
    }

    pub fn orientation_error(&self, theta_deg: T, phi_deg: T) -> OrientationError<T> {
        let r2 = theta_deg * theta_deg + phi_deg * phi_deg;
        let c = self.orientation;
        let limit = T::lit(CHARACTERIZED_ANGLE_DEG);
        OrientationError {
            percent: c.a * r2 + c.b * r2.sqrt() + c.c,
            extrapolated: theta_deg.abs() > limit || phi_deg.abs() > limit,
        }
    }

    /// Removes the incidence-angle error: `range / (1 + e/100)`.
    pub fn apply_orientation_correction(&self, range_mm: T, theta_deg: T, phi_deg: T) -> T {
        range_mm / self.orientation_factor(theta_deg, phi_deg)
    }

    /// Adds the incidence-angle error: `range · (1 + e/100)`.
    pub fn inject_orientation_error(&self, range_mm: T, theta_deg: T, phi_deg: T) -> T {
        range_mm * self.orientation_factor(theta_deg, phi_deg)
    }

    /// `1 + e/100` at (θ, φ).
    pub fn orientation_factor(&self, theta_deg: T, phi_deg: T) -> T {
        T::one() + self.orientation_error(theta_deg, phi_deg).percent / T::lit(100.0)
    }

    /// Spread as a percent of the measured range; constant past the last knot.
    pub fn sigma_percent_at(&self, range_mm: T) -> Result<T, SensorError> {
        let first = self.sigma_table[0].0;
        if !(range_mm >= first) {
            return Err(SensorError::BelowTable {
                range_mm: range_mm.to_f64_lossy(),
                first_knot_mm: first.to_f64_lossy(),
            });
        }
        Ok(interpolate(&self.sigma_table, range_mm))
    }

    /// Standard deviation in millimeters at a measured range.
    pub fn sigma_at(&self, range_mm: T) -> Result<T, SensorError> {
        Ok(self.sigma_percent_at(range_mm)? * range_mm / T::lit(100.0))
    }

    /// Flat key-value text form (see [`NoiseModel::from_kv_str`]).
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "range_slope = {}", self.range_slope);
        let _ = writeln!(out, "range_offset_mm = {}", self.range_offset_mm);
        let _ = writeln!(out, "orient_a = {}", self.orientation.a);
        let _ = writeln!(out, "orient_b = {}", self.orientation.b);
        let _ = writeln!(out, "orient_c = {}", self.orientation.c);
        let pairs: Vec<String> = self
            .sigma_table
            .iter()
            .map(|(r, s)| format!("{r}:{s}"))
            .collect();
        let _ = writeln!(out, "sigma_table = {}", pairs.join(", "));
        out
    }

    /// Parses `key = value` lines. `#` starts a comment. All six keys are required;
    /// `sigma_table` is a comma- or whitespace-separated list of `range_mm:sigma_pct`.
    pub fn from_kv_str(text: &str) -> Result<Self, SensorError> {
        let mut slope = None;
        let mut offset = None;
        let mut a = None;
        let mut b = None;
        let mut c = None;
        let mut table = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| calib_err(line_no, "expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let number = |v: &str| {
                v.parse::<T>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| calib_err(line_no, format!("`{v}` is not a finite number")))
            };
            match key {
                "range_slope" => slope = Some(number(value)?),
                "range_offset_mm" => offset = Some(number(value)?),
                "orient_a" => a = Some(number(value)?),
                "orient_b" => b = Some(number(value)?),
                "orient_c" => c = Some(number(value)?),
                "sigma_table" => {
                    let mut rows = Vec::new();
                    for pair in value.split(|ch: char| ch == ',' || ch.is_whitespace()) {
                        if pair.is_empty() {
                            continue;
                        }
                        let (r, s) = pair.split_once(':').ok_or_else(|| {
                            calib_err(line_no, format!("`{pair}` is not `range_mm:sigma_pct`"))
                        })?;
                        rows.push((number(r)?, number(s)?));
                    }
                    table = Some(rows);
                }
                other => return Err(calib_err(line_no, format!("unknown key `{other}`"))),
            }
        }
        let missing = |name: &str| SensorError::Calibration {
            line: 0,
            reason: format!("missing key `{name}`"),
        };
        Self::new(
            slope.ok_or_else(|| missing("range_slope"))?,
            offset.ok_or_else(|| missing("range_offset_mm"))?,
            OrientationCoeffs {
                a: a.ok_or_else(|| missing("orient_a"))?,
                b: b.ok_or_else(|| missing("orient_b"))?,
                c: c.ok_or_else(|| missing("orient_c"))?,
            },
            table.ok_or_else(|| missing("sigma_table"))?,
        )
    }
}

/// The five characterized spread knots (range mm, σ %).
pub fn default_sigma_table<T: Scalar>() -> Vec<(T, T)> {
    [(20.0, 40.0), (25.0, 1.4), (60.0, 1.2), (100.0, 0.6), (800.0, 0.6)]
        .into_iter()
        .map(|(r, s)| (T::lit(r), T::lit(s)))
        .collect()
}

pub(crate) fn check_operating_range<T: Scalar>(range_mm: T) -> Result<(), SensorError> {
    if range_mm >= T::lit(MIN_RANGE_MM) && range_mm <= T::lit(MAX_RANGE_MM) {
        Ok(())
    } else {
        Err(SensorError::OutOfOperatingRange {
            range_mm: range_mm.to_f64_lossy(),
        })
    }
}

/// Knots strictly increasing in range, all values finite and positive.
pub(crate) fn validate_table<T: Scalar>(table: &[(T, T)]) -> Result<(), SensorError> {
    if table.is_empty() {
        return Err(SensorError::InvalidModel("table needs at least one knot"));
    }
    for w in table.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(SensorError::InvalidModel("table ranges must be strictly increasing"));
        }
    }
    if table
        .iter()
        .any(|&(r, s)| !(r.is_finite() && s.is_finite() && s > T::zero()))
    {
        return Err(SensorError::InvalidModel("table entries must be finite with σ > 0"));
    }
    Ok(())
}

/// Piecewise-linear lookup, held constant outside the knot span.
pub(crate) fn interpolate<T: Scalar>(table: &[(T, T)], x: T) -> T {
    let (first, last) = (table[0], table[table.len() - 1]);
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = table.partition_point(|&(r, _)| r <= x);
    let (x0, y0) = table[i - 1];
    let (x1, y1) = table[i];
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn calib_err(line: usize, reason: String) -> SensorError {
    SensorError::Calibration { line, reason }
}
