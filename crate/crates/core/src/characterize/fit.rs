use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::lsq::least_squares;
use super::sweep::{generate_orientation_sweep, generate_range_sweep, Plane, SweepConfig, SweepRecord};
use super::CharacterizeError;
use crate::scalar::Scalar;
use crate::sensor_model::{default_sigma_table, NoiseModel, OrientationCoeffs};

/// Smallest σ% a fitted knot may take. Noiseless sweeps would otherwise give
/// a zero spread, which the model rejects.
const SIGMA_FLOOR_PCT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Range,
    Xy,
    Zy,
}

/// One pose of a fit. For range fits `observed` is the commanded range and
/// `fitted` the line at the mean reading (mm); for incidence fits both are
/// percent errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Residual<T> {
    pub sweep: SweepKind,
    pub true_range_mm: T,
    pub theta_deg: T,
    pub phi_deg: T,
    pub mean_reading_mm: T,
    pub observed: T,
    pub fitted: T,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeFit<T> {
    pub slope: T,
    pub offset_mm: T,
    pub slope_se: T,
    pub offset_se: T,
    /// σ% at the fixed knots {20, 25, 60, 100, 800} mm.
    pub sigma_table: Vec<(T, T)>,
    pub residuals: Vec<Residual<T>>,
}

impl<T: Scalar> RangeFit<T> {
    /// Largest |residual / commanded range| over poses commanded at or beyond `min_true_mm`.
    pub fn max_relative_residual_from(&self, min_true_mm: T) -> T {
        self.residuals
            .iter()
            .filter(|r| r.true_range_mm >= min_true_mm)
            .map(|r| (r.residual / r.true_range_mm).abs())
            .fold(T::zero(), T::max)
    }

    pub fn max_relative_residual(&self) -> T {
        self.max_relative_residual_from(T::neg_infinity())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationFit<T> {
    pub coeffs: OrientationCoeffs<T>,
    pub standard_errors: OrientationCoeffs<T>,
    pub residuals: Vec<Residual<T>>,
}

impl<T: Scalar> OrientationFit<T> {
    pub fn max_abs_residual(&self) -> T {
        self.residuals.iter().map(|r| r.residual.abs()).fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T> {
    pub model: NoiseModel<T>,
    pub range: RangeFit<T>,
    pub orientation: OrientationFit<T>,
}

impl<T: Scalar> FitReport<T> {
    pub fn max_relative_residual(&self) -> T {
        self.range.max_relative_residual()
    }

    pub fn residuals(&self) -> impl Iterator<Item = &Residual<T>> {
        self.range.residuals.iter().chain(&self.orientation.residuals)
    }
}

/// Regresses commanded range on the mean reading of each pose
/// (`z* = slope·z̄ + offset`) and condenses the per-pose spread onto the fixed
/// knots, assigning each pose to the knot nearest its mean reading.
pub fn fit_range_model<T: Scalar>(records: &[SweepRecord<T>]) -> Result<RangeFit<T>, CharacterizeError> {
    let means: Vec<T> = records.iter().map(SweepRecord::mean).collect();
    let distinct = count_distinct(records.iter().map(|r| r.true_range_mm()));
    if distinct < 2 {
        return Err(CharacterizeError::TooFewDistinct {
            what: "ranges",
            needed: 2,
            found: distinct,
        });
    }
    let rows: Vec<([T; 2], T)> = records
        .iter()
        .zip(&means)
        .map(|(r, m)| ([*m, T::one()], r.true_range_mm()))
        .collect();
    let ls = least_squares(&rows)?;
    let [slope, offset_mm] = ls.coefficients;

    let residuals = records
        .iter()
        .zip(&means)
        .zip(&ls.residuals)
        .map(|((r, m), res)| Residual {
            sweep: SweepKind::Range,
            true_range_mm: r.true_range_mm(),
            theta_deg: r.theta_deg(),
            phi_deg: r.phi_deg(),
            mean_reading_mm: *m,
            observed: r.true_range_mm(),
            fitted: r.true_range_mm() - *res,
            residual: *res,
        })
        .collect();

    Ok(RangeFit {
        slope,
        offset_mm,
        slope_se: ls.standard_errors[0],
        offset_se: ls.standard_errors[1],
        sigma_table: condense_sigma(records, &means),
        residuals,
    })
}

fn condense_sigma<T: Scalar>(records: &[SweepRecord<T>], means: &[T]) -> Vec<(T, T)> {
    let knots: Vec<T> = default_sigma_table::<T>().into_iter().map(|(r, _)| r).collect();
    let mut buckets: Vec<Vec<T>> = vec![Vec::new(); knots.len()];
    for (rec, m) in records.iter().zip(means) {
        let pct = rec.std_dev() / *m * T::lit(100.0);
        buckets[nearest(&knots, *m)].push(pct);
    }
    let values: Vec<Option<T>> = buckets
        .iter()
        .map(|b| {
            // Sort so the mean does not depend on record order.
            let mut b = b.clone();
            b.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            (!b.is_empty()).then(|| crate::scalar::compensated_sum(b.iter().copied()) / T::from_usize_lossy(b.len()))
        })
        .collect();
    let populated: Vec<usize> = (0..knots.len()).filter(|&i| values[i].is_some()).collect();
    knots
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let source = values[i].unwrap_or_else(|| {
                let j = populated
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        let (da, db) = ((knots[a] - k).abs(), (knots[b] - k).abs());
                        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .expect("at least one record");
                values[j].expect("populated")
            });
            (k, source.max(T::lit(SIGMA_FLOOR_PCT)))
        })
        .collect()
}

fn nearest<T: Scalar>(knots: &[T], x: T) -> usize {
    let mut best = 0;
    for (i, k) in knots.iter().enumerate() {
        if (*k - x).abs() < (knots[best] - x).abs() {
            best = i;
        }
    }
    best
}

fn count_distinct<T: Scalar>(values: impl Iterator<Item = T>) -> usize {
    let mut v: Vec<T> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup();
    v.len()
}

/// Least-squares fit of the incidence error against (r², r, 1) on records from
/// one or more planes. Mean readings are first bias-corrected with
/// `range_model`'s line; the error is then `(z_c / z* − 1)·100`.
pub fn fit_orientation_plane<T: Scalar>(
    records: &[SweepRecord<T>],
    range_model: &NoiseModel<T>,
) -> Result<OrientationFit<T>, CharacterizeError> {
    let mut rows = Vec::with_capacity(records.len());
    let mut meta = Vec::with_capacity(records.len());
    for rec in records {
        let mean = rec.mean();
        let corrected = range_model.correct_range(mean)?;
        let e = (corrected / rec.true_range_mm() - T::one()) * T::lit(100.0);
        let r = (rec.theta_deg() * rec.theta_deg() + rec.phi_deg() * rec.phi_deg()).sqrt();
        rows.push(([r * r, r, T::one()], e));
        meta.push((rec, mean, e));
    }
    let ls = least_squares(&rows)?;
    let [a, b, c] = ls.coefficients;
    let [sa, sb, sc] = ls.standard_errors;
    let residuals = meta
        .iter()
        .zip(&ls.residuals)
        .map(|((rec, mean, e), res)| Residual {
            sweep: if rec.phi_deg() == T::zero() { SweepKind::Xy } else { SweepKind::Zy },
            true_range_mm: rec.true_range_mm(),
            theta_deg: rec.theta_deg(),
            phi_deg: rec.phi_deg(),
            mean_reading_mm: *mean,
            observed: *e,
            fitted: *e - *res,
            residual: *res,
        })
        .collect();
    Ok(OrientationFit {
        coeffs: OrientationCoeffs { a, b, c },
        standard_errors: OrientationCoeffs { a: sa, b: sb, c: sc },
        residuals,
    })
}

/// Pools both incidence planes into one radial paraboloid fit. Each plane must
/// cover at least three distinct angles.
pub fn fit_orientation_model<T: Scalar>(
    xy: &[SweepRecord<T>],
    zy: &[SweepRecord<T>],
    range_model: &NoiseModel<T>,
) -> Result<OrientationFit<T>, CharacterizeError> {
    for plane in [xy, zy] {
        let found = count_distinct(plane.iter().map(|r| r.theta_deg() + r.phi_deg()));
        if found < 3 {
            return Err(CharacterizeError::TooFewDistinct {
                what: "angles per plane",
                needed: 3,
                found,
            });
        }
    }
    let pooled: Vec<SweepRecord<T>> = xy.iter().chain(zy).cloned().collect();
    let mut fit = fit_orientation_plane(&pooled, range_model)?;
    // Records at normal incidence are ambiguous; label by source slice instead.
    for (res, kind) in fit
        .residuals
        .iter_mut()
        .zip(std::iter::repeat_n(SweepKind::Xy, xy.len()).chain(std::iter::repeat_n(SweepKind::Zy, zy.len())))
    {
        res.sweep = kind;
    }
    Ok(fit)
}

/// Full simulated calibration: range sweep, line and spread fit, then both
/// incidence sweeps corrected with the freshly fitted line.
pub fn calibrate<T: Scalar, R: RngCore + ?Sized>(
    injected: &NoiseModel<T>,
    config: &SweepConfig<T>,
    rng: &mut R,
) -> Result<FitReport<T>, CharacterizeError> {
    let range_sweep = generate_range_sweep(injected, config, rng)?;
    let xy = generate_orientation_sweep(injected, Plane::Xy, config, rng)?;
    let zy = generate_orientation_sweep(injected, Plane::Zy, config, rng)?;
    let range = fit_range_model(&range_sweep)?;
    let line_only = injected.clone().with_range_line(range.slope, range.offset_mm)?;
    let orientation = fit_orientation_model(&xy, &zy, &line_only)?;
    let model = NoiseModel::new(range.slope, range.offset_mm, orientation.coeffs, range.sigma_table.clone())?;
    Ok(FitReport {
        model,
        range,
        orientation,
    })
}
