use rayon::prelude::*;

use super::{MclError, MeasurementMode, ParticleSet};
use crate::geometry::Pose2;
use crate::scalar::{CompensatedSum, Scalar};
use crate::sensor_model::{predict_beams, BeamGrid, BeamTruth, LikelihoodModel, Method};
use crate::simulator::{DataSample, Scene};

/// What happened during one weight update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UpdateOutcome {
    /// Every particle scored zero; weights were reset to uniform.
    pub degenerate: bool,
    /// The sample had no accepted beam; weights are unchanged.
    pub skipped: bool,
}

/// Log-likelihood of `sample` if the object were at `particle`, summed over sensors.
pub fn sample_log_likelihood<T: Scalar>(
    particle: &Pose2<T>,
    sample: &DataSample<T>,
    scene: &Scene<T>,
    grid: &BeamGrid<T>,
    model: &LikelihoodModel<T>,
    mode: MeasurementMode,
) -> Result<T, MclError> {
    let object = scene.object_pose(particle);
    let mut truths: Vec<BeamTruth<T>> = Vec::with_capacity(grid.len());
    let mut total = T::zero();
    let sensors = sample.frames.len().min(scene.sensor_count());
    for s in 0..sensors {
        let beams: Vec<usize> = sample.accepted_beams(s).collect();
        if beams.is_empty() {
            continue;
        }
        let frame = &sample.frames[s];
        let sensor_pose = scene.sensor_pose(sample.robot_pose_index, s);
        predict_beams(&object, &sensor_pose, grid, scene.surface(), beams.iter().copied(), &mut truths);
        total += match mode {
            MeasurementMode::Averaged => averaged(model, frame.ranges.as_slice(), &beams, &truths)?,
            MeasurementMode::PerBeam => per_beam(model, frame.ranges.as_slice(), &beams, &truths)?,
        };
    }
    Ok(total)
}

fn averaged<T: Scalar>(
    model: &LikelihoodModel<T>,
    ranges_m: &[T],
    beams: &[usize],
    truths: &[BeamTruth<T>],
) -> Result<T, MclError> {
    let n = T::from_usize_lossy(beams.len());
    let mm = T::lit(1000.0);
    let raw_mean = crate::scalar::compensated_sum(beams.iter().map(|&b| ranges_m[b] * mm)) / n;
    let true_sum = crate::scalar::compensated_sum(truths.iter().map(|t| t.axis_range_mm));
    let true_mean = true_sum / n;
    let corrected = match model {
        LikelihoodModel::Psm(noise) => {
            // The bias line is affine, so the corrected mean is the mean of the
            // skewed truths; divide by their truth-weighted incidence factor.
            let mut skewed = CompensatedSum::new();
            for t in truths {
                skewed.add(t.axis_range_mm * noise.orientation_factor(t.theta_deg, t.phi_deg));
            }
            noise.correct_range(raw_mean)? * true_sum / skewed.total()
        }
        _ => raw_mean,
    };
    Ok(model.log_likelihood(corrected, true_mean, raw_mean)?)
}

fn per_beam<T: Scalar>(
    model: &LikelihoodModel<T>,
    ranges_m: &[T],
    beams: &[usize],
    truths: &[BeamTruth<T>],
) -> Result<T, MclError> {
    let mm = T::lit(1000.0);
    let mut total = CompensatedSum::new();
    for (&b, t) in beams.iter().zip(truths) {
        let raw = ranges_m[b] * mm;
        let corrected = match model {
            LikelihoodModel::Psm(noise) => {
                noise.apply_orientation_correction(noise.correct_range(raw)?, t.theta_deg, t.phi_deg)
            }
            _ => raw,
        };
        let ll = model.log_likelihood(corrected, t.axis_range_mm, raw)?;
        if ll == T::neg_infinity() {
            return Ok(ll);
        }
        total.add(ll);
    }
    Ok(total.total())
}

/// Multiplies every weight by the particle's likelihood of `sample` and
/// renormalizes, working in the log domain. When every particle scores zero the
/// weights are reset to uniform and the outcome is flagged degenerate.
pub fn update_weights<T: Scalar>(
    ps: &mut ParticleSet<T>,
    sample: &DataSample<T>,
    scene: &Scene<T>,
    grid: &BeamGrid<T>,
    model: &LikelihoodModel<T>,
    mode: MeasurementMode,
    parallel: bool,
) -> Result<UpdateOutcome, MclError> {
    let sensors = sample.frames.len().min(scene.sensor_count());
    if (0..sensors).all(|s| sample.accepted_beams(s).next().is_none()) {
        log::warn!("sample at pose {} has no accepted beam; skipping", sample.robot_pose_index);
        return Ok(UpdateOutcome {
            skipped: true,
            ..Default::default()
        });
    }
    let score = |p: &Pose2<T>| sample_log_likelihood(p, sample, scene, grid, model, mode);
    let log_likelihoods: Vec<T> = if parallel {
        ps.particles().par_iter().map(score).collect::<Result<_, _>>()?
    } else {
        ps.particles().iter().map(score).collect::<Result<_, _>>()?
    };

    let log_w: Vec<T> = ps
        .weights()
        .iter()
        .zip(&log_likelihoods)
        .map(|(w, ll)| w.ln() + *ll)
        .collect();
    let peak = log_w.iter().copied().fold(T::neg_infinity(), T::max);
    if !peak.is_finite() {
        if model.method() != Method::Psm {
            log::debug!("all {} particles gated out; resetting weights", ps.len());
        }
        ps.set_uniform();
        return Ok(UpdateOutcome {
            degenerate: true,
            ..Default::default()
        });
    }
    let weights: Vec<T> = log_w.iter().map(|l| (*l - peak).exp()).collect();
    *ps = ParticleSet::new(ps.particles().to_vec(), weights)?;
    Ok(UpdateOutcome::default())
}
