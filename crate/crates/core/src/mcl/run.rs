use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::filter::{estimate, init_particles, pose_error, resample, PoseError};
use super::update::update_weights;
use super::{FilterConfig, MclError, ParticleSet};
use crate::geometry::Pose2;
use crate::scalar::Scalar;
use crate::sensor_model::{BeamGrid, LikelihoodModel};
use crate::simulator::{DataSample, Scene};

/// One trace line. Step 0 is the initial belief; step k follows sample k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TraceRow<T> {
    pub step: usize,
    pub e_x_m: T,
    pub e_gamma_deg: T,
    /// After the weight update, before resampling.
    pub effective_sample_size: T,
    pub degenerate_flag: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Localization<T> {
    pub estimate: Pose2<T>,
    pub error: PoseError<T>,
    pub trace: Vec<TraceRow<T>>,
    /// Final resampled set.
    pub particles: ParticleSet<T>,
}

impl<T> Localization<T> {
    pub fn degenerate_steps(&self) -> usize {
        self.trace.iter().filter(|r| r.degenerate_flag).count()
    }
}

/// Initialize, then update and resample once per sample, recording the
/// weighted-mean estimate after each resampling.
pub fn run_localization<T: Scalar, R: Rng + ?Sized>(
    scene: &Scene<T>,
    samples: &[DataSample<T>],
    grid: &BeamGrid<T>,
    model: &LikelihoodModel<T>,
    config: &FilterConfig<T>,
    rng: &mut R,
) -> Result<Localization<T>, MclError> {
    if samples.is_empty() {
        return Err(MclError::NoSamples);
    }
    let truth = scene.object_truth();
    let mut ps = init_particles(config, rng)?;
    let initial = pose_error(&truth, &estimate(&ps));
    let mut trace = vec![TraceRow {
        step: 0,
        e_x_m: initial.e_x,
        e_gamma_deg: initial.e_gamma,
        effective_sample_size: ps.effective_sample_size(),
        degenerate_flag: false,
    }];
    for (k, sample) in samples.iter().enumerate() {
        let outcome = update_weights(
            &mut ps,
            sample,
            scene,
            grid,
            model,
            config.measurement_mode,
            config.parallel,
        )?;
        let ess = ps.effective_sample_size();
        ps = resample(&ps, config, rng);
        let err = pose_error(&truth, &estimate(&ps));
        trace.push(TraceRow {
            step: k + 1,
            e_x_m: err.e_x,
            e_gamma_deg: err.e_gamma,
            effective_sample_size: ess,
            degenerate_flag: outcome.degenerate || outcome.skipped,
        });
    }
    let est = estimate(&ps);
    Ok(Localization {
        estimate: est,
        error: pose_error(&truth, &est),
        trace,
        particles: ps,
    })
}

/// `step,e_x_m,e_gamma_deg,effective_sample_size,degenerate_flag`.
pub fn write_trace_csv<T: Scalar, W: Write>(trace: &[TraceRow<T>], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<T: Scalar, R: Read>(input: R) -> Result<Vec<TraceRow<T>>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}
