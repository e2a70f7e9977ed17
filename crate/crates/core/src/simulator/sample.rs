use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Scene, SimulatorError};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, rng_from_seed};
use crate::sensor_model::{ReadingSimulator, ScanFrame};

/// Everything measured at one robot viewpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSample<T> {
    pub robot_pose_index: usize,
    /// One frame per mounted sensor, in mount order.
    pub frames: Vec<ScanFrame<T>>,
    /// Per sensor: valid and kept by the crop rule.
    pub accepted: Vec<Vec<bool>>,
}

impl<T: Scalar> DataSample<T> {
    pub fn accepted_count(&self) -> usize {
        self.accepted.iter().flatten().filter(|&&a| a).count()
    }

    /// Indices of accepted beams of one sensor.
    pub fn accepted_beams(&self, sensor: usize) -> impl Iterator<Item = usize> + '_ {
        self.accepted[sensor]
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
    }

    /// Keeps only the first `count` sensors.
    pub fn truncated(&self, count: usize) -> Self {
        Self {
            robot_pose_index: self.robot_pose_index,
            frames: self.frames.iter().take(count).cloned().collect(),
            accepted: self.accepted.iter().take(count).cloned().collect(),
        }
    }
}

/// Simulates every sensor at viewpoint `pose_index` and applies the scene's crop.
pub fn collect_sample<T: Scalar, R: Rng + ?Sized>(
    scene: &Scene<T>,
    pose_index: usize,
    simulator: &ReadingSimulator<T>,
    rng: &mut R,
) -> Result<DataSample<T>, SimulatorError> {
    if pose_index >= scene.pose_count() {
        return Err(SimulatorError::PoseIndex {
            index: pose_index,
            count: scene.pose_count(),
        });
    }
    let object = scene.object_pose(&scene.object_truth());
    let mut frames = Vec::with_capacity(scene.sensor_count());
    let mut accepted = Vec::with_capacity(scene.sensor_count());
    for sensor in 0..scene.sensor_count() {
        let sensor_pose = scene.sensor_pose(pose_index, sensor);
        let frame = simulator.simulate_scan(&object, &sensor_pose, scene.surface(), sensor, pose_index, rng);
        let mask = (0..frame.ranges.len())
            .map(|b| frame.valid[b] && scene.crop().accepts(frame.range_mm(b), &sensor_pose, &simulator.grid, b))
            .collect();
        frames.push(frame);
        accepted.push(mask);
    }
    Ok(DataSample {
        robot_pose_index: pose_index,
        frames,
        accepted,
    })
}

impl<T: Scalar> Scene<T> {
    /// Samples at the first `count` viewpoints, each from its own stream derived from `seed`.
    pub fn collect_samples(
        &self,
        count: usize,
        simulator: &ReadingSimulator<T>,
        seed: u64,
    ) -> Result<Vec<DataSample<T>>, SimulatorError> {
        (0..count)
            .map(|i| collect_sample(self, i, simulator, &mut rng_from_seed(derive_seed(seed, &[i as u64]))))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct BeamRow<T> {
    pose_index: usize,
    sensor_id: usize,
    beam_index: usize,
    /// Empty for invalid beams.
    range_mm: Option<T>,
    accepted: bool,
}

/// One row per beam: `pose_index,sensor_id,beam_index,range_mm,accepted`.
pub fn write_samples_csv<T: Scalar, W: Write>(samples: &[DataSample<T>], out: W) -> Result<(), SimulatorError> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        for (frame, mask) in s.frames.iter().zip(&s.accepted) {
            for b in 0..frame.ranges.len() {
                w.serialize(BeamRow {
                    pose_index: s.robot_pose_index,
                    sensor_id: frame.sensor_id,
                    beam_index: b,
                    range_mm: frame.valid[b].then(|| frame.range_mm(b)),
                    accepted: mask[b],
                })?;
            }
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Inverse of [`write_samples_csv`]. Rows must be grouped by pose, then sensor,
/// with beam indices counting up from 0.
pub fn read_samples_csv<T: Scalar, R: Read>(input: R) -> Result<Vec<DataSample<T>>, SimulatorError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut samples: Vec<DataSample<T>> = Vec::new();
    for (i, row) in reader.deserialize::<BeamRow<T>>().enumerate() {
        let row = row?;
        let row_no = i + 2;
        let layout = |reason: &str| SimulatorError::CsvLayout {
            row: row_no,
            reason: reason.into(),
        };
        if row.accepted && row.range_mm.is_none() {
            return Err(layout("accepted beam without a range"));
        }
        let new_sample = samples.last().is_none_or(|s| s.robot_pose_index != row.pose_index || row.beam_index == 0 && row.sensor_id == 0);
        if new_sample {
            if row.sensor_id != 0 || row.beam_index != 0 {
                return Err(layout("a pose must start at sensor 0, beam 0"));
            }
            samples.push(DataSample {
                robot_pose_index: row.pose_index,
                frames: Vec::new(),
                accepted: Vec::new(),
            });
        }
        let sample = samples.last_mut().expect("pushed above");
        if row.beam_index == 0 {
            if row.sensor_id != sample.frames.len() {
                return Err(layout("sensor ids must count up from 0"));
            }
            sample.frames.push(ScanFrame {
                sensor_id: row.sensor_id,
                timestamp_index: row.pose_index,
                ranges: Vec::new(),
                valid: Vec::new(),
            });
            sample.accepted.push(Vec::new());
        }
        let frame = sample.frames.last_mut().expect("pushed above");
        if row.sensor_id != frame.sensor_id || row.beam_index != frame.ranges.len() {
            return Err(layout("beam indices must count up from 0 within a sensor"));
        }
        frame.ranges.push(row.range_mm.map_or(T::zero(), |mm| mm / T::lit(1000.0)));
        frame.valid.push(row.range_mm.is_some());
        sample.accepted.last_mut().expect("pushed above").push(row.accepted);
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor_model::{BeamGrid, NoiseModel};
    use crate::simulator::{make_crate_scene, Crop};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sim() -> ReadingSimulator<f64> {
        ReadingSimulator::new(BeamGrid::multizone_8x8(), NoiseModel::characterized())
    }

    #[test]
    fn every_sample_records_its_pose_index() {
        let scene = make_crate_scene::<f64>();
        let s = collect_sample(&scene, 3, &sim(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(s.robot_pose_index, 3);
        assert_eq!(s.frames.len(), 4);
        for (f, m) in s.frames.iter().zip(&s.accepted) {
            assert!(m.iter().zip(&f.valid).all(|(a, v)| !a || *v));
        }
        assert!(collect_sample(&scene, 10, &sim(), &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn cutoff_rejects_long_readings() {
        let scene = make_crate_scene::<f64>();
        let s = collect_sample(&scene, 0, &sim(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        for (f, m) in s.frames.iter().zip(&s.accepted) {
            for b in 0..64 {
                if f.valid[b] {
                    assert_eq!(m[b], f.range_mm(b) <= 600.0);
                }
            }
        }
        let crop = Crop::MaxRange { cutoff_mm: 600.0 };
        let pose = scene.sensor_pose(0, 0);
        assert!(!crop.accepts(700.0, &pose, &sim().grid, 0));
        assert!(crop.accepts(500.0, &pose, &sim().grid, 0));
    }

    #[test]
    fn noiseless_uncropped_sample_accepts_exactly_the_valid_beams() {
        let scene = make_crate_scene::<f64>().with_crop(Crop::None).unwrap();
        let s = collect_sample(&scene, 1, &sim().noiseless(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        for (f, m) in s.frames.iter().zip(&s.accepted) {
            assert_eq!(&f.valid, m);
        }
    }

    #[test]
    fn samples_csv_round_trips() {
        let scene = make_crate_scene::<f64>();
        let samples = scene.collect_samples(3, &sim(), 42).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&samples, &mut buf).unwrap();
        assert!(buf.starts_with(b"pose_index,sensor_id,beam_index,range_mm,accepted\n"));
        let back = read_samples_csv::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in samples.iter().zip(&back) {
            assert_eq!(a.accepted, b.accepted);
            for (fa, fb) in a.frames.iter().zip(&b.frames) {
                assert_eq!(fa.valid, fb.valid);
                for (ra, rb) in fa.ranges.iter().zip(&fb.ranges) {
                    assert!((ra - rb).abs() < 1e-15);
                }
            }
        }
    }
}
