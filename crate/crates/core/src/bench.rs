//! Localization benchmarks over a grid of (sensor count, sample count) cells.
//!
//! One dataset is simulated per master seed with every sensor and the largest
//! sample count; each cell uses the first `sensors` frames of the first
//! `samples` samples. Trial `t` of a cell draws from
//! `derive_seed(master, [label(method), sensors, samples, t])`, so any cell can
//! be rerun alone with identical results.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Pose2;
use crate::mcl::{run_localization, FilterConfig, Localization, MclError};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, label, rng_from_seed};
use crate::sensor_model::{BeamGrid, LikelihoodModel, Method, NoiseModel, ReadingSimulator};
use crate::simulator::{make_crate_scene, make_deer_scene, DataSample, Scene, SimulatorError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(String),
    #[error("cell ({sensors} sensors, {samples} samples) is infeasible: {reason}")]
    Infeasible {
        sensors: usize,
        samples: usize,
        reason: String,
    },
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
    #[error(transparent)]
    Mcl(#[from] MclError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("benchmark spec json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Which scene a benchmark runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneRef {
    Crate,
    Deer,
    /// Scene JSON file; relative paths resolve against the spec file.
    File(PathBuf),
}

impl SceneRef {
    pub fn load<T: Scalar>(&self, base_dir: Option<&Path>) -> Result<Scene<T>, SimulatorError> {
        match self {
            SceneRef::Crate => Ok(make_crate_scene()),
            SceneRef::Deer => Ok(make_deer_scene()),
            SceneRef::File(path) => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                Scene::load(&full)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub sensors: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct BenchmarkSpec<T> {
    pub scene: SceneRef,
    pub methods: Vec<Method>,
    pub cells: Vec<Cell>,
    pub trials: usize,
    pub master_seed: u64,
    /// Spread of the filter's initial center around the truth (m, per axis).
    pub init_offset_sigma: T,
    /// Multiplies the simulated read noise.
    pub sigma_scale: T,
    pub filter: FilterConfig<T>,
}

impl<T: Scalar> Default for BenchmarkSpec<T> {
    fn default() -> Self {
        Self {
            scene: SceneRef::Crate,
            methods: Method::ALL.to_vec(),
            cells: [2, 4, 6, 8, 10]
                .into_iter()
                .map(|samples| Cell { sensors: 1, samples })
                .collect(),
            trials: 5,
            master_seed: 1,
            init_offset_sigma: T::lit(0.05),
            sigma_scale: T::one(),
            filter: FilterConfig::default(),
        }
    }
}

impl<T: Scalar> BenchmarkSpec<T> {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Checks every cell against the scene before anything runs.
    pub fn validate(&self, scene: &Scene<T>) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::InvalidSpec("trials must be at least 1".into()));
        }
        if self.methods.is_empty() || self.cells.is_empty() {
            return Err(BenchError::InvalidSpec("need at least one method and one cell".into()));
        }
        if !(self.init_offset_sigma >= T::zero() && self.sigma_scale >= T::zero()) {
            return Err(BenchError::InvalidSpec("init_offset_sigma and sigma_scale must be ≥ 0".into()));
        }
        self.filter.validate()?;
        for c in &self.cells {
            let infeasible = |reason: String| BenchError::Infeasible {
                sensors: c.sensors,
                samples: c.samples,
                reason,
            };
            if c.sensors == 0 || c.sensors > scene.sensor_count() {
                return Err(infeasible(format!("scene has {} sensors", scene.sensor_count())));
            }
            if c.samples == 0 || c.samples > scene.pose_count() {
                return Err(infeasible(format!("scene has {} viewpoints", scene.pose_count())));
            }
        }
        Ok(())
    }
}

/// Mean ± sample std over the trials of one (method, cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CellResult<T> {
    pub method: Method,
    pub sensors: usize,
    pub samples: usize,
    pub ex_mean: T,
    pub ex_std: T,
    pub eg_mean: T,
    pub eg_std: T,
    /// Set when a trial failed; the statistics are then NaN.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable<T> {
    pub rows: Vec<CellResult<T>>,
}

impl<T: Scalar> ResultTable<T> {
    pub fn get(&self, method: Method, sensors: usize, samples: usize) -> Option<&CellResult<T>> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.sensors == sensors && r.samples == samples)
    }

    /// `method,sensors,samples,ex_mean,ex_std,eg_mean,eg_std,error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, BenchError> {
        let rows = csv::Reader::from_reader(input)
            .deserialize()
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { rows })
    }
}

/// Seed of one trial (see the module docs).
pub fn trial_seed(master: u64, method: Method, cell: Cell, trial: usize) -> u64 {
    derive_seed(
        master,
        &[label(method.as_str()), cell.sensors as u64, cell.samples as u64, trial as u64],
    )
}

/// The shared dataset: every sensor, the largest sample count of the spec.
pub fn benchmark_dataset<T: Scalar>(
    spec: &BenchmarkSpec<T>,
    scene: &Scene<T>,
    noise: &NoiseModel<T>,
) -> Result<Vec<DataSample<T>>, BenchError> {
    let max_samples = spec.cells.iter().map(|c| c.samples).max().unwrap_or(0);
    let sim = ReadingSimulator::new(BeamGrid::multizone_8x8(), noise.clone()).with_sigma_scale(spec.sigma_scale);
    Ok(scene.collect_samples(max_samples, &sim, derive_seed(spec.master_seed, &[label("data")]))?)
}

/// Full localization output of one trial.
pub fn localize_trial<T: Scalar>(
    spec: &BenchmarkSpec<T>,
    scene: &Scene<T>,
    dataset: &[DataSample<T>],
    noise: &NoiseModel<T>,
    method: Method,
    cell: Cell,
    trial: usize,
) -> Result<Localization<T>, BenchError> {
    let scene = scene.with_sensor_count(cell.sensors)?;
    let samples: Vec<DataSample<T>> = dataset
        .iter()
        .take(cell.samples)
        .map(|s| s.truncated(cell.sensors))
        .collect();
    let mut rng = rng_from_seed(trial_seed(spec.master_seed, method, cell, trial));
    let truth = scene.object_truth();
    let center = Pose2::new(
        truth.x + spec.init_offset_sigma * T::standard_normal(&mut rng),
        truth.y + spec.init_offset_sigma * T::standard_normal(&mut rng),
        truth.gamma,
    );
    let config = FilterConfig {
        init_center: center,
        ..spec.filter
    };
    let model = LikelihoodModel::for_method(method, noise.clone());
    Ok(run_localization(&scene, &samples, &BeamGrid::multizone_8x8(), &model, &config, &mut rng)?)
}

/// Final pose errors `(e_x m, e_γ deg)` of one trial.
pub fn run_trial<T: Scalar>(
    spec: &BenchmarkSpec<T>,
    scene: &Scene<T>,
    dataset: &[DataSample<T>],
    noise: &NoiseModel<T>,
    method: Method,
    cell: Cell,
    trial: usize,
) -> Result<(T, T), BenchError> {
    let out = localize_trial(spec, scene, dataset, noise, method, cell, trial)?;
    Ok((out.error.e_x, out.error.e_gamma))
}

/// Runs every (method, cell, trial). Cells run on the rayon pool; a failing
/// cell is recorded with its error and NaN statistics.
pub fn run_benchmark<T: Scalar>(
    spec: &BenchmarkSpec<T>,
    scene: &Scene<T>,
    noise: &NoiseModel<T>,
) -> Result<ResultTable<T>, BenchError> {
    spec.validate(scene)?;
    let dataset = benchmark_dataset(spec, scene, noise)?;
    let jobs: Vec<(Method, Cell)> = spec
        .methods
        .iter()
        .flat_map(|&m| spec.cells.iter().map(move |&c| (m, c)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(method, cell)| {
            let trials: Result<Vec<(T, T)>, BenchError> = (0..spec.trials)
                .map(|t| run_trial(spec, scene, &dataset, noise, method, cell, t))
                .collect();
            match trials {
                Ok(errs) => {
                    let (ex_mean, ex_std) = mean_std(errs.iter().map(|e| e.0));
                    let (eg_mean, eg_std) = mean_std(errs.iter().map(|e| e.1));
                    log::info!("{method} {}x{}: e_x {ex_mean} ± {ex_std}", cell.sensors, cell.samples);
                    CellResult {
                        method,
                        sensors: cell.sensors,
                        samples: cell.samples,
                        ex_mean,
                        ex_std,
                        eg_mean,
                        eg_std,
                        error: None,
                    }
                }
                Err(e) => {
                    log::warn!("{method} {}x{} failed: {e}", cell.sensors, cell.samples);
                    CellResult {
                        method,
                        sensors: cell.sensors,
                        samples: cell.samples,
                        ex_mean: T::nan(),
                        ex_std: T::nan(),
                        eg_mean: T::nan(),
                        eg_std: T::nan(),
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    Ok(ResultTable { rows })
}

/// Mean and sample standard deviation (n − 1; 0 for a single value).
pub fn mean_std<T: Scalar>(values: impl Iterator<Item = T> + Clone) -> (T, T) {
    let n = values.clone().count();
    if n == 0 {
        return (T::nan(), T::nan());
    }
    let mean = crate::scalar::compensated_sum(values.clone()) / T::from_usize_lossy(n);
    if n == 1 {
        return (mean, T::zero());
    }
    let ss = crate::scalar::compensated_sum(values.map(|v| (v - mean) * (v - mean)));
    (mean, (ss / T::from_usize_lossy(n - 1)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_uses_sample_variance() {
        let (m, s) = mean_std([1.0, 2.0, 3.0].into_iter());
        assert_eq!(m, 2.0);
        assert_eq!(s, 1.0);
        assert_eq!(mean_std([4.0].into_iter()), (4.0, 0.0));
    }

    #[test]
    fn trial_seeds_differ_by_every_component() {
        let c = Cell { sensors: 1, samples: 2 };
        let base = trial_seed(1, Method::Psm, c, 0);
        assert_ne!(base, trial_seed(2, Method::Psm, c, 0));
        assert_ne!(base, trial_seed(1, Method::Ds, c, 0));
        assert_ne!(base, trial_seed(1, Method::Psm, Cell { sensors: 2, samples: 2 }, 0));
        assert_ne!(base, trial_seed(1, Method::Psm, Cell { sensors: 1, samples: 4 }, 0));
        assert_ne!(base, trial_seed(1, Method::Psm, c, 1));
    }

    #[test]
    fn infeasible_cells_are_rejected_up_front() {
        let scene = make_crate_scene::<f64>();
        let spec = BenchmarkSpec {
            cells: vec![Cell { sensors: 5, samples: 2 }],
            ..Default::default()
        };
        assert!(matches!(spec.validate(&scene), Err(BenchError::Infeasible { .. })));
        let spec = BenchmarkSpec::<f64> {
            trials: 0,
            ..Default::default()
        };
        assert!(spec.validate(&scene).is_err());
    }

    #[test]
    fn spec_json_round_trips() {
        let spec = BenchmarkSpec::<f64>::default();
        assert_eq!(BenchmarkSpec::from_json(&spec.to_json()).unwrap(), spec);
        let partial: BenchmarkSpec<f64> = BenchmarkSpec::from_json(r#"{"scene":"deer","trials":2}"#).unwrap();
        assert_eq!(partial.scene, SceneRef::Deer);
        assert_eq!(partial.methods.len(), 3);
    }
}
