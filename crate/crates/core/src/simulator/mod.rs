//! Scenes (object, ground truth, sensor ring, robot viewpoints, crop rule) and
//! collection of data samples from them.

mod deer;
mod sample;
mod scene;

pub use deer::deer_analog_mesh;
pub use sample::{collect_sample, read_samples_csv, write_samples_csv, DataSample};
pub use scene::{
    make_crate_scene, make_crate_scene_with, make_deer_scene, make_mesh_scene, open_box_mesh, sensor_ring,
    tool_pose, CrateConfig, Crop, Scene, SceneSpec, SurfaceSource,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("sensor count {requested} not available (scene has {available} mounts)")]
    SensorCount { requested: usize, available: usize },
    #[error("robot pose index {index} out of range ({count} poses)")]
    PoseIndex { index: usize, count: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("scene file {path}: {source}")]
    SceneFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scene json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: {reason}")]
    CsvLayout { row: usize, reason: String },
}
