use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::deer::deer_analog_mesh;
use super::SimulatorError;
use crate::geometry::{load_obj, Aabb, Mat3, Pose2, Pose3, Surface, TriangleMesh, Vec3};
use crate::scalar::Scalar;
use crate::sensor_model::{MIN_RANGE_MM, BeamGrid};

/// Where the object geometry comes from. Everything is in the object frame
/// with the support plane at z = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum SurfaceSource<T> {
    /// Open-top box (floor and four walls), centered on the origin.
    OpenBox { length: T, width: T, height: T },
    /// Closed box primitive resting on the support plane.
    Box { half_extents: Vec3<T> },
    /// Triangle mesh from an OBJ file; relative paths resolve against the scene file.
    Obj { path: PathBuf },
    /// The built-in quadruped figure.
    DeerAnalog,
}

impl<T: Scalar> SurfaceSource<T> {
    fn resolve(&self, base_dir: Option<&Path>) -> Result<Surface<T>, SimulatorError> {
        Ok(match self {
            SurfaceSource::OpenBox { length, width, height } => {
                Surface::Mesh(open_box_mesh(*length, *width, *height)?)
            }
            SurfaceSource::Box { half_extents } => Surface::Aabb(Aabb::new(
                Vec3::new(T::zero(), T::zero(), half_extents.z),
                *half_extents,
            )?),
            SurfaceSource::Obj { path } => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                Surface::Mesh(load_obj(&full)?)
            }
            SurfaceSource::DeerAnalog => Surface::Mesh(deer_analog_mesh()),
        })
    }
}

/// Beam rejection rule applied after simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum Crop<T> {
    None,
    /// Reject readings longer than the cutoff.
    MaxRange { cutoff_mm: T },
    /// Reject beams whose reconstructed point falls outside this world-frame box.
    Prism { volume: Aabb<T> },
}

impl<T: Scalar> Crop<T> {
    fn validate(&self) -> Result<(), SimulatorError> {
        match self {
            Crop::None => Ok(()),
            Crop::MaxRange { cutoff_mm } if *cutoff_mm > T::lit(MIN_RANGE_MM) => Ok(()),
            Crop::MaxRange { cutoff_mm } => Err(SimulatorError::InvalidScene(format!(
                "cutoff {cutoff_mm} mm must exceed 20 mm"
            ))),
            Crop::Prism { volume } => Aabb::new(volume.center, volume.half_extents)
                .map(|_| ())
                .map_err(SimulatorError::from),
        }
    }

    /// Whether a valid reading (mm) of `beam` from a sensor at `sensor_pose` survives.
    /// The 3-D point is rebuilt from the reading treated as an axis distance.
    pub fn accepts(&self, reading_mm: T, sensor_pose: &Pose3<T>, grid: &BeamGrid<T>, beam: usize) -> bool {
        match self {
            Crop::None => true,
            Crop::MaxRange { cutoff_mm } => reading_mm <= *cutoff_mm,
            Crop::Prism { volume } => {
                let d = grid.directions()[beam];
                let radial_m = reading_mm / T::lit(1000.0) / d.z;
                volume.contains(sensor_pose.transform_point(d * radial_m))
            }
        }
    }
}

/// Serializable description of a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SceneSpec<T> {
    pub surface: SurfaceSource<T>,
    /// Ground-truth object pose on the support plane (world frame).
    pub object_truth: Pose2<T>,
    /// Height of the support plane in the world frame.
    pub support_height: T,
    /// Sensor poses relative to the tool frame.
    pub sensor_mounts: Vec<Pose3<T>>,
    /// Tool poses in the world frame, one per data sample.
    pub robot_poses: Vec<Pose3<T>>,
    pub crop: Crop<T>,
}

/// A validated scene with its surface loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    spec: SceneSpec<T>,
    surface: Surface<T>,
}

impl<T: Scalar> Scene<T> {
    /// `base_dir` resolves relative OBJ paths.
    pub fn new(spec: SceneSpec<T>, base_dir: Option<&Path>) -> Result<Self, SimulatorError> {
        if spec.sensor_mounts.is_empty() {
            return Err(SimulatorError::InvalidScene("no sensor mounts".into()));
        }
        if spec.robot_poses.is_empty() {
            return Err(SimulatorError::InvalidScene("no robot poses".into()));
        }
        let t = spec.object_truth;
        if !(t.x.is_finite() && t.y.is_finite() && t.gamma.is_finite() && spec.support_height.is_finite()) {
            return Err(SimulatorError::InvalidScene("non-finite object pose".into()));
        }
        spec.crop.validate()?;
        let surface = spec.surface.resolve(base_dir)?;
        Ok(Self { spec, surface })
    }

    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self, SimulatorError> {
        Self::new(serde_json::from_str(text)?, base_dir)
    }

    pub fn load(path: &Path) -> Result<Self, SimulatorError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimulatorError::SceneFile {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path.parent())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("scene spec serializes")
    }

    pub fn spec(&self) -> &SceneSpec<T> {
        &self.spec
    }

    /// Object-frame surface.
    pub fn surface(&self) -> &Surface<T> {
        &self.surface
    }

    pub fn object_truth(&self) -> Pose2<T> {
        self.spec.object_truth
    }

    pub fn crop(&self) -> &Crop<T> {
        &self.spec.crop
    }

    pub fn sensor_count(&self) -> usize {
        self.spec.sensor_mounts.len()
    }

    pub fn pose_count(&self) -> usize {
        self.spec.robot_poses.len()
    }

    /// 3-D pose of the object for a planar hypothesis.
    pub fn object_pose(&self, planar: &Pose2<T>) -> Pose3<T> {
        planar.lift(self.spec.support_height)
    }

    /// World pose of `sensor` at robot viewpoint `pose_index`.
    pub fn sensor_pose(&self, pose_index: usize, sensor: usize) -> Pose3<T> {
        self.spec.robot_poses[pose_index].compose(&self.spec.sensor_mounts[sensor])
    }

    /// The same scene restricted to the first `count` sensors of the ring.
    pub fn with_sensor_count(&self, count: usize) -> Result<Self, SimulatorError> {
        if count == 0 || count > self.sensor_count() {
            return Err(SimulatorError::SensorCount {
                requested: count,
                available: self.sensor_count(),
            });
        }
        let mut out = self.clone();
        out.spec.sensor_mounts.truncate(count);
        Ok(out)
    }

    pub fn with_crop(&self, crop: Crop<T>) -> Result<Self, SimulatorError> {
        crop.validate()?;
        let mut out = self.clone();
        out.spec.crop = crop;
        Ok(out)
    }
}

/// Floor and four walls of an open-top box, two triangles each.
pub fn open_box_mesh<T: Scalar>(length: T, width: T, height: T) -> Result<TriangleMesh<T>, SimulatorError> {
    if !(length > T::zero() && width > T::zero() && height > T::zero()) {
        return Err(SimulatorError::InvalidScene("box dimensions must be positive".into()));
    }
    let two = T::lit(2.0);
    let (hx, hy) = (length / two, width / two);
    let z0 = T::zero();
    let vertices = vec![
        Vec3::new(-hx, -hy, z0),
        Vec3::new(hx, -hy, z0),
        Vec3::new(hx, hy, z0),
        Vec3::new(-hx, hy, z0),
        Vec3::new(-hx, -hy, height),
        Vec3::new(hx, -hy, height),
        Vec3::new(hx, hy, height),
        Vec3::new(-hx, hy, height),
    ];
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    Ok(TriangleMesh::new(vertices, triangles)?)
}

/// Tool frame at `position` looking straight down, rotated by `yaw` about the vertical.
pub fn tool_pose<T: Scalar>(position: Vec3<T>, yaw: T) -> Pose3<T> {
    Pose3::new(position, Mat3::rot_z(yaw) * Mat3::rot_x(T::PI())).expect("product of rotations")
}

/// `count` sensors evenly spaced on a ring of `radius` around the tool axis,
/// each tilted outward by `tilt` (radians) from the tool axis.
pub fn sensor_ring<T: Scalar>(count: usize, radius: T, tilt: T) -> Vec<Pose3<T>> {
    (0..count)
        .map(|k| {
            let psi = T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(count);
            let rotation = Mat3::rot_z(psi) * Mat3::rot_y(tilt);
            Pose3::new(Vec3::new(radius * psi.cos(), radius * psi.sin(), T::zero()), rotation)
                .expect("product of rotations")
        })
        .collect()
}

/// Parameters of the synthetic crate scene. Dimensions and viewpoints are
/// illustrative defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CrateConfig<T> {
    pub length: T,
    pub width: T,
    pub height: T,
    pub truth: Pose2<T>,
    pub sensors: usize,
    pub ring_radius: T,
    /// Outward tilt of each sensor from the tool axis.
    pub tilt_deg: T,
    pub cutoff_mm: T,
    pub viewpoints: usize,
    pub viewpoint_seed: u64,
    /// Viewpoints are drawn uniformly in ±this box around the crate center (m).
    pub viewpoint_half_range: [T; 2],
    /// Tool height range above the crate floor (m).
    pub viewpoint_heights: [T; 2],
}

impl<T: Scalar> Default for CrateConfig<T> {
    fn default() -> Self {
        let l = T::lit;
        Self {
            length: l(0.6),
            width: l(0.4),
            height: l(0.3),
            truth: Pose2::from_degrees(l(0.55), l(0.05), l(12.0)),
            sensors: 4,
            ring_radius: l(0.05),
            tilt_deg: l(35.0),
            cutoff_mm: l(600.0),
            viewpoints: 10,
            viewpoint_seed: 17,
            viewpoint_half_range: [l(0.12), l(0.06)],
            viewpoint_heights: [l(0.12), l(0.2)],
        }
    }
}

pub fn make_crate_scene<T: Scalar>() -> Scene<T> {
    make_crate_scene_with(&CrateConfig::default()).expect("default crate scene is valid")
}

/// Crate on the table with the tool lowered inside it at random positions and headings.
pub fn make_crate_scene_with<T: Scalar>(config: &CrateConfig<T>) -> Result<Scene<T>, SimulatorError> {
    let crate_pose = config.truth.lift(T::zero());
    let mut rng = ChaCha8Rng::seed_from_u64(config.viewpoint_seed);
    let uniform = |rng: &mut ChaCha8Rng, lo: T, hi: T| lo + (hi - lo) * T::unit_uniform(rng);
    let [hx, hy] = config.viewpoint_half_range;
    let [z_lo, z_hi] = config.viewpoint_heights;
    let robot_poses = (0..config.viewpoints)
        .map(|_| {
            let x = uniform(&mut rng, -hx, hx);
            let y = uniform(&mut rng, -hy, hy);
            let z = uniform(&mut rng, z_lo, z_hi);
            let yaw = uniform(&mut rng, -T::PI(), T::PI());
            crate_pose.compose(&tool_pose(Vec3::new(x, y, z), yaw))
        })
        .collect();
    Scene::new(
        SceneSpec {
            surface: SurfaceSource::OpenBox {
                length: config.length,
                width: config.width,
                height: config.height,
            },
            object_truth: config.truth,
            support_height: T::zero(),
            sensor_mounts: sensor_ring(config.sensors, config.ring_radius, config.tilt_deg.to_radians()),
            robot_poses,
            crop: Crop::MaxRange {
                cutoff_mm: config.cutoff_mm,
            },
        },
        None,
    )
}

/// Six viewpoints above and beside the object, avoiding its long axis, each
/// yawed so the object sits between the first two sensors of the ring.
fn surround_viewpoints<T: Scalar>(truth: &Pose2<T>) -> Vec<Pose3<T>> {
    let l = T::lit;
    [45.0, 90.0, 135.0, 225.0, 270.0, 315.0]
        .into_iter()
        .map(|offset_deg| {
            let azimuth = truth.gamma + l(offset_deg).to_radians();
            let radius = l(0.24);
            let position = Vec3::new(truth.x + radius * azimuth.cos(), truth.y + radius * azimuth.sin(), l(0.46));
            // Sensor k looks along world azimuth yaw − k·90°; bracket the inward direction.
            let inward = azimuth + T::PI();
            tool_pose(position, inward + l(45.0).to_radians())
        })
        .collect()
}

/// Scene around an ingested mesh: four-sensor ring, six surrounding viewpoints, no crop.
pub fn make_mesh_scene<T: Scalar>(mesh_path: &Path, truth: Pose2<T>) -> Result<Scene<T>, SimulatorError> {
    mesh_scene(SurfaceSource::Obj { path: mesh_path.to_path_buf() }, truth, Crop::None)
}

/// The built-in quadruped standing on the table, cropped to a box around it
/// so table returns are discarded.
pub fn make_deer_scene<T: Scalar>() -> Scene<T> {
    let l = T::lit;
    let truth = Pose2::from_degrees(l(0.5), l(-0.1), l(25.0));
    let volume = Aabb::new(Vec3::new(truth.x, truth.y, l(0.27)), Vec3::new(l(0.3), l(0.3), l(0.25)))
        .expect("positive extents");
    mesh_scene(SurfaceSource::DeerAnalog, truth, Crop::Prism { volume }).expect("built-in scene is valid")
}

/// Steeper than the crate ring so the outward-looking sensors reach an object beside the tool.
const MESH_TILT_DEG: f64 = 55.0;

fn mesh_scene<T: Scalar>(surface: SurfaceSource<T>, truth: Pose2<T>, crop: Crop<T>) -> Result<Scene<T>, SimulatorError> {
    let defaults = CrateConfig::<T>::default();
    Scene::new(
        SceneSpec {
            surface,
            object_truth: truth,
            support_height: T::zero(),
            sensor_mounts: sensor_ring(4, defaults.ring_radius, T::lit(MESH_TILT_DEG).to_radians()),
            robot_poses: surround_viewpoints(&truth),
            crop,
        },
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ray;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ray_from_inside_crate_hits_wall() {
        let scene = make_crate_scene::<f64>();
        // Crate frame: the +y wall is 0.2 m from the center.
        let origin = Vec3::new(0.0, -0.05, 0.15);
        let hit = scene.surface().raycast(&Ray::new(origin, Vec3::unit_y()).unwrap());
        assert!(hit.valid);
        assert_abs_diff_eq!(hit.distance, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn default_crate_dimensions_pass_through() {
        let config = CrateConfig::<f64>::default();
        let scene = make_crate_scene_with(&config).unwrap();
        assert_eq!(
            scene.spec().surface,
            SurfaceSource::OpenBox {
                length: 0.6,
                width: 0.4,
                height: 0.3
            }
        );
        assert_eq!(scene.sensor_count(), 4);
        assert_eq!(scene.pose_count(), 10);
    }

    #[test]
    fn sensor_ring_points_outward_and_down() {
        let tool = tool_pose(Vec3::new(0.0, 0.0, 1.0), 0.0);
        for (k, mount) in sensor_ring(4, 0.05, 55f64.to_radians()).iter().enumerate() {
            let boresight = tool.compose(mount).transform_vector(Vec3::unit_z());
            assert_abs_diff_eq!(boresight.z, -(55f64.to_radians().cos()), epsilon = 1e-12);
            let offset = tool.compose(mount).translation() - tool.translation();
            assert!(offset.dot(&boresight) > 0.0, "sensor {k} not outward");
        }
    }

    #[test]
    fn scene_validation() {
        let scene = make_crate_scene::<f64>();
        assert!(scene.with_sensor_count(0).is_err());
        assert!(scene.with_sensor_count(5).is_err());
        assert_eq!(scene.with_sensor_count(2).unwrap().sensor_count(), 2);
        assert!(scene.with_crop(Crop::MaxRange { cutoff_mm: 10.0 }).is_err());
        let mut spec = scene.spec().clone();
        spec.robot_poses.clear();
        assert!(Scene::new(spec, None).is_err());
    }

    #[test]
    fn scene_json_round_trips() {
        for scene in [make_crate_scene::<f64>(), make_deer_scene()] {
            let back = Scene::from_json(&scene.to_json(), None).unwrap();
            assert_eq!(back, scene);
        }
    }
}
