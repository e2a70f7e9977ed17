use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tofmcl::geometry::{write_obj, Aabb, Pose2, Vec3};
use tofmcl::sensor_model::{predict_beams, BeamGrid, NoiseModel, ReadingSimulator};
use tofmcl::simulator::{
    collect_sample, make_crate_scene, make_deer_scene, sensor_ring, tool_pose, Crop, Scene, SceneSpec,
    SurfaceSource,
};

fn simulator() -> ReadingSimulator<f64> {
    ReadingSimulator::new(BeamGrid::multizone_8x8(), NoiseModel::characterized())
}

#[test]
fn box_primitive_and_its_obj_mesh_give_the_same_scans() {
    let half = Vec3::new(0.2, 0.15, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let truth = Pose2::from_degrees(0.3, -0.1, 20.0);
    let robot_poses = (0..250)
        .map(|_| {
            let p = Vec3::new(
                truth.x + rng.random_range(-0.3..0.3),
                truth.y + rng.random_range(-0.3..0.3),
                rng.random_range(0.3..0.5),
            );
            tool_pose(p, rng.random_range(-3.1..3.1))
        })
        .collect::<Vec<_>>();
    let spec = |surface| SceneSpec {
        surface,
        object_truth: truth,
        support_height: 0.0,
        sensor_mounts: sensor_ring(4, 0.05, 30f64.to_radians()),
        robot_poses: robot_poses.clone(),
        crop: Crop::None,
    };
    let boxed = Scene::new(spec(SurfaceSource::Box { half_extents: half }), None).unwrap();

    // The same box, resting on the support plane, as a 12-triangle OBJ.
    let mesh = Aabb::new(Vec3::new(0.0, 0.0, half.z), half).unwrap().to_mesh();
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("box.obj"), write_obj(&mesh)).unwrap();
    let meshed = Scene::new(spec(SurfaceSource::Obj { path: "box.obj".into() }), Some(dir.path())).unwrap();

    // 250 viewpoints × 4 sensors = 1000 scans.
    let sim = simulator().noiseless();
    let (a, b) = (boxed.collect_samples(250, &sim, 5).unwrap(), meshed.collect_samples(250, &sim, 5).unwrap());
    let mut valid = 0;
    for (sa, sb) in a.iter().zip(&b) {
        for (fa, fb) in sa.frames.iter().zip(&sb.frames) {
            assert_eq!(fa.valid, fb.valid);
            for beam in 0..64 {
                if fa.valid[beam] {
                    assert!((fa.ranges[beam] - fb.ranges[beam]).abs() < 1e-9);
                    valid += 1;
                }
            }
        }
    }
    assert!(valid > 10_000, "only {valid} valid beams");
}

#[test]
fn nested_prisms_accept_nested_beam_sets() {
    let base = make_deer_scene::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples = base.collect_samples(base.pose_count(), &simulator(), 9).unwrap();
    for _ in 0..50 {
        let center = Vec3::new(
            0.5 + rng.random_range(-0.2..0.2),
            -0.1 + rng.random_range(-0.2..0.2),
            rng.random_range(0.0..0.5),
        );
        let inner = Vec3::new(
            rng.random_range(0.02..0.3),
            rng.random_range(0.02..0.3),
            rng.random_range(0.02..0.3),
        );
        let grow = Vec3::new(rng.random_range(0.0..0.2), rng.random_range(0.0..0.2), rng.random_range(0.0..0.2));
        let small = Crop::Prism { volume: Aabb::new(center, inner).unwrap() };
        let large = Crop::Prism { volume: Aabb::new(center, inner + grow).unwrap() };
        let grid = BeamGrid::multizone_8x8();
        for sample in &samples {
            for (s, frame) in sample.frames.iter().enumerate() {
                let pose = base.sensor_pose(sample.robot_pose_index, s);
                for beam in (0..64).filter(|&b| frame.valid[b]) {
                    let r = frame.range_mm(beam);
                    if small.accepts(r, &pose, &grid, beam) {
                        assert!(large.accepts(r, &pose, &grid, beam));
                    }
                }
            }
        }
    }
}

#[test]
fn shorter_cutoff_accepts_a_subset() {
    let scene = make_crate_scene::<f64>();
    let sim = simulator();
    let counts: Vec<usize> = [250.0, 400.0, 600.0, 1000.0]
        .into_iter()
        .map(|cutoff_mm| {
            let cropped = scene.with_crop(Crop::MaxRange { cutoff_mm }).unwrap();
            cropped.collect_samples(10, &sim, 3).unwrap().iter().map(|s| s.accepted_count()).sum()
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
}

#[test]
fn sample_collection_is_bit_reproducible() {
    let scene = make_crate_scene::<f64>();
    let sim = simulator();
    for pose in 0..scene.pose_count() {
        let a = collect_sample(&scene, pose, &sim, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = collect_sample(&scene, pose, &sim, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }
    assert_eq!(scene.collect_samples(10, &sim, 8).unwrap(), scene.collect_samples(10, &sim, 8).unwrap());
}

#[test]
fn zero_noise_samples_correct_back_to_ray_cast_truth() {
    let model = NoiseModel::<f64>::characterized();
    let sim = ReadingSimulator::new(BeamGrid::multizone_8x8(), model.clone()).noiseless();
    for scene in [make_crate_scene::<f64>(), make_deer_scene()] {
        let object = scene.object_pose(&scene.object_truth());
        let mut checked = 0;
        for sample in scene.collect_samples(scene.pose_count(), &sim, 1).unwrap() {
            for (s, frame) in sample.frames.iter().enumerate() {
                let beams: Vec<usize> = sample.accepted_beams(s).collect();
                let mut truths = Vec::new();
                let pose = scene.sensor_pose(sample.robot_pose_index, s);
                predict_beams(&object, &pose, &sim.grid, scene.surface(), beams.iter().copied(), &mut truths);
                for (&b, t) in beams.iter().zip(&truths) {
                    let corrected = model.correct_range(frame.range_mm(b)).unwrap();
                    let recovered = model.apply_orientation_correction(corrected, t.theta_deg, t.phi_deg);
                    assert!((recovered - t.axis_range_mm).abs() < 1e-6);
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }
}
