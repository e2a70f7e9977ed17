mod common;

use common::{box_probe_ray, random_box, random_ray, random_vec, slab_oracle};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tofmcl::geometry::{Aabb, Mat3, Pose3, Ray, Surface, Vec3};

#[test]
fn box_matches_slab_oracle_on_ten_thousand_rays() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut hits = 0;
    for i in 0..10_000 {
        let b = random_box(&mut rng);
        let ray = box_probe_ray(&mut rng, &b, i);
        let hit = b.raycast(&ray);
        match slab_oracle(&b, &ray) {
            Some(t) => {
                assert!(hit.valid, "oracle hit at {t}, box missed");
                assert!((hit.distance - t).abs() < 1e-9);
                hits += 1;
            }
            None => assert!(!hit.valid, "box hit at {}, oracle missed", hit.distance),
        }
    }
    assert!(hits > 2500 && hits < 7500, "{hits} hits");
}

#[test]
fn twelve_triangle_mesh_matches_box_on_ten_thousand_rays() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let b = random_box(&mut rng);
        let mesh = b.to_mesh();
        assert_eq!(mesh.triangles().len(), 12);
        let ray = random_ray(&mut rng);
        let (hb, hm) = (b.raycast(&ray), mesh.raycast(&ray));
        assert_eq!(hb.valid, hm.valid);
        if hb.valid {
            assert!((hb.distance - hm.distance).abs() < 1e-9);
        }
    }
}

#[test]
fn rotation_chain_of_a_thousand_stays_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pose = Pose3::<f64>::identity();
    for _ in 0..1000 {
        let step = Pose3::from_xyz_rpy(
            random_vec(&mut rng, 0.1),
            rng.random_range(-3.1..3.1),
            rng.random_range(-1.5..1.5),
            rng.random_range(-3.1..3.1),
        );
        pose = pose.compose(&step);
        let r = pose.rotation();
        assert!((r.determinant() - 1.0).abs() < 1e-9);
        assert!(r.orthonormality_error() < 1e-9);
    }
}

fn arb_pose() -> impl Strategy<Value = Pose3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -3.1..3.1f64, -1.5..1.5f64, -3.1..3.1f64)
        .prop_map(|(x, y, z, r, p, w)| Pose3::from_xyz_rpy(Vec3::new(x, y, z), r, p, w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn raycast_is_invariant_under_joint_rigid_motion(
        pose in arb_pose(),
        origin in (1.0..2.0f64, -3.1..3.1f64, -1.0..1.0f64),
        target in (-0.9..0.9f64, -0.9..0.9f64, -0.9..0.9f64),
        as_mesh in any::<bool>(),
    ) {
        let b = Aabb::new(Vec3::new(0.1, -0.05, 0.2), Vec3::new(0.3, 0.2, 0.15)).unwrap();
        let surface = if as_mesh { Surface::Mesh(b.to_mesh()) } else { Surface::Aabb(b) };
        // Origin on a shell outside the box, aimed at an interior point.
        let (radius, azimuth, lift) = origin;
        let o = b.center + Vec3::new(radius * azimuth.cos(), radius * azimuth.sin(), lift);
        let aim = b.center + Vec3::new(
            target.0 * b.half_extents.x,
            target.1 * b.half_extents.y,
            target.2 * b.half_extents.z,
        );
        let ray = Ray::new(o, aim - o).unwrap();
        let before = surface.raycast(&ray);
        let after = surface.transformed(&pose).raycast(&ray.transformed(&pose));
        prop_assert!(before.valid && after.valid);
        prop_assert!((before.distance - after.distance).abs() < 1e-9);
    }

    #[test]
    fn rays_pointing_away_from_a_box_miss_after_motion(pose in arb_pose(), dir in (-1.0..1.0f64, -1.0..1.0f64)) {
        let b = Aabb::new(Vec3::zeros(), Vec3::new(0.2, 0.2, 0.2)).unwrap();
        let ray = Ray::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(dir.0, dir.1, 1.0)).unwrap();
        let moved = Surface::Aabb(b).transformed(&pose);
        prop_assert!(!b.raycast(&ray).valid);
        prop_assert!(!moved.raycast(&ray.transformed(&pose)).valid);
    }

    #[test]
    fn elementary_rotations_compose_to_rotations(a in -6.3..6.3f64, b in -6.3..6.3f64, c in -6.3..6.3f64) {
        let r = Mat3::rot_z(a) * Mat3::rot_y(b) * Mat3::rot_x(c);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
        prop_assert!(r.orthonormality_error() < 1e-12);
    }
}
