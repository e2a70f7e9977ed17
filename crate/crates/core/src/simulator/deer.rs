use crate::geometry::{TriangleMesh, Vec3};
use crate::scalar::Scalar;

const SLICES: usize = 8;
const STACKS: usize = 5;
/// Half-size of the square patch of support plane included with the figure.
const GROUND_HALF_SIZE: f64 = 1.5;

/// (center, radii) in meters; x forward, z up, feet on z = 0.
const PARTS: [([f64; 3], [f64; 3]); 10] = [
    ([0.0, 0.0, 0.24], [0.16, 0.065, 0.075]),   // body
    ([0.13, 0.0, 0.33], [0.04, 0.035, 0.09]),   // neck
    ([0.18, 0.0, 0.42], [0.07, 0.03, 0.035]),   // head
    ([0.11, 0.04, 0.095], [0.02, 0.02, 0.095]), // legs
    ([0.11, -0.04, 0.095], [0.02, 0.02, 0.095]),
    ([-0.11, 0.04, 0.095], [0.02, 0.02, 0.095]),
    ([-0.11, -0.04, 0.095], [0.02, 0.02, 0.095]),
    ([-0.17, 0.0, 0.27], [0.03, 0.015, 0.02]), // tail
    ([0.15, 0.04, 0.48], [0.015, 0.04, 0.04]), // antlers
    ([0.15, -0.04, 0.48], [0.015, 0.04, 0.04]),
];

/// Quadruped figure about 0.4 m long and 0.5 m tall built from faceted
/// ellipsoids, standing on a patch of its support plane. 642 triangles.
pub fn deer_analog_mesh<T: Scalar>() -> TriangleMesh<T> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (center, radii) in PARTS {
        ellipsoid(center, radii, &mut vertices, &mut triangles);
    }
    let g = GROUND_HALF_SIZE;
    let base = vertices.len();
    for (x, y) in [(-g, -g), (g, -g), (g, g), (-g, g)] {
        vertices.push([x, y, 0.0]);
    }
    triangles.push([base, base + 1, base + 2]);
    triangles.push([base, base + 2, base + 3]);
    let vertices = vertices
        .into_iter()
        .map(|[x, y, z]| Vec3::new(T::lit(x), T::lit(y), T::lit(z)))
        .collect();
    TriangleMesh::new(vertices, triangles).expect("generated mesh is valid")
}

fn ellipsoid(center: [f64; 3], radii: [f64; 3], vertices: &mut Vec<[f64; 3]>, triangles: &mut Vec<[usize; 3]>) {
    let base = vertices.len();
    let point = |polar: f64, azimuth: f64| {
        [
            center[0] + radii[0] * polar.sin() * azimuth.cos(),
            center[1] + radii[1] * polar.sin() * azimuth.sin(),
            center[2] + radii[2] * polar.cos(),
        ]
    };
    vertices.push(point(0.0, 0.0));
    for stack in 1..STACKS {
        let polar = std::f64::consts::PI * stack as f64 / STACKS as f64;
        for slice in 0..SLICES {
            vertices.push(point(polar, std::f64::consts::TAU * slice as f64 / SLICES as f64));
        }
    }
    vertices.push(point(std::f64::consts::PI, 0.0));
    let south = vertices.len() - 1;
    let ring = |stack: usize, slice: usize| base + 1 + (stack - 1) * SLICES + slice % SLICES;
    for s in 0..SLICES {
        triangles.push([base, ring(1, s), ring(1, s + 1)]);
    }
    for stack in 1..STACKS - 1 {
        for s in 0..SLICES {
            let (a, b) = (ring(stack, s), ring(stack, s + 1));
            let (c, d) = (ring(stack + 1, s), ring(stack + 1, s + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    for s in 0..SLICES {
        triangles.push([ring(STACKS - 1, s), south, ring(STACKS - 1, s + 1)]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_obj, write_obj};

    const ASSET: &str = include_str!("../../assets/deer_analog.obj");

    #[test]
    fn mesh_has_a_few_hundred_triangles() {
        let mesh = deer_analog_mesh::<f64>();
        assert_eq!(mesh.triangles().len(), 642);
        let (lo, hi) = mesh.bounds();
        assert_eq!(lo.z, 0.0);
        assert!(hi.z > 0.45 && hi.z < 0.55);
    }

    #[test]
    fn shipped_asset_matches_generator() {
        let parsed: TriangleMesh<f64> = parse_obj(ASSET).unwrap();
        assert_eq!(parsed, deer_analog_mesh());
    }

    #[test]
    #[ignore = "rewrites crates/core/assets/deer_analog.obj"]
    fn regenerate_asset() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/deer_analog.obj");
        std::fs::write(path, write_obj(&deer_analog_mesh::<f64>())).unwrap();
    }
}
