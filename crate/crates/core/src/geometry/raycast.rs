use serde::{Deserialize, Serialize};

use super::{GeometryError, Pose3, Vec3};
use crate::scalar::Scalar;

/// Tolerance on ‖direction‖ − 1.
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray<T> {
    origin: Vec3<T>,
    direction: Vec3<T>,
}

impl<T: Scalar> Ray<T> {
    /// Normalizes `direction`; fails on a zero or non-finite direction.
    pub fn new(origin: Vec3<T>, direction: Vec3<T>) -> Result<Self, GeometryError> {
        let direction = direction
            .normalized()
            .ok_or(GeometryError::DegenerateDirection)?;
        Ok(Self { origin, direction })
    }

    /// Caller guarantees `direction` is unit length (checked in debug builds).
    pub(crate) fn from_unit(origin: Vec3<T>, direction: Vec3<T>) -> Self {
        debug_assert!((direction.norm() - T::one()).abs() < T::lit(1e-6));
        Self { origin, direction }
    }

    pub fn origin(&self) -> Vec3<T> {
        self.origin
    }

    pub fn direction(&self) -> Vec3<T> {
        self.direction
    }

    #[inline]
    pub fn at(&self, t: T) -> Vec3<T> {
        self.origin + self.direction * t
    }

    pub fn transformed(&self, pose: &Pose3<T>) -> Self {
        Self {
            origin: pose.transform_point(self.origin),
            direction: pose.transform_vector(self.direction),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit<T> {
    pub distance: T,
    pub point: Vec3<T>,
    /// Unit surface normal at the hit; orientation (inward/outward) is not normalized.
    pub normal: Vec3<T>,
    pub valid: bool,
}

impl<T: Scalar> Hit<T> {
    pub fn miss() -> Self {
        Self {
            distance: T::infinity(),
            point: Vec3::zeros(),
            normal: Vec3::zeros(),
            valid: false,
        }
    }

    fn at(ray: &Ray<T>, distance: T, normal: Vec3<T>) -> Self {
        Self {
            distance,
            point: ray.at(distance),
            normal,
            valid: true,
        }
    }
}

/// Axis-aligned box given by its center and strictly positive half-extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Aabb<T> {
    pub center: Vec3<T>,
    pub half_extents: Vec3<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn new(center: Vec3<T>, half_extents: Vec3<T>) -> Result<Self, GeometryError> {
        let h = half_extents;
        if !(h.x > T::zero() && h.y > T::zero() && h.z > T::zero()) {
            return Err(GeometryError::NonPositiveExtent);
        }
        Ok(Self {
            center,
            half_extents,
        })
    }

    pub fn min(&self) -> Vec3<T> {
        self.center - self.half_extents
    }

    pub fn max(&self) -> Vec3<T> {
        self.center + self.half_extents
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        let (lo, hi) = (self.min(), self.max());
        (0..3).all(|i| p[i] >= lo[i] && p[i] <= hi[i])
    }

    /// Intersects each of the six face planes and keeps the nearest hit whose
    /// point lies inside the face rectangle.
    pub fn raycast(&self, ray: &Ray<T>) -> Hit<T> {
        let o = ray.origin() - self.center;
        let d = ray.direction();
        let h = self.half_extents;
        let mut best = Hit::miss();
        for axis in 0..3 {
            if d[axis] == T::zero() {
                continue;
            }
            for sign in [-T::one(), T::one()] {
                let t = (sign * h[axis] - o[axis]) / d[axis];
                if !(t >= T::zero()) || t >= best.distance {
                    continue;
                }
                let p = o + d * t;
                let inside = (0..3)
                    .filter(|&k| k != axis)
                    .all(|k| p[k] >= -h[k] && p[k] <= h[k]);
                if inside {
                    let mut n = [T::zero(); 3];
                    n[axis] = sign;
                    best = Hit::at(ray, t, n.into());
                }
            }
        }
        best
    }

    /// The 12-triangle tessellation of the box surface.
    pub fn to_mesh(&self) -> TriangleMesh<T> {
        let (lo, hi) = (self.min(), self.max());
        let corner = |i: usize| {
            Vec3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            )
        };
        let vertices = (0..8).map(corner).collect();
        let triangles = vec![
            [0, 2, 1],
            [1, 2, 3], // z-
            [4, 5, 6],
            [5, 7, 6], // z+
            [0, 1, 4],
            [1, 5, 4], // y-
            [2, 6, 3],
            [3, 6, 7], // y+
            [0, 4, 2],
            [2, 4, 6], // x-
            [1, 3, 5],
            [3, 7, 5], // x+
        ];
        TriangleMesh::new(vertices, triangles).expect("box tessellation is well formed")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct OrientedBox<T> {
    /// Box center frame in the parent frame.
    pub pose: Pose3<T>,
    pub half_extents: Vec3<T>,
}

impl<T: Scalar> OrientedBox<T> {
    pub fn new(pose: Pose3<T>, half_extents: Vec3<T>) -> Result<Self, GeometryError> {
        Aabb::new(Vec3::zeros(), half_extents)?;
        Ok(Self { pose, half_extents })
    }

    pub fn raycast(&self, ray: &Ray<T>) -> Hit<T> {
        let local = ray.transformed(&self.pose.inverse());
        let aabb = Aabb {
            center: Vec3::zeros(),
            half_extents: self.half_extents,
        };
        let hit = aabb.raycast(&local);
        if !hit.valid {
            return hit;
        }
        Hit::at(ray, hit.distance, self.pose.transform_vector(hit.normal))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<T> {
    vertices: Vec<Vec3<T>>,
    triangles: Vec<[usize; 3]>,
    bounds_min: Vec3<T>,
    bounds_max: Vec3<T>,
}

impl<T: Scalar> TriangleMesh<T> {
    pub fn new(vertices: Vec<Vec3<T>>, triangles: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        if triangles.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        for (i, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(GeometryError::IndexOutOfRange {
                    triangle: i,
                    index: bad,
                    vertex_count: vertices.len(),
                });
            }
        }
        let mut lo = Vec3::new(T::infinity(), T::infinity(), T::infinity());
        let mut hi = -lo;
        for tri in &triangles {
            for &v in tri {
                lo = lo.component_min(&vertices[v]);
                hi = hi.component_max(&vertices[v]);
            }
        }
        Ok(Self {
            vertices,
            triangles,
            bounds_min: lo,
            bounds_max: hi,
        })
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn bounds(&self) -> (Vec3<T>, Vec3<T>) {
        (self.bounds_min, self.bounds_max)
    }

    pub fn transformed(&self, pose: &Pose3<T>) -> Self {
        let vertices = self.vertices.iter().map(|&v| pose.transform_point(v)).collect();
        Self::new(vertices, self.triangles.clone()).expect("transform preserves topology")
    }

    /// Padded slab test against the vertex bounds; only an early-out, never decides a hit.
    fn may_hit(&self, ray: &Ray<T>) -> bool {
        let o = ray.origin();
        let d = ray.direction();
        let pad = T::lit(1e-9) * (T::one() + (self.bounds_max - self.bounds_min).norm());
        let mut t_near = T::neg_infinity();
        let mut t_far = T::infinity();
        for i in 0..3 {
            let lo = self.bounds_min[i] - pad;
            let hi = self.bounds_max[i] + pad;
            if d[i] == T::zero() {
                if o[i] < lo || o[i] > hi {
                    return false;
                }
                continue;
            }
            let inv = d[i].recip();
            let (a, b) = ((lo - o[i]) * inv, (hi - o[i]) * inv);
            t_near = t_near.max(a.min(b));
            t_far = t_far.min(a.max(b));
        }
        t_near <= t_far && t_far >= T::zero()
    }

    /// Nearest hit over all triangles. On exact ties the lowest triangle index wins.
    pub fn raycast(&self, ray: &Ray<T>) -> Hit<T> {
        if !self.may_hit(ray) {
            return Hit::miss();
        }
        let mut best = Hit::miss();
        for tri in &self.triangles {
            let [a, b, c] = tri.map(|i| self.vertices[i]);
            if let Some((t, n)) = intersect_triangle(ray, a, b, c) {
                if t < best.distance {
                    best = Hit::at(ray, t, n);
                }
            }
        }
        best
    }
}

/// Möller–Trumbore. Returns the ray parameter and the unit geometric normal.
/// Degenerate (zero-area) triangles and rays parallel to the plane yield `None`.
pub fn intersect_triangle<T: Scalar>(
    ray: &Ray<T>,
    v0: Vec3<T>,
    v1: Vec3<T>,
    v2: Vec3<T>,
) -> Option<(T, Vec3<T>)> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let n = e1.cross(&e2);
    let area2 = n.norm();
    if !(area2 > T::lit(1e-12) * e1.norm() * e2.norm()) {
        return None;
    }
    let d = ray.direction();
    let pvec = d.cross(&e2);
    let det = e1.dot(&pvec);
    if det == T::zero() {
        return None;
    }
    let inv = det.recip();
    let tvec = ray.origin() - v0;
    let u = tvec.dot(&pvec) * inv;
    if u < T::zero() || u > T::one() {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = d.dot(&qvec) * inv;
    if v < T::zero() || u + v > T::one() {
        return None;
    }
    let t = e2.dot(&qvec) * inv;
    if t >= T::zero() {
        Some((t, n * area2.recip()))
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Surface<T> {
    Aabb(Aabb<T>),
    Oriented(OrientedBox<T>),
    Mesh(TriangleMesh<T>),
}

impl<T: Scalar> Surface<T> {
    pub fn raycast(&self, ray: &Ray<T>) -> Hit<T> {
        match self {
            Surface::Aabb(b) => b.raycast(ray),
            Surface::Oriented(b) => b.raycast(ray),
            Surface::Mesh(m) => m.raycast(ray),
        }
    }

    /// The same surface expressed in the parent frame of `pose`.
    pub fn transformed(&self, pose: &Pose3<T>) -> Self {
        match self {
            Surface::Aabb(b) => Surface::Oriented(OrientedBox {
                pose: pose.compose(&Pose3::from_translation(b.center)),
                half_extents: b.half_extents,
            }),
            Surface::Oriented(b) => Surface::Oriented(OrientedBox {
                pose: pose.compose(&b.pose),
                half_extents: b.half_extents,
            }),
            Surface::Mesh(m) => Surface::Mesh(m.transformed(pose)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_box() -> Aabb<f64> {
        Aabb::new(Vec3::zeros(), Vec3::new(0.5, 0.5, 0.5)).unwrap()
    }

    #[test]
    fn ray_along_x_hits_near_face() {
        let ray = Ray::new(Vec3::new(-1.0, 0.0, 0.0), Vec3::unit_x()).unwrap();
        let hit = unit_box().raycast(&ray);
        assert!(hit.valid);
        assert_abs_diff_eq!(hit.distance, 0.5, epsilon = 1e-12);
        assert_eq!(hit.normal, Vec3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn ray_pointing_away_misses() {
        let ray = Ray::new(Vec3::new(-1.0, 0.0, 0.0), -Vec3::unit_x()).unwrap();
        assert!(!unit_box().raycast(&ray).valid);
        assert!(!Surface::Mesh(unit_box().to_mesh()).raycast(&ray).valid);
    }

    #[test]
    fn ray_from_inside_hits_exit_face() {
        let ray = Ray::new(Vec3::new(0.1, 0.0, 0.0), Vec3::unit_x()).unwrap();
        assert_abs_diff_eq!(unit_box().raycast(&ray).distance, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn oblique_ray_on_single_triangle_plane() {
        let tri = TriangleMesh::new(
            vec![
                Vec3::new(-10.0, -10.0, 0.2),
                Vec3::new(10.0, -10.0, 0.2),
                Vec3::new(0.0, 10.0, 0.2),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let theta = 10f64.to_radians();
        let ray = Ray::new(Vec3::zeros(), Vec3::new(theta.sin(), 0.0, theta.cos())).unwrap();
        let hit = tri.raycast(&ray);
        assert!(hit.valid);
        assert_abs_diff_eq!(hit.distance, 0.2 / theta.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(hit.distance, 0.20308, epsilon = 1e-5);
        let expect = ray.at(hit.distance);
        assert_abs_diff_eq!((hit.point - expect).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_triangle_is_skipped() {
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 1.0),
                Vec3::new(1.0, 0.0, 1.0),
                Vec3::new(2.0, 0.0, 1.0),
                Vec3::new(-1.0, -1.0, 2.0),
                Vec3::new(1.0, -1.0, 2.0),
                Vec3::new(0.0, 1.0, 2.0),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        let ray = Ray::new(Vec3::zeros(), Vec3::unit_z()).unwrap();
        let hit = mesh.raycast(&ray);
        assert!(hit.valid);
        assert_abs_diff_eq!(hit.distance, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn mesh_validation() {
        assert!(matches!(
            TriangleMesh::<f64>::new(vec![], vec![]),
            Err(GeometryError::EmptyMesh)
        ));
        assert!(matches!(
            TriangleMesh::new(vec![Vec3::<f64>::zeros(); 2], vec![[0, 1, 2]]),
            Err(GeometryError::IndexOutOfRange { index: 2, .. })
        ));
        assert!(Aabb::new(Vec3::<f64>::zeros(), Vec3::new(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn zero_direction_rejected() {
        assert!(Ray::new(Vec3::<f64>::zeros(), Vec3::zeros()).is_err());
    }

    #[test]
    fn oriented_box_matches_rotated_frame() {
        let pose = Pose3::from_xyz_rpy(Vec3::new(1.0, 2.0, 0.0), 0.0, 0.0, std::f64::consts::FRAC_PI_2);
        let obb = OrientedBox::new(pose, Vec3::new(0.5, 0.1, 0.1)).unwrap();
        // After the quarter turn the long axis lies along world y.
        let ray = Ray::new(Vec3::new(1.0, 0.0, 0.0), Vec3::unit_y()).unwrap();
        let hit = obb.raycast(&ray);
        assert!(hit.valid);
        assert_abs_diff_eq!(hit.distance, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(hit.normal.y, -1.0, epsilon = 1e-12);
    }
}
