//! Oracles and random generators shared by integration test targets.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tofmcl::geometry::{Aabb, Ray, Vec3};

/// Textbook slab intersection, written independently of the face-plane method.
pub fn slab_oracle(b: &Aabb<f64>, ray: &Ray<f64>) -> Option<f64> {
    let (lo, hi) = (b.min(), b.max());
    let (o, d) = (ray.origin(), ray.direction());
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for k in 0..3 {
        if d[k] == 0.0 {
            if o[k] < lo[k] || o[k] > hi[k] {
                return None;
            }
            continue;
        }
        let (t1, t2) = ((lo[k] - o[k]) / d[k], (hi[k] - o[k]) / d[k]);
        t_near = t_near.max(t1.min(t2));
        t_far = t_far.min(t1.max(t2));
    }
    if t_near > t_far || t_far < 0.0 {
        None
    } else if t_near >= 0.0 {
        Some(t_near)
    } else {
        Some(t_far)
    }
}

pub fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3<f64> {
    Vec3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn random_ray(rng: &mut ChaCha8Rng) -> Ray<f64> {
    loop {
        if let Ok(r) = Ray::new(random_vec(rng, 1.0), random_vec(rng, 1.0)) {
            return r;
        }
    }
}

pub fn random_box(rng: &mut ChaCha8Rng) -> Aabb<f64> {
    let h = Vec3::new(
        rng.random_range(0.05..0.5),
        rng.random_range(0.05..0.5),
        rng.random_range(0.05..0.5),
    );
    Aabb::new(random_vec(rng, 0.2), h).unwrap()
}

/// The i-th of a stream of rays alternating between fully random and aimed near `b`.
pub fn box_probe_ray(rng: &mut ChaCha8Rng, b: &Aabb<f64>, i: usize) -> Ray<f64> {
    if i % 2 == 0 {
        random_ray(rng)
    } else {
        let o = random_vec(rng, 1.0);
        Ray::new(o, b.center + random_vec(rng, 0.5) - o).unwrap()
    }
}
