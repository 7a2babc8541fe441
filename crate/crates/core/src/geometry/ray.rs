use serde::{Deserialize, Serialize};

use super::{Aabb, Bvh, MeshError, PosedMesh, Vec3};

/// Hits closer than this are treated as self-intersections and ignored.
const MIN_HIT_DISTANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`; fails on a zero or non-finite input.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Ray, MeshError> {
        let len = direction.norm();
        if !len.is_finite() || len == 0.0 || !origin.iter().all(|c| c.is_finite()) {
            return Err(MeshError::NonFinite(0));
        }
        Ok(Ray {
            origin,
            direction: direction / len,
        })
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub point: Vec3,
    /// Weights of the triangle's three vertices, in order.
    pub barycentric: [f64; 3],
}

/// Watertight ray/triangle test (Woop, Benthin & Wald). Two-sided; edges
/// shared by two triangles are hit by exactly one of them or both at the
/// same distance, never neither.
pub fn intersect_triangle(ray: &Ray, tri: &[Vec3; 3], t_max: f64) -> Option<RayHit> {
    let d = ray.direction;
    let kz = d.iamax();
    let mut kx = (kz + 1) % 3;
    let mut ky = (kx + 1) % 3;
    if d[kz] < 0.0 {
        std::mem::swap(&mut kx, &mut ky);
    }
    let sx = d[kx] / d[kz];
    let sy = d[ky] / d[kz];
    let sz = 1.0 / d[kz];

    let a = tri[0] - ray.origin;
    let b = tri[1] - ray.origin;
    let c = tri[2] - ray.origin;
    let ax = a[kx] - sx * a[kz];
    let ay = a[ky] - sy * a[kz];
    let bx = b[kx] - sx * b[kz];
    let by = b[ky] - sy * b[kz];
    let cx = c[kx] - sx * c[kz];
    let cy = c[ky] - sy * c[kz];

    let u = cx * by - cy * bx;
    let v = ax * cy - ay * cx;
    let w = bx * ay - by * ax;
    if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
        return None;
    }
    let det = u + v + w;
    if det == 0.0 {
        return None;
    }
    let t_scaled = u * sz * a[kz] + v * sz * b[kz] + w * sz * c[kz];
    let t = t_scaled / det;
    if !(t > MIN_HIT_DISTANCE && t < t_max) {
        return None;
    }
    let bary = [u / det, v / det, w / det];
    Some(RayHit {
        distance: t,
        point: tri[0] * bary[0] + tri[1] * bary[1] + tri[2] * bary[2],
        barycentric: bary,
    })
}

/// Nearest-hit result against a [`TriangleSet`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SetHit {
    /// Index of the posed mesh that owns the triangle.
    pub owner: usize,
    /// Triangle index within the owner's mesh.
    pub triangle: usize,
    pub hit: RayHit,
}

/// World-space triangle soup built from posed meshes, with a BVH for
/// nearest-hit queries.
#[derive(Clone, Debug)]
pub struct TriangleSet {
    triangles: Vec<[Vec3; 3]>,
    owners: Vec<(u32, u32)>,
    bvh: Bvh,
}

impl TriangleSet {
    pub fn from_posed(meshes: &[PosedMesh]) -> TriangleSet {
        let mut triangles = Vec::new();
        let mut owners = Vec::new();
        for (m, posed) in meshes.iter().enumerate() {
            let world = posed.world_vertices();
            for (t, tri) in posed.mesh.triangles().iter().enumerate() {
                triangles.push(tri.map(|i| world[i as usize]));
                owners.push((m as u32, t as u32));
            }
        }
        let bvh = Bvh::build(&triangles);
        TriangleSet {
            triangles,
            owners,
            bvh,
        }
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn aabb(&self) -> Aabb {
        self.bvh.bounds()
    }

    /// Nearest positive-distance hit, or `None`.
    pub fn cast(&self, ray: &Ray) -> Option<SetHit> {
        self.bvh
            .nearest(ray, |i, t_max| intersect_triangle(ray, &self.triangles[i], t_max))
            .map(|(i, hit)| self.wrap(i, hit))
    }

    /// Same as [`cast`](Self::cast) without the acceleration structure.
    pub fn cast_brute_force(&self, ray: &Ray) -> Option<SetHit> {
        let mut best: Option<(usize, RayHit)> = None;
        for (i, tri) in self.triangles.iter().enumerate() {
            let t_max = best.map_or(f64::INFINITY, |(_, h)| h.distance);
            if let Some(hit) = intersect_triangle(ray, tri, t_max) {
                best = Some((i, hit));
            }
        }
        best.map(|(i, hit)| self.wrap(i, hit))
    }

    fn wrap(&self, i: usize, hit: RayHit) -> SetHit {
        let (owner, triangle) = self.owners[i];
        SetHit {
            owner: owner as usize,
            triangle: triangle as usize,
            hit,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{shapes, Transform};
    use std::sync::Arc;

    fn unit_cube_set() -> TriangleSet {
        let cube = shapes::axis_box(Vec3::repeat(-0.5), Vec3::repeat(0.5));
        TriangleSet::from_posed(&[PosedMesh::new(Arc::new(cube), Transform::IDENTITY)])
    }

    #[test]
    fn straight_down_onto_cube() {
        let set = unit_cube_set();
        let ray = Ray::new(Vec3::new(0.0, 0.0, 5.0), -Vec3::z()).unwrap();
        let hit = set.cast(&ray).unwrap();
        assert!((hit.hit.distance - 4.5).abs() < 1e-12);
        assert!((hit.hit.point - Vec3::new(0.0, 0.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn pointing_away_misses() {
        let set = unit_cube_set();
        let ray = Ray::new(Vec3::new(5.0, 5.0, 5.0), Vec3::z()).unwrap();
        assert!(set.cast(&ray).is_none());
    }

    #[test]
    fn shared_diagonal_is_not_a_crack() {
        // The top face is split along a diagonal; aim right at it.
        let set = unit_cube_set();
        for k in 0..50 {
            let s = -0.5 + k as f64 / 49.0;
            let ray = Ray::new(Vec3::new(s, s, 3.0), -Vec3::z()).unwrap();
            assert!(set.cast(&ray).is_some(), "crack at {s}");
        }
    }

    #[test]
    fn zero_direction_rejected() {
        assert!(Ray::new(Vec3::zeros(), Vec3::zeros()).is_err());
    }
}
