//! Triangle-mesh kernel: placeable-surface detection, ray casting and
//! collision queries.
//!
//! Everything is in meters, z-up and right-handed. Poses rotate about +z
//! only, after a per-axis positive scale.

mod bvh;
pub mod collision;
mod mesh;
pub mod polygon;
mod ray;
pub mod shapes;
mod surfaces;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bvh::Bvh;
pub use collision::{check_collision, pairwise_collisions, CollisionHit, CollisionReport, DEFAULT_COLLISION_TOL};
pub use mesh::{MeshError, TriangleMesh, DEGENERATE_AREA};
pub use ray::{intersect_triangle, Ray, RayHit, SetHit, TriangleSet};
pub use surfaces::{
    detect_placeable_surfaces, surface_membership, PlaceableSurface, SurfaceParams,
    MAX_NORMAL_DEVIATION_DEG,
};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    /// The inverted box; `union` with anything returns the other operand.
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        points.into_iter().fold(Self::empty(), |b, p| b.grow(p))
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn grow(&self, p: &Vec3) -> Self {
        Self {
            min: self.min.inf(p),
            max: self.max.sup(p),
        }
    }

    pub fn union(&self, other: &Aabb) -> Self {
        Self {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn expanded(&self, d: f64) -> Self {
        Self {
            min: self.min.add_scalar(-d),
            max: self.max.add_scalar(d),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }

    /// Radius of the sphere through the corners, centered on `center()`.
    pub fn bounding_radius(&self) -> f64 {
        self.extents().norm() * 0.5
    }

    /// True when `other` lies inside `self` grown by `tol`.
    pub fn contains_box(&self, other: &Aabb, tol: f64) -> bool {
        (0..3).all(|i| other.min[i] >= self.min[i] - tol && other.max[i] <= self.max[i] + tol)
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Per-axis overlap lengths; a non-positive component means the boxes
    /// are separated (or touching) along that axis.
    pub fn overlap(&self, other: &Aabb) -> Vec3 {
        Vec3::from_fn(|i, _| self.max[i].min(other.max[i]) - self.min[i].max(other.min[i]))
    }
}

/// Similarity-like pose: per-axis scale, then rotation about +z, then
/// translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transform {
    pub translation: Vec3,
    pub rotation_z: f64,
    pub scale: Vec3,
}

impl Default for Transform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        translation: Vec3::new(0.0, 0.0, 0.0),
        rotation_z: 0.0,
        scale: Vec3::new(1.0, 1.0, 1.0),
    };

    pub fn translation(t: Vec3) -> Self {
        Self {
            translation: t,
            ..Self::IDENTITY
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        let s = p.component_mul(&self.scale);
        let (sin, cos) = self.rotation_z.sin_cos();
        Vec3::new(cos * s.x - sin * s.y, sin * s.x + cos * s.y, s.z) + self.translation
    }

    /// Rotates a direction about +z without scaling or translating it.
    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        let (sin, cos) = self.rotation_z.sin_cos();
        Vec3::new(cos * v.x - sin * v.y, sin * v.x + cos * v.y, v.z)
    }
}

/// A shared mesh placed in the world.
#[derive(Clone, Debug)]
pub struct PosedMesh {
    pub mesh: Arc<TriangleMesh>,
    pub transform: Transform,
}

impl PosedMesh {
    pub fn new(mesh: Arc<TriangleMesh>, transform: Transform) -> Self {
        Self { mesh, transform }
    }

    pub fn world_vertices(&self) -> Vec<Vec3> {
        self.mesh
            .vertices()
            .iter()
            .map(|v| self.transform.apply(v))
            .collect()
    }

    pub fn world_aabb(&self) -> Aabb {
        self.mesh
            .vertices()
            .iter()
            .fold(Aabb::empty(), |b, v| b.grow(&self.transform.apply(v)))
    }

    /// The mesh with the pose baked into its vertices.
    pub fn to_world(&self) -> TriangleMesh {
        self.mesh.transformed(&self.transform)
    }
}
