//! Collision-free and in-bounds verification.

use serde::{Deserialize, Serialize};

use super::{Category, MeshResolver, Scene, SceneError};
use crate::geometry::{pairwise_collisions, Aabb, PosedMesh, Vec3};

/// Penetration deeper than this (m) between objects is a collision.
pub const COLLISION_TOL: f64 = 0.001;
/// Slack (m) added to the scene bounds before the containment test.
pub const BOUNDS_TOL: f64 = 0.01;

/// One placement of one element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstanceRef {
    pub element: String,
    pub placement: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionPair {
    /// The lesser instance of the pair.
    pub a: InstanceRef,
    pub b: InstanceRef,
    pub penetration: f64,
    pub axis: Vec3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutOfBounds {
    pub instance: InstanceRef,
    pub aabb: Aabb,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub collisions: Vec<CollisionPair>,
    pub out_of_bounds: Vec<OutOfBounds>,
    pub verified: bool,
}

/// Runs both verifiers: every placement must lie inside the bounds
/// (expanded by [`BOUNDS_TOL`]) and no two object placements may
/// interpenetrate deeper than [`COLLISION_TOL`].
pub fn verify_scene(scene: &Scene, resolver: &dyn MeshResolver) -> Result<VerificationReport, SceneError> {
    let instances = scene.instances(resolver, None)?;
    let refs: Vec<InstanceRef> = instances
        .iter()
        .map(|i| InstanceRef {
            element: i.element_id.clone(),
            placement: i.placement_index,
        })
        .collect();

    let mut out_of_bounds = Vec::new();
    for (inst, r) in instances.iter().zip(&refs) {
        let aabb = inst.posed.world_aabb();
        if !scene.bounds.contains_box(&aabb, BOUNDS_TOL) {
            out_of_bounds.push(OutOfBounds {
                instance: r.clone(),
                aabb,
            });
        }
    }

    let objects: Vec<usize> = (0..instances.len())
        .filter(|&i| instances[i].category == Category::Objects)
        .collect();
    let posed: Vec<PosedMesh> = objects.iter().map(|&i| instances[i].posed.clone()).collect();
    let mut collisions: Vec<CollisionPair> = pairwise_collisions(&posed, COLLISION_TOL)
        .into_iter()
        .map(|(i, j, penetration, axis)| {
            let (a, b) = (refs[objects[i]].clone(), refs[objects[j]].clone());
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            CollisionPair {
                a,
                b,
                penetration,
                axis,
            }
        })
        .collect();
    collisions.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));

    let verified = collisions.is_empty() && out_of_bounds.is_empty();
    Ok(VerificationReport {
        collisions,
        out_of_bounds,
        verified,
    })
}
