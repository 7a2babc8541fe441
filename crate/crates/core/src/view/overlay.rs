use serde::{Deserialize, Serialize};

use super::camera::Camera;
use crate::geometry::Vec3;
use crate::scene::{MeshResolver, Scene, SceneError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayKind {
    AxisMark,
    InstanceName,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub label: String,
    /// Continuous image coordinates; integers are pixel centers.
    pub pixel: [f64; 2],
    pub kind: OverlayKind,
}

fn anchor(camera: &Camera, p: &Vec3, label: String, kind: OverlayKind) -> Option<Overlay> {
    let (u, v) = camera.project(p)?;
    camera.in_image(u, v).then_some(Overlay {
        label,
        pixel: [u, v],
        kind,
    })
}

/// `x=i` at `(i, 0, 0)` and `y=j` at `(0, j, 0)` for the integers inside
/// the scene's x and y extents, where they project onto the image.
pub fn axis_marks(scene: &Scene, camera: &Camera) -> Vec<Overlay> {
    let b = &scene.bounds;
    let mut out = Vec::new();
    if b.is_empty() {
        return out;
    }
    for i in b.min.x.ceil() as i64..=b.max.x.floor() as i64 {
        out.extend(anchor(camera, &Vec3::new(i as f64, 0.0, 0.0), format!("x={i}"), OverlayKind::AxisMark));
    }
    for j in b.min.y.ceil() as i64..=b.max.y.floor() as i64 {
        out.extend(anchor(camera, &Vec3::new(0.0, j as f64, 0.0), format!("y={j}"), OverlayKind::AxisMark));
    }
    out
}

/// Element ids anchored at the center of each element's world bounding box.
pub fn instance_names(scene: &Scene, resolver: &dyn MeshResolver, camera: &Camera) -> Result<Vec<Overlay>, SceneError> {
    let mut out = Vec::new();
    for id in scene.elements.keys() {
        let center = scene.element_aabb(id, resolver)?.center();
        out.extend(anchor(camera, &center, id.clone(), OverlayKind::InstanceName));
    }
    Ok(out)
}

/// Axis marks followed by instance names.
pub fn make_overlays(scene: &Scene, resolver: &dyn MeshResolver, camera: &Camera) -> Result<Vec<Overlay>, SceneError> {
    let mut out = axis_marks(scene, camera);
    out.extend(instance_names(scene, resolver, camera)?);
    Ok(out)
}
