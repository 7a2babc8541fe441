use serde::{Deserialize, Serialize};

use super::camera::{Camera, PanoCamera};
use super::overlay::{axis_marks, instance_names, Overlay};
use super::render::{Maps, Renderer};
use super::ViewError;
use crate::geometry::Vec3;
use crate::scene::{MeshResolver, Scene};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ViewCamera {
    Perspective(Camera),
    Panorama(PanoCamera),
}

#[derive(Clone, Debug, PartialEq)]
pub struct View {
    /// `corner`, `pano` or `labels`.
    pub name: String,
    pub camera: ViewCamera,
    pub maps: Maps,
    pub overlays: Vec<Overlay>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ViewSet {
    pub views: Vec<View>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewParams {
    pub width: u32,
    pub height: u32,
    /// Radians.
    pub vertical_fov: f64,
    pub pano_height: u32,
}

impl Default for ViewParams {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            vertical_fov: 70f64.to_radians(),
            pano_height: 256,
        }
    }
}

/// Horizontal inset of the corner cameras, as a fraction of the way to the
/// room center.
const CORNER_INSET: f64 = 0.1;
/// Corner camera height as a fraction of the room height.
const CORNER_HEIGHT: f64 = 0.85;
const LOOK_HEIGHT: f64 = 0.25;
const PANO_HEIGHT: f64 = 1.6;

/// Elevated camera near the `(min.x, min.y)` corner (or the opposite one)
/// looking at the room center.
pub fn corner_camera(scene: &Scene, opposite: bool, params: &ViewParams) -> Result<Camera, ViewError> {
    let b = &scene.bounds;
    let c = b.center();
    let dz = b.max.z - b.min.z;
    let corner = if opposite { b.max } else { b.min };
    let position = Vec3::new(
        corner.x + CORNER_INSET * (c.x - corner.x),
        corner.y + CORNER_INSET * (c.y - corner.y),
        b.min.z + CORNER_HEIGHT * dz,
    );
    let look_at = Vec3::new(c.x, c.y, b.min.z + LOOK_HEIGHT * dz);
    Camera::new(position, look_at, Vec3::z(), params.vertical_fov, params.width, params.height)
}

/// Panorama camera at the room center, 1.6 m up when that is inside the
/// room, otherwise at half the room height.
pub fn pano_camera(scene: &Scene, params: &ViewParams) -> PanoCamera {
    let b = &scene.bounds;
    let c = b.center();
    let dz = b.max.z - b.min.z;
    PanoCamera::new(Vec3::new(c.x, c.y, b.min.z + if PANO_HEIGHT < dz { PANO_HEIGHT } else { 0.5 * dz }), params.pano_height)
}

/// The three-view state representation: an elevated corner view with axis
/// marks, a panorama from the room center, and the opposite corner view
/// with instance names.
pub fn standard_viewset(scene: &Scene, resolver: &dyn MeshResolver) -> Result<ViewSet, ViewError> {
    standard_viewset_with(scene, resolver, &ViewParams::default())
}

pub fn standard_viewset_with(scene: &Scene, resolver: &dyn MeshResolver, params: &ViewParams) -> Result<ViewSet, ViewError> {
    let renderer = Renderer::new(scene, resolver)?;
    let corner = corner_camera(scene, false, params)?;
    let labels = corner_camera(scene, true, params)?;
    let pano = pano_camera(scene, params);
    Ok(ViewSet {
        views: vec![
            View {
                name: "corner".into(),
                camera: ViewCamera::Perspective(corner),
                maps: renderer.render(&corner),
                overlays: axis_marks(scene, &corner),
            },
            View {
                name: "pano".into(),
                camera: ViewCamera::Panorama(pano),
                maps: renderer.render_panorama(&pano),
                overlays: Vec::new(),
            },
            View {
                name: "labels".into(),
                camera: ViewCamera::Perspective(labels),
                maps: renderer.render(&labels),
                overlays: instance_names(scene, resolver, &labels)?,
            },
        ],
    })
}
