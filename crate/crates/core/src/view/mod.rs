//! Ray-cast views of a scene: element-id and depth maps for perspective
//! and equirectangular cameras, plus overlay anchors for axis marks and
//! instance names.

mod camera;
pub mod io;
mod overlay;
mod render;
mod viewset;

use thiserror::Error;

use crate::scene::SceneError;

pub use camera::{Camera, PanoCamera};
pub use overlay::{axis_marks, instance_names, make_overlays, Overlay, OverlayKind};
pub use render::{render_panorama, render_view, Maps, Renderer};
pub use viewset::{
    corner_camera, pano_camera, standard_viewset, standard_viewset_with, View, ViewCamera, ViewParams,
    ViewSet,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ViewError {
    #[error("invalid camera: {0}")]
    Camera(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("malformed map: {0}")]
    Format(String),
}
