use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::camera::{Camera, PanoCamera};
use super::ViewError;
use crate::geometry::{PosedMesh, Ray, SetHit, TriangleSet};
use crate::scene::{MeshResolver, Scene, SceneError};

/// Per-pixel element ordinals (0 = background) and hit distances
/// (+inf = background), row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Maps {
    pub width: u32,
    pub height: u32,
    pub ids: Vec<u32>,
    pub depth: Vec<f64>,
    /// Ordinal -> element id, for exactly the ordinals present in `ids`.
    pub legend: BTreeMap<u32, String>,
}

impl Maps {
    pub fn id_at(&self, u: u32, v: u32) -> u32 {
        self.ids[(v * self.width + u) as usize]
    }

    pub fn depth_at(&self, u: u32, v: u32) -> f64 {
        self.depth[(v * self.width + u) as usize]
    }

    pub fn element_at(&self, u: u32, v: u32) -> Option<&str> {
        self.legend.get(&self.id_at(u, v)).map(String::as_str)
    }

    pub fn background_fraction(&self) -> f64 {
        self.ids.iter().filter(|&&i| i == 0).count() as f64 / self.ids.len() as f64
    }
}

/// Ray-cast renderer over a fixed set of scene instances. Element ordinals
/// follow sorted element id order over the whole scene, starting at 1.
#[derive(Clone, Debug)]
pub struct Renderer {
    set: TriangleSet,
    /// Posed-mesh index -> element ordinal.
    owner_ordinal: Vec<u32>,
    ordinal_id: BTreeMap<u32, String>,
}

impl Renderer {
    pub fn new(scene: &Scene, resolver: &dyn MeshResolver) -> Result<Renderer, SceneError> {
        Self::filtered(scene, resolver, |_| true)
    }

    /// Renderer over the elements whose ids pass `keep`.
    pub fn filtered(scene: &Scene, resolver: &dyn MeshResolver, keep: impl Fn(&str) -> bool) -> Result<Renderer, SceneError> {
        let ordinal_id: BTreeMap<u32, String> = scene
            .elements
            .keys()
            .enumerate()
            .map(|(i, id)| (i as u32 + 1, id.clone()))
            .collect();
        let ordinal_of: BTreeMap<&str, u32> = ordinal_id.iter().map(|(k, v)| (v.as_str(), *k)).collect();
        let mut posed: Vec<PosedMesh> = Vec::new();
        let mut owner_ordinal = Vec::new();
        for inst in scene.instances(resolver, None)? {
            if keep(&inst.element_id) {
                owner_ordinal.push(ordinal_of[inst.element_id.as_str()]);
                posed.push(inst.posed);
            }
        }
        Ok(Renderer {
            set: TriangleSet::from_posed(&posed),
            owner_ordinal,
            ordinal_id,
        })
    }

    /// Nearest hit and the element it belongs to.
    pub fn cast(&self, ray: &Ray) -> Option<(&str, SetHit)> {
        self.set
            .cast(ray)
            .map(|h| (self.ordinal_id[&self.owner_ordinal[h.owner]].as_str(), h))
    }

    fn trace(&self, width: u32, height: u32, ray_at: impl Fn(f64, f64) -> Ray + Sync) -> Maps {
        let rows: Vec<(Vec<u32>, Vec<f64>)> = (0..height)
            .into_par_iter()
            .map(|v| {
                let mut ids = Vec::with_capacity(width as usize);
                let mut depth = Vec::with_capacity(width as usize);
                for u in 0..width {
                    match self.set.cast(&ray_at(u as f64, v as f64)) {
                        Some(h) => {
                            ids.push(self.owner_ordinal[h.owner]);
                            depth.push(h.hit.distance);
                        }
                        None => {
                            ids.push(0);
                            depth.push(f64::INFINITY);
                        }
                    }
                }
                (ids, depth)
            })
            .collect();
        let mut ids = Vec::with_capacity((width * height) as usize);
        let mut depth = Vec::with_capacity((width * height) as usize);
        for (i, d) in rows {
            ids.extend(i);
            depth.extend(d);
        }
        let present: BTreeSet<u32> = ids.iter().copied().filter(|&i| i != 0).collect();
        let legend = present.into_iter().map(|o| (o, self.ordinal_id[&o].clone())).collect();
        Maps {
            width,
            height,
            ids,
            depth,
            legend,
        }
    }

    pub fn render(&self, camera: &Camera) -> Maps {
        self.trace(camera.width, camera.height, |u, v| camera.pixel_to_ray(u, v))
    }

    pub fn render_panorama(&self, camera: &PanoCamera) -> Maps {
        self.trace(camera.width, camera.height, |u, v| camera.pixel_to_ray(u, v))
    }
}

pub fn render_view(scene: &Scene, resolver: &dyn MeshResolver, camera: &Camera) -> Result<Maps, ViewError> {
    camera.validate()?;
    Ok(Renderer::new(scene, resolver)?.render(camera))
}

/// Panorama from a point strictly inside the scene bounds.
pub fn render_panorama(scene: &Scene, resolver: &dyn MeshResolver, camera: &PanoCamera) -> Result<Maps, ViewError> {
    let (p, b) = (camera.position, scene.bounds);
    if !(0..3).all(|i| p[i] > b.min[i] && p[i] < b.max[i]) {
        return Err(ViewError::Camera("panorama camera must be strictly inside the scene bounds".into()));
    }
    if camera.height == 0 || camera.width != 2 * camera.height {
        return Err(ViewError::Camera("panorama width must be twice its height".into()));
    }
    Ok(Renderer::new(scene, resolver)?.render_panorama(camera))
}
