//! Scene description model: categories, placements, materials, lights and
//! the scene container.
//!
//! Every other module reads or edits scenes through these types. A
//! [`Scene`] owns its elements outright, so cloning it gives an isolated
//! copy that candidate edits can mutate freely.

mod error;
mod json;
mod verify;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, PosedMesh, Transform, TriangleMesh, Vec3};

pub use error::SceneError;
pub use json::{canonical_json, deserialize_scene, scene_value, serialize_scene};
pub use verify::{
    verify_scene, CollisionPair, InstanceRef, OutOfBounds, VerificationReport, BOUNDS_TOL, COLLISION_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Floors,
    Walls,
    Ceilings,
    Objects,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Floors,
        Category::Walls,
        Category::Ceilings,
        Category::Objects,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Floors => "floors",
            Category::Walls => "walls",
            Category::Ceilings => "ceilings",
            Category::Objects => "objects",
        }
    }

    /// Singular noun used when generating element ids.
    pub fn word(self) -> &'static str {
        match self {
            Category::Floors => "floor",
            Category::Walls => "wall",
            Category::Ceilings => "ceiling",
            Category::Objects => "object",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL.into_iter().find(|c| c.as_str() == s).ok_or(())
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub position: Vec3,
    pub rotation_z: f64,
    pub scale: Vec3,
}

impl Default for Placement {
    fn default() -> Self {
        Self {
            position: Vec3::zeros(),
            rotation_z: 0.0,
            scale: Vec3::repeat(1.0),
        }
    }
}

impl Placement {
    pub fn new(position: Vec3, rotation_z: f64, scale: Vec3) -> Self {
        Self {
            position,
            rotation_z: normalize_angle(rotation_z),
            scale,
        }
    }

    pub fn at(position: Vec3) -> Self {
        Self {
            position,
            ..Self::default()
        }
    }

    pub fn transform(&self) -> Transform {
        Transform {
            translation: self.position,
            rotation_z: self.rotation_z,
            scale: self.scale,
        }
    }

    pub(crate) fn check(&self, path: &str) -> Result<(), SceneError> {
        let finite = self.position.iter().chain(self.scale.iter()).all(|c| c.is_finite())
            && self.rotation_z.is_finite();
        if !finite {
            return Err(SceneError::NonFinite { path: path.into() });
        }
        if self.scale.iter().any(|&s| s <= 0.0) {
            return Err(SceneError::NonPositiveScale { path: path.into() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterialAssignment {
    pub description: String,
    /// Material manifest id, once retrieved.
    pub resolved_id: Option<String>,
}

impl MaterialAssignment {
    pub fn described(description: impl Into<String>) -> Self {
        Self {
            description: description.into(),
            resolved_id: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LightKind {
    Point,
    Directional,
    Area,
}

impl LightKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LightKind::Point => "point",
            LightKind::Directional => "directional",
            LightKind::Area => "area",
        }
    }
}

impl FromStr for LightKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "point" => Ok(LightKind::Point),
            "directional" => Ok(LightKind::Directional),
            "area" => Ok(LightKind::Area),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Light {
    pub kind: LightKind,
    pub intensity: f64,
    pub color: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<[f64; 2]>,
}

impl Light {
    pub fn point(intensity: f64, color: [f64; 3], position: Vec3) -> Self {
        Self {
            kind: LightKind::Point,
            intensity,
            color,
            position: Some(position),
            direction: None,
            extent: None,
        }
    }

    pub fn directional(intensity: f64, color: [f64; 3], direction: Vec3) -> Self {
        Self {
            kind: LightKind::Directional,
            intensity,
            color,
            position: None,
            direction: Some(direction),
            extent: None,
        }
    }

    pub fn area(intensity: f64, color: [f64; 3], position: Vec3, extent: [f64; 2]) -> Self {
        Self {
            kind: LightKind::Area,
            intensity,
            color,
            position: Some(position),
            direction: None,
            extent: Some(extent),
        }
    }

    /// Checks the light invariants; `path` names the light in errors.
    pub fn check(&self, path: &str) -> Result<(), SceneError> {
        let invalid = |message: &str| SceneError::Invalid {
            path: path.into(),
            message: message.into(),
        };
        if !(self.intensity.is_finite() && self.intensity > 0.0) {
            return Err(invalid("intensity must be positive"));
        }
        if self.color.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(SceneError::ColorOutOfRange { path: path.into() });
        }
        let needs_position = matches!(self.kind, LightKind::Point | LightKind::Area);
        if needs_position != self.position.is_some() {
            return Err(invalid(if needs_position {
                "position required"
            } else {
                "position not allowed"
            }));
        }
        if let Some(p) = self.position {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(SceneError::NonFinite { path: path.into() });
            }
        }
        let needs_direction = self.kind == LightKind::Directional;
        match (needs_direction, self.direction) {
            (true, Some(d)) if (d.norm() - 1.0).abs() <= 1e-6 => {}
            (true, Some(_)) => return Err(invalid("direction must be a unit vector")),
            (true, None) => return Err(invalid("direction required")),
            (false, Some(_)) => return Err(invalid("direction not allowed")),
            (false, None) => {}
        }
        let needs_extent = self.kind == LightKind::Area;
        match (needs_extent, self.extent) {
            (true, Some(e)) if e.iter().all(|&x| x.is_finite() && x > 0.0) => {}
            (true, _) => return Err(invalid("positive extent required")),
            (false, Some(_)) => return Err(invalid("extent not allowed")),
            (false, None) => {}
        }
        Ok(())
    }
}

/// Where an element's geometry comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementSource {
    /// An asset manifest id.
    Asset(String),
    /// A mesh stored in the scene's room shell.
    Mesh(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneElement {
    pub category: Category,
    pub source: ElementSource,
    pub placements: Vec<Placement>,
    pub material: Option<MaterialAssignment>,
    pub metadata: BTreeMap<String, String>,
}

impl SceneElement {
    pub fn asset(category: Category, asset_ref: impl Into<String>, placement: Placement) -> Self {
        Self {
            category,
            source: ElementSource::Asset(asset_ref.into()),
            placements: vec![placement],
            material: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn mesh(category: Category, mesh_ref: impl Into<String>) -> Self {
        Self {
            category,
            source: ElementSource::Mesh(mesh_ref.into()),
            placements: vec![Placement::default()],
            material: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_material(mut self, description: impl Into<String>) -> Self {
        self.material = Some(MaterialAssignment::described(description));
        self
    }

    pub fn asset_ref(&self) -> Option<&str> {
        match &self.source {
            ElementSource::Asset(a) => Some(a),
            ElementSource::Mesh(_) => None,
        }
    }
}

/// Meshes generated for the room shell and its fixtures, keyed by the
/// `mesh_ref` names elements use.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoomShell {
    pub meshes: BTreeMap<String, Arc<TriangleMesh>>,
}

/// Looks up asset meshes by manifest id.
pub trait MeshResolver {
    fn asset_mesh(&self, asset_ref: &str) -> Option<Arc<TriangleMesh>>;
}

impl MeshResolver for BTreeMap<String, Arc<TriangleMesh>> {
    fn asset_mesh(&self, asset_ref: &str) -> Option<Arc<TriangleMesh>> {
        self.get(asset_ref).cloned()
    }
}

impl<R: MeshResolver + ?Sized> MeshResolver for &R {
    fn asset_mesh(&self, asset_ref: &str) -> Option<Arc<TriangleMesh>> {
        (**self).asset_mesh(asset_ref)
    }
}

/// Resolver for scenes that only use room-shell meshes.
pub struct NoAssets;

impl MeshResolver for NoAssets {
    fn asset_mesh(&self, _: &str) -> Option<Arc<TriangleMesh>> {
        None
    }
}

/// One placement of one element, posed in world space.
#[derive(Clone, Debug)]
pub struct Instance {
    pub element_id: String,
    pub placement_index: usize,
    pub category: Category,
    pub posed: PosedMesh,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub prompt: String,
    pub bounds: Aabb,
    pub elements: BTreeMap<String, SceneElement>,
    pub lights: BTreeMap<String, Light>,
    pub room: Option<RoomShell>,
}

impl Scene {
    pub fn new(prompt: impl Into<String>, bounds: Aabb) -> Self {
        Self {
            prompt: prompt.into(),
            bounds,
            elements: BTreeMap::new(),
            lights: BTreeMap::new(),
            room: None,
        }
    }

    /// Deep copy. Scenes own all their data (room meshes are shared
    /// immutably), so edits to the copy never reach the original.
    pub fn clone_scene(&self) -> Scene {
        self.clone()
    }

    pub fn element(&self, id: &str) -> Option<&SceneElement> {
        self.elements.get(id)
    }

    /// Inserts a new element; ids must be unique.
    pub fn insert_element(&mut self, id: impl Into<String>, element: SceneElement) -> Result<(), SceneError> {
        let id = id.into();
        let path = format!("elements/{id}");
        if self.elements.contains_key(&id) {
            return Err(SceneError::DuplicateId { path });
        }
        check_element(&path, &element)?;
        self.elements.insert(id, element);
        Ok(())
    }

    pub fn insert_light(&mut self, id: impl Into<String>, light: Light) -> Result<(), SceneError> {
        let id = id.into();
        let path = format!("lights/{id}");
        if self.lights.contains_key(&id) {
            return Err(SceneError::DuplicateId { path });
        }
        light.check(&path)?;
        self.lights.insert(id, light);
        Ok(())
    }

    /// First free id of the form `<stem>_<n>`, n ≥ 1.
    pub fn fresh_id(&self, stem: &str) -> String {
        (1..)
            .map(|n| format!("{stem}_{n}"))
            .find(|id| !self.elements.contains_key(id) && !self.lights.contains_key(id))
            .expect("unbounded counter")
    }

    /// Mesh for an element: room-shell meshes come from the scene, assets
    /// from `resolver`.
    pub fn element_mesh(
        &self,
        id: &str,
        element: &SceneElement,
        resolver: &dyn MeshResolver,
    ) -> Result<Arc<TriangleMesh>, SceneError> {
        let found = match &element.source {
            ElementSource::Asset(a) => resolver.asset_mesh(a),
            ElementSource::Mesh(m) => self.room.as_ref().and_then(|r| r.meshes.get(m).cloned()),
        };
        found.ok_or_else(|| SceneError::UnresolvedMesh { element: id.into() })
    }

    /// All placements of all elements (optionally filtered by category),
    /// in element-id order.
    pub fn instances(
        &self,
        resolver: &dyn MeshResolver,
        filter: Option<Category>,
    ) -> Result<Vec<Instance>, SceneError> {
        let mut out = Vec::new();
        for (id, el) in &self.elements {
            if filter.is_some_and(|c| c != el.category) {
                continue;
            }
            let mesh = self.element_mesh(id, el, resolver)?;
            for (k, p) in el.placements.iter().enumerate() {
                out.push(Instance {
                    element_id: id.clone(),
                    placement_index: k,
                    category: el.category,
                    posed: PosedMesh::new(mesh.clone(), p.transform()),
                });
            }
        }
        Ok(out)
    }

    /// World bounding box over all placements of one element.
    pub fn element_aabb(&self, id: &str, resolver: &dyn MeshResolver) -> Result<Aabb, SceneError> {
        let el = self
            .elements
            .get(id)
            .ok_or_else(|| SceneError::UnknownElement(id.into()))?;
        let mesh = self.element_mesh(id, el, resolver)?;
        Ok(el.placements.iter().fold(Aabb::empty(), |b, p| {
            b.union(&PosedMesh::new(mesh.clone(), p.transform()).world_aabb())
        }))
    }

    /// Checks every element and light invariant that does not need meshes.
    pub fn check(&self) -> Result<(), SceneError> {
        for (id, el) in &self.elements {
            check_element(&format!("elements/{id}"), el)?;
        }
        for (id, light) in &self.lights {
            light.check(&format!("lights/{id}"))?;
        }
        Ok(())
    }
}

fn check_element(path: &str, el: &SceneElement) -> Result<(), SceneError> {
    if el.placements.is_empty() {
        return Err(SceneError::Invalid {
            path: path.into(),
            message: "at least one placement required".into(),
        });
    }
    for (k, p) in el.placements.iter().enumerate() {
        p.check(&format!("{path}/placements/{k}"))?;
    }
    if let Some(m) = &el.material {
        if m.description.trim().is_empty() {
            return Err(SceneError::Invalid {
                path: format!("{path}/material"),
                message: "material description must be non-empty".into(),
            });
        }
    }
    Ok(())
}
