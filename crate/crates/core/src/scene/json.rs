//! Canonical scene JSON.
//!
//! Keys are emitted in sorted order and every float is rounded to nine
//! significant digits, so equal scenes always produce identical bytes.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::TAU;
use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer};
use serde_json::{json, Map, Value};

use super::{
    normalize_angle, Category, ElementSource, Light, LightKind, MaterialAssignment, Placement,
    RoomShell, Scene, SceneElement, SceneError,
};
use crate::geometry::{Aabb, TriangleMesh, Vec3};

/// Rounds to nine significant digits.
pub(crate) fn round9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn num(x: f64) -> Value {
    Value::from(round9(x))
}

fn vec3(v: &Vec3) -> Value {
    Value::Array(v.iter().map(|&c| num(c)).collect())
}

/// Rounds every non-integer number in `value` to nine significant digits.
/// Object keys are already sorted by `serde_json::Map`.
pub fn canonical_json(value: &Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64 number")),
        Value::Array(items) => Value::Array(items.iter().map(canonical_json).collect()),
        Value::Object(map) => Value::Object(
            map.iter()
                .map(|(k, v)| (k.clone(), canonical_json(v)))
                .collect(),
        ),
        other => other.clone(),
    }
}

fn placement_value(p: &Placement) -> Value {
    // Rounding can push an angle just below 2π up to 2π itself.
    let mut rot = round9(p.rotation_z);
    if rot >= TAU {
        rot = 0.0;
    }
    json!({
        "position": vec3(&p.position),
        "rotation_z": rot,
        "scale": vec3(&p.scale),
    })
}

fn element_value(el: &SceneElement) -> Value {
    let mut m = Map::new();
    m.insert("category".into(), el.category.as_str().into());
    match &el.source {
        ElementSource::Asset(a) => m.insert("asset_ref".into(), a.as_str().into()),
        ElementSource::Mesh(r) => m.insert("mesh_ref".into(), r.as_str().into()),
    };
    m.insert(
        "placements".into(),
        el.placements.iter().map(placement_value).collect(),
    );
    if let Some(mat) = &el.material {
        m.insert(
            "material".into(),
            json!({ "description": mat.description, "resolved_id": mat.resolved_id }),
        );
    }
    m.insert("metadata".into(), json!(el.metadata));
    Value::Object(m)
}

fn light_value(l: &Light) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), l.kind.as_str().into());
    m.insert("intensity".into(), num(l.intensity));
    m.insert(
        "color".into(),
        l.color.iter().map(|&c| num(c)).collect(),
    );
    if let Some(p) = &l.position {
        m.insert("position".into(), vec3(p));
    }
    if let Some(d) = &l.direction {
        m.insert("direction".into(), vec3(d));
    }
    if let Some(e) = &l.extent {
        m.insert("extent".into(), e.iter().map(|&c| num(c)).collect());
    }
    Value::Object(m)
}

fn room_value(room: &RoomShell) -> Value {
    let meshes: Map<String, Value> = room
        .meshes
        .iter()
        .map(|(k, mesh)| {
            let v = json!({
                "vertices": mesh.vertices().iter().map(vec3).collect::<Vec<_>>(),
                "triangles": mesh.triangles(),
            });
            (k.clone(), v)
        })
        .collect();
    json!({ "meshes": meshes })
}

/// Scene as a canonical JSON value.
pub fn scene_value(scene: &Scene) -> Value {
    let mut m = Map::new();
    m.insert("prompt".into(), scene.prompt.as_str().into());
    m.insert(
        "bounds".into(),
        json!({ "min": vec3(&scene.bounds.min), "max": vec3(&scene.bounds.max) }),
    );
    m.insert(
        "elements".into(),
        Value::Object(
            scene
                .elements
                .iter()
                .map(|(k, e)| (k.clone(), element_value(e)))
                .collect(),
        ),
    );
    m.insert(
        "lights".into(),
        Value::Object(
            scene
                .lights
                .iter()
                .map(|(k, l)| (k.clone(), light_value(l)))
                .collect(),
        ),
    );
    if let Some(room) = &scene.room {
        m.insert("room".into(), room_value(room));
    }
    Value::Object(m)
}

/// Canonical UTF-8 JSON bytes, newline-terminated.
pub fn serialize_scene(scene: &Scene) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&scene_value(scene)).expect("scene values serialize");
    out.push(b'\n');
    out
}

/// Map that keeps every entry, so duplicate keys can be reported.
struct Entries<T>(Vec<(String, T)>);

impl<T> Default for Entries<T> {
    fn default() -> Self {
        Entries(Vec::new())
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Entries<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = Entries<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry()? {
                    out.push(entry);
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(V(PhantomData))
    }
}

impl<T> Entries<T> {
    fn unique(self, prefix: &str, seen: &mut HashSet<String>) -> Result<Vec<(String, T)>, SceneError> {
        for (k, _) in &self.0 {
            if !seen.insert(k.clone()) {
                return Err(SceneError::DuplicateId {
                    path: format!("{prefix}/{k}"),
                });
            }
        }
        Ok(self.0)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    prompt: String,
    bounds: RawBounds,
    #[serde(default)]
    elements: Entries<RawElement>,
    #[serde(default)]
    lights: Entries<RawLight>,
    #[serde(default)]
    room: Option<RawRoom>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    min: [f64; 3],
    max: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElement {
    category: String,
    asset_ref: Option<String>,
    mesh_ref: Option<String>,
    placements: Vec<RawPlacement>,
    material: Option<RawMaterial>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlacement {
    position: [f64; 3],
    rotation_z: f64,
    scale: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    description: String,
    resolved_id: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLight {
    kind: String,
    intensity: f64,
    color: [f64; 3],
    position: Option<[f64; 3]>,
    direction: Option<[f64; 3]>,
    extent: Option<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoom {
    meshes: Entries<RawMesh>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[u32; 3]>,
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

pub fn deserialize_scene(bytes: &[u8]) -> Result<Scene, SceneError> {
    let raw: RawScene = serde_json::from_slice(bytes).map_err(|e| SceneError::Json(e.to_string()))?;

    let (min, max) = (v3(raw.bounds.min), v3(raw.bounds.max));
    if !min.iter().chain(max.iter()).all(|c| c.is_finite()) {
        return Err(SceneError::NonFinite { path: "bounds".into() });
    }
    if (0..3).any(|i| min[i] > max[i]) {
        return Err(SceneError::Invalid {
            path: "bounds".into(),
            message: "min exceeds max".into(),
        });
    }
    let mut scene = Scene::new(raw.prompt, Aabb::new(min, max));

    // Element and light ids share one namespace.
    let mut seen = HashSet::new();
    for (id, e) in raw.elements.unique("elements", &mut seen)? {
        let path = format!("elements/{id}");
        let category: Category = e.category.parse().map_err(|_| SceneError::UnknownCategory {
            path: format!("{path}/category"),
            value: e.category.clone(),
        })?;
        let source = match (e.asset_ref, e.mesh_ref) {
            (Some(a), None) => ElementSource::Asset(a),
            (None, Some(m)) => ElementSource::Mesh(m),
            _ => {
                return Err(SceneError::Invalid {
                    path,
                    message: "exactly one of asset_ref and mesh_ref required".into(),
                })
            }
        };
        let placements = e
            .placements
            .into_iter()
            .map(|p| Placement {
                position: v3(p.position),
                rotation_z: normalize_angle(p.rotation_z),
                scale: v3(p.scale),
            })
            .collect();
        let element = SceneElement {
            category,
            source,
            placements,
            material: e.material.map(|m| MaterialAssignment {
                description: m.description,
                resolved_id: m.resolved_id,
            }),
            metadata: e.metadata,
        };
        scene.insert_element(id, element)?;
    }
    for (id, l) in raw.lights.unique("lights", &mut seen)? {
        let path = format!("lights/{id}");
        let kind: LightKind = l.kind.parse().map_err(|_| SceneError::UnknownLightKind {
            path: format!("{path}/kind"),
            value: l.kind.clone(),
        })?;
        let light = Light {
            kind,
            intensity: l.intensity,
            color: l.color,
            position: l.position.map(v3),
            direction: l.direction.map(v3),
            extent: l.extent,
        };
        scene.insert_light(id, light)?;
    }
    if let Some(room) = raw.room {
        let mut meshes = BTreeMap::new();
        for (name, m) in room.meshes.unique("room/meshes", &mut HashSet::new())? {
            let mesh = TriangleMesh::new(m.vertices.into_iter().map(v3).collect(), m.triangles)
                .map_err(|source| SceneError::Mesh {
                    path: format!("room/meshes/{name}"),
                    source,
                })?;
            meshes.insert(name, Arc::new(mesh));
        }
        scene.room = Some(RoomShell { meshes });
    }
    Ok(scene)
}
