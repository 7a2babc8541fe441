use std::collections::BTreeMap;
use std::sync::Arc;

use super::fixtures::fixture_parts;
use super::{validate_layout, Opening, RoomError, RoomLayoutSpec};
use crate::geometry::polygon::ear_clip;
use crate::geometry::{Aabb, TriangleMesh, Vec2, Vec3};
use crate::scene::{Category, MaterialAssignment, RoomShell, Scene, SceneElement};

/// Strips narrower than this (m) are dropped rather than triangulated.
const MIN_STRIP: f64 = 1e-9;

/// Coordinates attached to one wall: `s` runs along the wall from its first
/// vertex, `d` points into the room, `z` is height.
#[derive(Clone, Copy, Debug)]
pub struct WallFrame {
    pub origin: Vec2,
    pub direction: Vec2,
    pub length: f64,
}

impl WallFrame {
    pub fn along(&self) -> Vec3 {
        Vec3::new(self.direction.x, self.direction.y, 0.0)
    }

    /// Left of the edge direction, which is inside for a counterclockwise
    /// polygon.
    pub fn inward(&self) -> Vec3 {
        Vec3::new(-self.direction.y, self.direction.x, 0.0)
    }

    pub fn point(&self, s: f64, d: f64, z: f64) -> Vec3 {
        Vec3::new(self.origin.x, self.origin.y, z) + self.along() * s + self.inward() * d
    }
}

pub fn wall_frame(spec: &RoomLayoutSpec, i: usize) -> WallFrame {
    let ring = spec.ring();
    let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
    let length = (b - a).norm();
    WallFrame {
        origin: a,
        direction: (b - a) / length,
        length,
    }
}

/// Inward-facing quads covering the wall minus its openings.
fn wall_mesh(w: &WallFrame, height: f64, openings: &[&Opening]) -> TriangleMesh {
    let mut rects: Vec<[f64; 4]> = Vec::new();
    let mut push = |s0: f64, s1: f64, z0: f64, z1: f64| {
        if s1 - s0 > MIN_STRIP && z1 - z0 > MIN_STRIP {
            rects.push([s0, s1, z0, z1]);
        }
    };
    let mut cursor = 0.0;
    for o in openings {
        let (s0, s1) = (o.offset, o.offset + o.width);
        push(cursor, s0, 0.0, height);
        push(s0, s1, 0.0, o.sill);
        push(s0, s1, o.sill + o.height, height);
        cursor = s1;
    }
    push(cursor, w.length, 0.0, height);

    let mut vertices = Vec::with_capacity(rects.len() * 4);
    let mut triangles = Vec::with_capacity(rects.len() * 2);
    for [s0, s1, z0, z1] in rects {
        let base = vertices.len() as u32;
        vertices.extend([
            w.point(s0, 0.0, z0),
            w.point(s1, 0.0, z0),
            w.point(s1, 0.0, z1),
            w.point(s0, 0.0, z1),
        ]);
        // (up × along) faces inward.
        triangles.push([base, base + 3, base + 2]);
        triangles.push([base, base + 2, base + 1]);
    }
    TriangleMesh::new(vertices, triangles).expect("wall strips are non-degenerate")
}

fn material(description: &Option<String>) -> Option<MaterialAssignment> {
    description.as_ref().map(MaterialAssignment::described)
}

/// Builds the room shell described by `spec` as a scene with no objects
/// other than door and window fixtures.
pub fn build_room(spec: &RoomLayoutSpec) -> Result<Scene, RoomError> {
    let violations = validate_layout(spec);
    if !violations.is_empty() {
        return Err(RoomError::Invalid(violations));
    }
    let ring = spec.ring();
    let h = spec.wall_height;
    let tris = ear_clip(&ring).ok_or_else(|| RoomError::Invalid(vec![]))?;

    let mut bounds = Aabb::empty();
    for p in &ring {
        bounds = bounds.grow(&Vec3::new(p.x, p.y, 0.0)).grow(&Vec3::new(p.x, p.y, h));
    }
    let mut scene = Scene::new("", bounds);
    let mut meshes: BTreeMap<String, Arc<TriangleMesh>> = BTreeMap::new();
    let mut add = |scene: &mut Scene, id: String, category: Category, mesh: TriangleMesh, mat: Option<MaterialAssignment>, meta: Vec<(&str, String)>| {
        let mut el = SceneElement::mesh(category, id.clone());
        el.material = mat;
        el.metadata = meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        meshes.insert(id.clone(), Arc::new(mesh));
        scene.insert_element(id, el).expect("generated ids are unique");
    };

    let tri_idx: Vec<[u32; 3]> = tris.iter().map(|t| t.map(|i| i as u32)).collect();
    let floor = TriangleMesh::new(ring.iter().map(|p| Vec3::new(p.x, p.y, 0.0)).collect(), tri_idx.clone())
        .expect("ear clipping yields proper triangles");
    let ceiling = TriangleMesh::new(
        ring.iter().map(|p| Vec3::new(p.x, p.y, h)).collect(),
        tri_idx.iter().map(|&[a, b, c]| [a, c, b]).collect(),
    )
    .expect("ear clipping yields proper triangles");
    add(&mut scene, "floor_0".into(), Category::Floors, floor, material(&spec.materials.floors), vec![]);
    add(
        &mut scene,
        "ceiling_0".into(),
        Category::Ceilings,
        ceiling,
        material(&spec.materials.ceilings),
        vec![],
    );

    for i in 0..ring.len() {
        let w = wall_frame(spec, i);
        let mut on_wall: Vec<&Opening> = spec.openings.iter().filter(|o| o.wall_index == i).collect();
        on_wall.sort_by(|a, b| a.offset.total_cmp(&b.offset));
        add(
            &mut scene,
            format!("wall_{i}"),
            Category::Walls,
            wall_mesh(&w, h, &on_wall),
            material(&spec.materials.walls),
            vec![("wall_index", i.to_string())],
        );
    }

    for (k, o) in spec.openings.iter().enumerate() {
        let w = wall_frame(spec, o.wall_index);
        let prefix = if o.kind.is_door() { "door" } else { "window" };
        for part in fixture_parts(&w, o) {
            let description = match part.role {
                "frame" => Some(o.materials.frame.clone()),
                "panel" => Some(o.materials.panel.clone()),
                _ => o.materials.knob.clone(),
            };
            add(
                &mut scene,
                format!("{prefix}_{k}_{}", part.role),
                Category::Objects,
                part.mesh,
                description.filter(|d| !d.trim().is_empty()).map(MaterialAssignment::described),
                vec![
                    ("fixture", part.role.to_string()),
                    ("kind", o.kind.to_string()),
                    ("opening", k.to_string()),
                ],
            );
        }
    }
    scene.room = Some(RoomShell { meshes });
    Ok(scene)
}
