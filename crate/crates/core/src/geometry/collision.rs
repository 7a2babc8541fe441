//! Static collision queries between posed meshes.
//!
//! Broad phase: world AABB overlap. Narrow phase works per index-connected
//! component: two components are in contact when any of their triangles
//! intersect (or one encloses the other), and the contact is a collision
//! when the separating-axis penetration depth of the pair exceeds the
//! tolerance. Components are treated as convex for the depth estimate,
//! which is exact for the box-built assets in this crate.

use serde::{Deserialize, Serialize};

use super::polygon::segments_intersect;
use super::{intersect_triangle, Aabb, PosedMesh, Ray, Vec2, Vec3};

/// Resting contact up to this depth (m) is not a collision.
pub const DEFAULT_COLLISION_TOL: f64 = 0.001;

/// Plane-distance threshold below which a vertex is treated as on-plane.
const PLANE_EPS: f64 = 1e-10;

/// Components with more triangles than this only use face normals as
/// separating-axis candidates.
const EDGE_AXIS_LIMIT: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionHit {
    /// Index into the scene mesh slice.
    pub index: usize,
    /// Estimated penetration depth, m.
    pub penetration: f64,
    /// Unit axis of least penetration.
    pub axis: Vec3,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub hits: Vec<CollisionHit>,
}

impl CollisionReport {
    pub fn is_clear(&self) -> bool {
        self.hits.is_empty()
    }
}

pub fn check_collision(candidate: &PosedMesh, scene: &[PosedMesh], tol: f64) -> CollisionReport {
    let cand = Parts::new(candidate);
    let mut hits = Vec::new();
    for (index, other) in scene.iter().enumerate() {
        if !deep_overlap(&cand.aabb, &other.world_aabb(), tol) {
            continue;
        }
        let parts = Parts::new(other);
        if let Some((penetration, axis)) = penetration(&cand, &parts, tol) {
            hits.push(CollisionHit {
                index,
                penetration,
                axis,
            });
        }
    }
    CollisionReport { hits }
}

/// Penetration depth and axis between two posed meshes if it exceeds `tol`.
pub fn mesh_penetration(a: &PosedMesh, b: &PosedMesh, tol: f64) -> Option<(f64, Vec3)> {
    let pa = Parts::new(a);
    let pb = Parts::new(b);
    if !deep_overlap(&pa.aabb, &pb.aabb, tol) {
        return None;
    }
    penetration(&pa, &pb, tol)
}

/// All colliding pairs `(i, j, depth, axis)` with `i < j` among `meshes`,
/// in index order.
pub fn pairwise_collisions(meshes: &[PosedMesh], tol: f64) -> Vec<(usize, usize, f64, Vec3)> {
    let parts: Vec<Parts> = meshes.iter().map(Parts::new).collect();
    let mut out = Vec::new();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            if !deep_overlap(&parts[i].aabb, &parts[j].aabb, tol) {
                continue;
            }
            if let Some((depth, axis)) = penetration(&parts[i], &parts[j], tol) {
                out.push((i, j, depth, axis));
            }
        }
    }
    out
}

fn deep_overlap(a: &Aabb, b: &Aabb, tol: f64) -> bool {
    let o = a.overlap(b);
    o.x > tol && o.y > tol && o.z > tol
}

fn penetration(a: &Parts, b: &Parts, tol: f64) -> Option<(f64, Vec3)> {
    let mut worst: Option<(f64, Vec3)> = None;
    for ca in &a.components {
        for cb in &b.components {
            if !deep_overlap(&ca.aabb, &cb.aabb, tol) || !in_contact(ca, cb) {
                continue;
            }
            let (depth, axis) = sat_depth(ca, cb);
            if depth > tol && worst.is_none_or(|(d, _)| depth > d) {
                worst = Some((depth, axis));
            }
        }
    }
    worst
}

struct Component {
    vertices: Vec<Vec3>,
    triangles: Vec<[Vec3; 3]>,
    aabb: Aabb,
    face_axes: Vec<Vec3>,
    edge_dirs: Vec<Vec3>,
    closed: bool,
}

struct Parts {
    aabb: Aabb,
    components: Vec<Component>,
}

impl Parts {
    fn new(posed: &PosedMesh) -> Parts {
        let world = posed.world_vertices();
        let mesh = &posed.mesh;
        let components = mesh
            .components()
            .into_iter()
            .map(|tris| {
                let mut used: Vec<u32> = tris
                    .iter()
                    .flat_map(|&t| mesh.triangles()[t as usize])
                    .collect();
                used.sort_unstable();
                used.dedup();
                let vertices: Vec<Vec3> = used.iter().map(|&i| world[i as usize]).collect();
                let triangles: Vec<[Vec3; 3]> = tris
                    .iter()
                    .map(|&t| mesh.triangles()[t as usize].map(|i| world[i as usize]))
                    .collect();
                let mut edges: Vec<(u32, u32)> = tris
                    .iter()
                    .flat_map(|&t| {
                        let [a, b, c] = mesh.triangles()[t as usize];
                        [(a.min(b), a.max(b)), (b.min(c), b.max(c)), (c.min(a), c.max(a))]
                    })
                    .collect();
                edges.sort_unstable();
                let closed = edges.chunk_by(|x, y| x == y).all(|run| run.len() == 2);
                let (face_axes, edge_dirs) = candidate_axes(&triangles);
                Component {
                    aabb: Aabb::from_points(&vertices),
                    vertices,
                    triangles,
                    face_axes,
                    edge_dirs,
                    closed,
                }
            })
            .collect();
        Parts {
            aabb: Aabb::from_points(&world),
            components,
        }
    }
}

fn push_unique(axes: &mut Vec<Vec3>, v: Vec3) {
    let len = v.norm();
    if len < 1e-12 {
        return;
    }
    let mut u = v / len;
    // Canonical sign so n and -n collapse.
    let lead = if u.x.abs() > 1e-12 { u.x } else if u.y.abs() > 1e-12 { u.y } else { u.z };
    if lead < 0.0 {
        u = -u;
    }
    if !axes.iter().any(|a| (a - u).norm() < 1e-9) {
        axes.push(u);
    }
}

/// Face-normal axes (world axes first) and edge directions.
fn candidate_axes(triangles: &[[Vec3; 3]]) -> (Vec<Vec3>, Vec<Vec3>) {
    let mut faces = vec![Vec3::x(), Vec3::y(), Vec3::z()];
    let mut edges = Vec::new();
    for t in triangles {
        push_unique(&mut faces, (t[1] - t[0]).cross(&(t[2] - t[0])));
        if triangles.len() <= EDGE_AXIS_LIMIT {
            for k in 0..3 {
                push_unique(&mut edges, t[(k + 1) % 3] - t[k]);
            }
        }
    }
    (faces, edges)
}

fn interval(points: &[Vec3], axis: &Vec3) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.dot(axis);
        (lo.min(d), hi.max(d))
    })
}

/// Smallest separating translation over the candidate axes of both
/// components.
fn sat_depth(a: &Component, b: &Component) -> (f64, Vec3) {
    let mut best = (f64::INFINITY, Vec3::x());
    let mut test = |axis: Vec3| {
        let (alo, ahi) = interval(&a.vertices, &axis);
        let (blo, bhi) = interval(&b.vertices, &axis);
        // Distance either component must travel along the axis to separate.
        let overlap = (ahi - blo).min(bhi - alo);
        if overlap < best.0 {
            best = (overlap, axis);
        }
    };
    a.face_axes.iter().chain(&b.face_axes).for_each(|&ax| test(ax));
    for u in &a.edge_dirs {
        for v in &b.edge_dirs {
            let c = u.cross(v);
            let len = c.norm();
            if len > 1e-9 {
                test(c / len);
            }
        }
    }
    (best.0.max(0.0), best.1)
}

fn in_contact(a: &Component, b: &Component) -> bool {
    for ta in &a.triangles {
        let ba = Aabb::from_points(ta);
        if !overlaps_closed(&ba, &b.aabb) {
            continue;
        }
        for tb in &b.triangles {
            if overlaps_closed(&ba, &Aabb::from_points(tb)) && triangles_intersect(ta, tb) {
                return true;
            }
        }
    }
    (b.closed && point_inside_closed(&a.vertices[0], b))
        || (a.closed && point_inside_closed(&b.vertices[0], a))
}

fn overlaps_closed(a: &Aabb, b: &Aabb) -> bool {
    let o = a.overlap(b);
    o.x >= -PLANE_EPS && o.y >= -PLANE_EPS && o.z >= -PLANE_EPS
}

fn point_inside_closed(p: &Vec3, c: &Component) -> bool {
    if !c.aabb.contains_point(p) {
        return false;
    }
    // Direction chosen to avoid grazing axis-aligned edges.
    let ray = Ray {
        origin: *p,
        direction: Vec3::new(0.5773, 0.5774, 0.5772).normalize(),
    };
    let crossings = c
        .triangles
        .iter()
        .filter(|t| intersect_triangle(&ray, t, f64::INFINITY).is_some())
        .count();
    crossings % 2 == 1
}

/// Triangle/triangle intersection (Möller's interval test, with a 2D
/// fallback for coplanar pairs). Touching counts as intersecting.
pub fn triangles_intersect(a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    let Some((nb, db)) = plane_distances(b, a) else {
        return false;
    };
    if same_side(&db) {
        return false;
    }
    let Some((na, da)) = plane_distances(a, b) else {
        return false;
    };
    if same_side(&da) {
        return false;
    }
    if db.iter().all(|&d| d == 0.0) {
        return coplanar_intersect(a, b, &na);
    }
    let dir = na.cross(&nb);
    let axis = dir.iamax();
    let pa = a.map(|v| v[axis]);
    let pb = b.map(|v| v[axis]);
    let (Some(ia), Some(ib)) = (line_interval(&pa, &db), line_interval(&pb, &da)) else {
        return coplanar_intersect(a, b, &na);
    };
    ia.0.max(ib.0) <= ia.1.min(ib.1) + PLANE_EPS
}

/// Unit normal of `plane` and signed distances of `points` to it.
fn plane_distances(plane: &[Vec3; 3], points: &[Vec3; 3]) -> Option<(Vec3, [f64; 3])> {
    let n = (plane[1] - plane[0]).cross(&(plane[2] - plane[0]));
    let len = n.norm();
    if len == 0.0 {
        return None;
    }
    let n = n / len;
    let d = points.map(|p| {
        let d = n.dot(&(p - plane[0]));
        if d.abs() < PLANE_EPS {
            0.0
        } else {
            d
        }
    });
    Some((n, d))
}

fn same_side(d: &[f64; 3]) -> bool {
    (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0)
}

/// Interval where the triangle crosses the other triangle's plane,
/// measured along the intersection line (projected on one axis).
fn line_interval(p: &[f64; 3], d: &[f64; 3]) -> Option<(f64, f64)> {
    let (k, i, j) = if d[0] * d[1] > 0.0 {
        (2, 0, 1)
    } else if d[0] * d[2] > 0.0 {
        (1, 0, 2)
    } else if d[1] * d[2] > 0.0 || d[0] != 0.0 {
        (0, 1, 2)
    } else if d[1] != 0.0 {
        (1, 0, 2)
    } else if d[2] != 0.0 {
        (2, 0, 1)
    } else {
        return None;
    };
    let at = |o: usize| {
        if d[k] == d[o] {
            p[k]
        } else {
            p[k] + (p[o] - p[k]) * d[k] / (d[k] - d[o])
        }
    };
    let (t0, t1) = (at(i), at(j));
    Some((t0.min(t1), t0.max(t1)))
}

fn coplanar_intersect(a: &[Vec3; 3], b: &[Vec3; 3], n: &Vec3) -> bool {
    let drop = n.iamax();
    let (u, v) = match drop {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let a2 = a.map(|p| Vec2::new(p[u], p[v]));
    let b2 = b.map(|p| Vec2::new(p[u], p[v]));
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect(a2[i], a2[(i + 1) % 3], b2[j], b2[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle(a2[0], &b2) || point_in_triangle(b2[0], &a2)
}

fn point_in_triangle(p: Vec2, t: &[Vec2; 3]) -> bool {
    let s = |a: Vec2, b: Vec2| (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    let (d0, d1, d2) = (s(t[0], t[1]), s(t[1], t[2]), s(t[2], t[0]));
    let neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
    let pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
    !(neg && pos)
}
