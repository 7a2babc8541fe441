//! Placeable-surface detection.
//!
//! A surface is a cluster of near-horizontal, upward-facing triangles that
//! are connected through shared edges and lie within a narrow height band.
//! Clusters smaller than a minimum area are dropped.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::mesh::weld_key;
use super::polygon::{contains_point, segment_distance, signed_area};
use super::{TriangleMesh, Vec2, Vec3};

/// Upward normals must deviate from +z by strictly less than this.
pub const MAX_NORMAL_DEVIATION_DEG: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParams {
    /// Clusters below this area (m²) are discarded.
    pub min_area: f64,
    /// Maximum z spread (m) of the vertices in one cluster.
    pub height_tol: f64,
}

impl Default for SurfaceParams {
    fn default() -> Self {
        Self {
            min_area: 0.0025,
            height_tol: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceableSurface {
    pub triangle_ids: Vec<u32>,
    /// Mean z of the member vertices.
    pub height_z: f64,
    /// Summed triangle area, m².
    pub area: f64,
    /// Outer boundary in the xy plane, counterclockwise.
    pub boundary: Vec<Vec2>,
    /// Inner boundaries (holes), if the cluster has any.
    pub holes: Vec<Vec<Vec2>>,
}

impl PlaceableSurface {
    /// True when `xy` is inside the boundary and at least `margin` away
    /// from every boundary edge.
    pub fn contains_xy(&self, xy: Vec2, margin: f64) -> bool {
        let mut rings: Vec<&[Vec2]> = vec![&self.boundary];
        rings.extend(self.holes.iter().map(Vec::as_slice));
        if !contains_point(&rings, xy) {
            return false;
        }
        if margin <= 0.0 {
            return true;
        }
        rings.iter().all(|ring| {
            (0..ring.len()).all(|i| segment_distance(xy, ring[i], ring[(i + 1) % ring.len()]) >= margin)
        })
    }
}

pub fn detect_placeable_surfaces(mesh: &TriangleMesh, params: &SurfaceParams) -> Vec<PlaceableSurface> {
    let cos_limit = MAX_NORMAL_DEVIATION_DEG.to_radians().cos();

    // Welded vertex ids so duplicated corner vertices still connect faces.
    let mut weld: HashMap<[i64; 3], u32> = HashMap::new();
    let welded: Vec<u32> = mesh
        .vertices()
        .iter()
        .map(|v| {
            let next = weld.len() as u32;
            *weld.entry(weld_key(v)).or_insert(next)
        })
        .collect();
    let tri_ids = |t: usize| mesh.triangles()[t].map(|i| welded[i as usize]);

    let z_range = |t: usize| {
        let tri = mesh.triangle(t);
        let lo = tri.iter().map(|v| v.z).fold(f64::INFINITY, f64::min);
        let hi = tri.iter().map(|v| v.z).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };

    let candidate: Vec<bool> = (0..mesh.triangle_count())
        .map(|t| {
            let (lo, hi) = z_range(t);
            mesh.normal(t).z > cos_limit && hi - lo <= params.height_tol
        })
        .collect();

    // Undirected welded edge -> candidate triangles using it.
    let mut edge_tris: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
    for t in (0..mesh.triangle_count()).filter(|&t| candidate[t]) {
        let [a, b, c] = tri_ids(t);
        for (p, q) in [(a, b), (b, c), (c, a)] {
            edge_tris.entry((p.min(q), p.max(q))).or_default().push(t as u32);
        }
    }

    let mut assigned = vec![false; mesh.triangle_count()];
    let mut surfaces = Vec::new();
    for seed in 0..mesh.triangle_count() {
        if !candidate[seed] || assigned[seed] {
            continue;
        }
        let (mut lo, mut hi) = z_range(seed);
        let mut members = vec![seed as u32];
        assigned[seed] = true;
        let mut queue = VecDeque::from([seed]);
        while let Some(t) = queue.pop_front() {
            let [a, b, c] = tri_ids(t);
            for (p, q) in [(a, b), (b, c), (c, a)] {
                for &n in &edge_tris[&(p.min(q), p.max(q))] {
                    let n = n as usize;
                    if assigned[n] {
                        continue;
                    }
                    let (nlo, nhi) = z_range(n);
                    if hi.max(nhi) - lo.min(nlo) > params.height_tol {
                        continue;
                    }
                    lo = lo.min(nlo);
                    hi = hi.max(nhi);
                    assigned[n] = true;
                    members.push(n as u32);
                    queue.push_back(n);
                }
            }
        }
        members.sort_unstable();
        let area: f64 = members.iter().map(|&t| mesh.area(t as usize)).sum();
        if area < params.min_area {
            continue;
        }
        surfaces.push(build_surface(mesh, &welded, members, area));
    }
    surfaces.sort_by(|a, b| {
        b.area
            .total_cmp(&a.area)
            .then(b.height_z.total_cmp(&a.height_z))
            .then(a.triangle_ids[0].cmp(&b.triangle_ids[0]))
    });
    surfaces
}

fn build_surface(mesh: &TriangleMesh, welded: &[u32], members: Vec<u32>, area: f64) -> PlaceableSurface {
    let mut positions: BTreeMap<u32, Vec3> = BTreeMap::new();
    let mut edge_count: HashMap<(u32, u32), u32> = HashMap::new();
    let mut directed = Vec::new();
    for &t in &members {
        let raw = mesh.triangles()[t as usize];
        let ids = raw.map(|i| welded[i as usize]);
        for k in 0..3 {
            positions.insert(ids[k], mesh.vertices()[raw[k] as usize]);
            let (p, q) = (ids[k], ids[(k + 1) % 3]);
            *edge_count.entry((p.min(q), p.max(q))).or_default() += 1;
            directed.push((p, q));
        }
    }
    let height_z = positions.values().map(|v| v.z).sum::<f64>() / positions.len() as f64;

    // Boundary edges appear once; chain them into closed loops.
    let mut outgoing: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &(p, q) in &directed {
        if edge_count[&(p.min(q), p.max(q))] == 1 {
            outgoing.entry(p).or_default().push(q);
        }
    }
    let mut loops: Vec<Vec<Vec2>> = Vec::new();
    while let Some((&start, _)) = outgoing.iter().find(|(_, v)| !v.is_empty()) {
        let mut ring = Vec::new();
        let mut at = start;
        while let Some(next) = outgoing.get_mut(&at).and_then(Vec::pop) {
            ring.push(positions[&at].xy());
            at = next;
            if at == start {
                break;
            }
        }
        if ring.len() >= 3 {
            loops.push(ring);
        }
    }
    let outer = loops
        .iter()
        .enumerate()
        .max_by(|a, b| signed_area(a.1).abs().total_cmp(&signed_area(b.1).abs()))
        .map(|(i, _)| i);
    let (boundary, holes) = match outer {
        Some(i) => {
            let mut boundary = loops.swap_remove(i);
            if signed_area(&boundary) < 0.0 {
                boundary.reverse();
            }
            (boundary, loops)
        }
        None => (Vec::new(), Vec::new()),
    };
    PlaceableSurface {
        triangle_ids: members,
        height_z,
        area,
        boundary,
        holes,
    }
}

/// Index of the surface that supports `point`: its boundary must contain
/// the point's xy (shrunk by `xy_margin`) and its height must be within
/// `z_tol`. The smallest matching surface wins.
pub fn surface_membership(
    surfaces: &[PlaceableSurface],
    point: &Vec3,
    xy_margin: f64,
    z_tol: f64,
) -> Option<usize> {
    surfaces
        .iter()
        .enumerate()
        .filter(|(_, s)| (s.height_z - point.z).abs() <= z_tol && s.contains_xy(point.xy(), xy_margin))
        .min_by(|a, b| a.1.area.total_cmp(&b.1.area).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
}
