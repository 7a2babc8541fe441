//! Procedural meshes used for synthetic assets, fixtures and tests.
//!
//! Every closed shape here is assembled from separately indexed convex
//! parts, which is what the collision narrow phase expects.

use super::{TriangleMesh, Vec3};

/// Closed box spanning `min..max`, outward-facing, 8 shared vertices.
pub fn axis_box(min: Vec3, max: Vec3) -> TriangleMesh {
    let c = Vec3::new(
        (min.x + max.x) * 0.5,
        (min.y + max.y) * 0.5,
        (min.z + max.z) * 0.5,
    );
    let h = (max - min) * 0.5;
    oriented_box(c, [Vec3::x() * h.x, Vec3::y() * h.y, Vec3::z() * h.z])
}

/// Closed box centered at `center` whose half-edges are the three
/// (mutually orthogonal, right-handed) vectors in `half_axes`.
pub fn oriented_box(center: Vec3, half_axes: [Vec3; 3]) -> TriangleMesh {
    let [u, v, w] = half_axes;
    let vertices = (0..8)
        .map(|i| {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            center + u * sx + v * sy + w * sz
        })
        .collect();
    // Corner bits: 1 = +u, 2 = +v, 4 = +w. Winding is CCW seen from outside.
    let triangles = vec![
        [0, 2, 3], [0, 3, 1], // -w
        [4, 5, 7], [4, 7, 6], // +w
        [0, 1, 5], [0, 5, 4], // -v
        [2, 6, 7], [2, 7, 3], // +v
        [0, 4, 6], [0, 6, 2], // -u
        [1, 3, 7], [1, 7, 5], // +u
    ];
    TriangleMesh::new_unchecked(vertices, triangles)
}

/// Box of the given half extents with its bottom face centered on the origin.
pub fn footprint_box(half_extents: Vec3) -> TriangleMesh {
    axis_box(
        Vec3::new(-half_extents.x, -half_extents.y, 0.0),
        Vec3::new(half_extents.x, half_extents.y, 2.0 * half_extents.z),
    )
}

/// Four-legged table, bottom at z = 0, centered in xy.
///
/// Legs are `leg` wide and end under the top slab; keep `leg` below 5 cm so
/// the hidden leg caps stay under the default minimum surface area.
pub fn table(width: f64, depth: f64, height: f64, top_thickness: f64, leg: f64) -> TriangleMesh {
    let (hw, hd) = (width * 0.5, depth * 0.5);
    let top_z = height - top_thickness;
    let mut parts = vec![axis_box(
        Vec3::new(-hw, -hd, top_z),
        Vec3::new(hw, hd, height),
    )];
    let inset = leg;
    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
        let cx = sx * (hw - inset);
        let cy = sy * (hd - inset);
        parts.push(axis_box(
            Vec3::new(cx - leg * 0.5, cy - leg * 0.5, 0.0),
            Vec3::new(cx + leg * 0.5, cy + leg * 0.5, top_z),
        ));
    }
    TriangleMesh::merge(&parts)
}

/// Open shelf unit: horizontal boards whose top faces sit at
/// `board_tops`, carried by thin corner posts between consecutive boards.
pub fn bookcase(width: f64, depth: f64, board_tops: &[f64], thickness: f64) -> TriangleMesh {
    let (hw, hd) = (width * 0.5, depth * 0.5);
    let post = 0.02_f64.min(width * 0.1).min(depth * 0.1);
    let mut parts = Vec::new();
    let mut floor = 0.0;
    for &top in board_tops {
        let bottom = top - thickness;
        if bottom > floor {
            for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                let cx = sx * (hw - post * 0.5);
                let cy = sy * (hd - post * 0.5);
                parts.push(axis_box(
                    Vec3::new(cx - post * 0.5, cy - post * 0.5, floor),
                    Vec3::new(cx + post * 0.5, cy + post * 0.5, bottom),
                ));
            }
        }
        parts.push(axis_box(Vec3::new(-hw, -hd, bottom), Vec3::new(hw, hd, top)));
        floor = top;
    }
    TriangleMesh::merge(&parts)
}

/// UV sphere with `rings` latitude bands and `segments` longitude slices.
pub fn uv_sphere(center: Vec3, radius: f64, rings: u32, segments: u32) -> TriangleMesh {
    let rings = rings.max(2);
    let segments = segments.max(3);
    let mut vertices = vec![center + Vec3::z() * radius];
    for r in 1..rings {
        let polar = std::f64::consts::PI * r as f64 / rings as f64;
        for s in 0..segments {
            let az = std::f64::consts::TAU * s as f64 / segments as f64;
            vertices.push(
                center
                    + Vec3::new(polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()) * radius,
            );
        }
    }
    let south = vertices.len() as u32;
    vertices.push(center - Vec3::z() * radius);
    let ring = |r: u32, s: u32| 1 + (r - 1) * segments + (s % segments);
    let mut triangles = Vec::new();
    for s in 0..segments {
        triangles.push([0, ring(1, s), ring(1, s + 1)]);
    }
    for r in 1..rings - 1 {
        for s in 0..segments {
            let (a, b) = (ring(r, s), ring(r, s + 1));
            let (c, d) = (ring(r + 1, s), ring(r + 1, s + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    for s in 0..segments {
        triangles.push([south, ring(rings - 1, s + 1), ring(rings - 1, s)]);
    }
    TriangleMesh::new_unchecked(vertices, triangles)
}

/// Rotates a mesh about the x axis through the origin.
pub fn rotate_x(mesh: &TriangleMesh, angle: f64) -> TriangleMesh {
    let (s, c) = angle.sin_cos();
    let vertices = mesh
        .vertices()
        .iter()
        .map(|v| Vec3::new(v.x, c * v.y - s * v.z, s * v.y + c * v.z))
        .collect();
    TriangleMesh::new_unchecked(vertices, mesh.triangles().to_vec())
}

/// Translates a mesh.
pub fn translate(mesh: &TriangleMesh, offset: Vec3) -> TriangleMesh {
    let vertices = mesh.vertices().iter().map(|v| v + offset).collect();
    TriangleMesh::new_unchecked(vertices, mesh.triangles().to_vec())
}
