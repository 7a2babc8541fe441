use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Aabb, Transform, Vec3};

/// Triangles with a smaller area than this (m²) are rejected at load.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("triangle {triangle} references vertex {index}, but the mesh has {count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        count: usize,
    },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("triangle {triangle} is degenerate (area {area:e} m²)")]
    Degenerate { triangle: usize, area: f64 },
    #[error("obj line {line}: {message}")]
    Obj { line: usize, message: String },
}

/// An indexed triangle mesh with cached unit normals and areas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMesh", into = "RawMesh")]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[u32; 3]>,
}

impl TryFrom<RawMesh> for TriangleMesh {
    type Error = MeshError;

    fn try_from(raw: RawMesh) -> Result<Self, Self::Error> {
        TriangleMesh::new(
            raw.vertices.into_iter().map(Vec3::from).collect(),
            raw.triangles,
        )
    }
}

impl From<TriangleMesh> for RawMesh {
    fn from(mesh: TriangleMesh) -> Self {
        RawMesh {
            vertices: mesh.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            triangles: mesh.triangles,
        }
    }
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(MeshError::NonFinite(i));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange {
                    triangle: t,
                    index,
                    count: vertices.len(),
                });
            }
        }
        let mesh = Self::new_unchecked(vertices, triangles);
        if let Some((t, &area)) = mesh
            .areas
            .iter()
            .enumerate()
            .find(|(_, &a)| a < DEGENERATE_AREA)
        {
            return Err(MeshError::Degenerate { triangle: t, area });
        }
        Ok(mesh)
    }

    /// Builds the derived data without validating. Used for transformed
    /// copies of already valid meshes.
    pub(crate) fn new_unchecked(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        let mut normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let [a, b, c] = tri.map(|i| vertices[i as usize]);
            let cross = (b - a).cross(&(c - a));
            let len = cross.norm();
            areas.push(0.5 * len);
            normals.push(if len > 0.0 { cross / len } else { Vec3::zeros() });
        }
        Self {
            vertices,
            triangles,
            normals,
            areas,
        }
    }

    pub fn empty() -> Self {
        Self::new_unchecked(Vec::new(), Vec::new())
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn normal(&self, t: usize) -> Vec3 {
        self.normals[t]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    pub fn transformed(&self, transform: &Transform) -> TriangleMesh {
        let vertices = self.vertices.iter().map(|v| transform.apply(v)).collect();
        Self::new_unchecked(vertices, self.triangles.clone())
    }

    /// Same triangles, winding reversed (normals flipped).
    pub fn flipped(&self) -> TriangleMesh {
        let triangles = self.triangles.iter().map(|&[a, b, c]| [a, c, b]).collect();
        Self::new_unchecked(self.vertices.clone(), triangles)
    }

    /// Concatenates meshes; vertex indices of later meshes are offset.
    pub fn merge<'a>(meshes: impl IntoIterator<Item = &'a TriangleMesh>) -> TriangleMesh {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in meshes {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
        }
        Self::new_unchecked(vertices, triangles)
    }

    /// Groups triangles that are connected through shared vertex indices.
    /// Components are returned in order of their lowest triangle id.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &[a, b, c] in &self.triangles {
            for (p, q) in [(a, b), (b, c)] {
                let (rp, rq) = (find(&mut parent, p as usize), find(&mut parent, q as usize));
                if rp != rq {
                    parent[rp.max(rq)] = rp.min(rq);
                }
            }
        }
        let mut slot: HashMap<usize, usize> = HashMap::new();
        let mut out: Vec<Vec<u32>> = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            let root = find(&mut parent, tri[0] as usize);
            let k = *slot.entry(root).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[k].push(t as u32);
        }
        out
    }

    /// Parses the OBJ subset: `v x y z` and `f i j k ...` with 1-based
    /// indices (negative indices are relative). Polygons are fan
    /// triangulated; everything else is ignored.
    pub fn from_obj(text: &str) -> Result<TriangleMesh, MeshError> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let err = |message: String| MeshError::Obj {
                line: line_no,
                message,
            };
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("v") => {
                    let coords = parts
                        .take(3)
                        .map(|s| s.parse::<f64>().map_err(|e| err(format!("bad coordinate {s:?}: {e}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    if coords.len() != 3 {
                        return Err(err("vertex needs 3 coordinates".into()));
                    }
                    vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
                }
                Some("f") => {
                    let mut idx = Vec::new();
                    for tok in parts {
                        let head = tok.split('/').next().unwrap_or_default();
                        let i: i64 = head
                            .parse()
                            .map_err(|e| err(format!("bad face index {tok:?}: {e}")))?;
                        let resolved = match i {
                            0 => return Err(err("face index 0 is invalid".into())),
                            i if i > 0 => i - 1,
                            i => vertices.len() as i64 + i,
                        };
                        if resolved < 0 || resolved as usize >= vertices.len() {
                            return Err(err(format!("face index {i} out of range")));
                        }
                        idx.push(resolved as u32);
                    }
                    if idx.len() < 3 {
                        return Err(err("face needs at least 3 vertices".into()));
                    }
                    for k in 1..idx.len() - 1 {
                        triangles.push([idx[0], idx[k], idx[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        TriangleMesh::new(vertices, triangles)
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }
}

/// Hashable key that identifies coincident vertices up to 1 nm.
pub(crate) fn weld_key(v: &Vec3) -> [i64; 3] {
    [v.x, v.y, v.z].map(|c| (c * 1e9).round() as i64)
}
