use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::text::{Scored, TextIndex};
use crate::geometry::{MeshError, TriangleMesh, Vec3};
use crate::scene::MeshResolver;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("duplicate id {id:?} at lines {first} and {second}")]
    DuplicateId { id: String, first: usize, second: usize },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("line {line}: mesh file {path} not found")]
    MissingMesh { line: usize, path: PathBuf },
    #[error("line {line}: mesh {path}: {source}")]
    Mesh { line: usize, path: PathBuf, source: MeshError },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetRecord {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    /// Relative to the manifest's directory.
    pub mesh_path: PathBuf,
    /// Half sizes (m) of the axis-aligned box in canonical pose.
    pub half_extents: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receptacle_hint: Option<bool>,
}

impl AssetRecord {
    fn text(&self) -> String {
        let mut s = self.description.clone();
        for t in &self.tags {
            s.push(' ');
            s.push_str(t);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialRecord {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

/// Ranked `(id, score)` list.
pub type RetrievalResult = Vec<Scored>;

fn read(path: &Path) -> Result<String, IndexError> {
    fs::read_to_string(path).map_err(|e| IndexError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Parses JSONL records, skipping blank lines. Yields `(line, record)`
/// with 1-based line numbers and rejects duplicate ids.
fn parse_lines<T: for<'de> Deserialize<'de>>(
    text: &str,
    id: impl Fn(&T) -> &str,
) -> Result<Vec<(usize, T)>, IndexError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(raw).map_err(|e| IndexError::Json {
            line,
            message: e.to_string(),
        })?;
        if let Some(&first) = seen.get(id(&rec)) {
            return Err(IndexError::DuplicateId {
                id: id(&rec).to_string(),
                first,
                second: line,
            });
        }
        seen.insert(id(&rec).to_string(), line);
        out.push((line, rec));
    }
    Ok(out)
}

/// Scales and shifts `mesh` so its bounding box is centered in xy, rests on
/// z = 0 and has the given half extents. Flat axes keep their size.
fn canonicalize(mesh: &TriangleMesh, half: &Vec3) -> Result<TriangleMesh, MeshError> {
    let b = mesh.aabb();
    let ext = b.extents();
    let anchor = Vec3::new(b.center().x, b.center().y, b.min.z);
    let scale = Vec3::from_fn(|i, _| if ext[i] > 0.0 { 2.0 * half[i] / ext[i] } else { 1.0 });
    let vertices = mesh
        .vertices()
        .iter()
        .map(|v| (v - anchor).component_mul(&scale))
        .collect();
    TriangleMesh::new(vertices, mesh.triangles().to_vec())
}

/// Immutable asset index: records, canonical meshes and a text index.
#[derive(Clone, Debug)]
pub struct AssetIndex {
    records: Vec<AssetRecord>,
    meshes: Vec<Arc<TriangleMesh>>,
    by_id: HashMap<String, usize>,
    text: TextIndex,
}

impl AssetIndex {
    /// Builds an index from records paired with their source meshes. Each
    /// mesh is rescaled to the record's half extents, bottom-centered.
    pub fn new(entries: Vec<(AssetRecord, TriangleMesh)>) -> Result<AssetIndex, IndexError> {
        let mut records = Vec::new();
        let mut meshes = Vec::new();
        let mut by_id = HashMap::new();
        for (i, (rec, mesh)) in entries.into_iter().enumerate() {
            let line = i + 1;
            if let Some(&first) = by_id.get(&rec.id) {
                return Err(IndexError::DuplicateId {
                    id: rec.id,
                    first: first + 1,
                    second: line,
                });
            }
            let mesh = Self::prepare(&rec, &mesh, line)?;
            by_id.insert(rec.id.clone(), i);
            records.push(rec);
            meshes.push(Arc::new(mesh));
        }
        let text = TextIndex::new(records.iter().map(|r| (r.id.clone(), r.text())));
        Ok(AssetIndex {
            records,
            meshes,
            by_id,
            text,
        })
    }

    fn prepare(rec: &AssetRecord, mesh: &TriangleMesh, line: usize) -> Result<TriangleMesh, IndexError> {
        let invalid = |message: &str| IndexError::Invalid {
            line,
            message: format!("{}: {message}", rec.id),
        };
        if rec.description.trim().is_empty() {
            return Err(invalid("empty description"));
        }
        if !rec.half_extents.iter().all(|&h| h.is_finite() && h > 0.0) {
            return Err(invalid("half_extents must be positive"));
        }
        if mesh.is_empty() {
            return Err(invalid("mesh has no triangles"));
        }
        canonicalize(mesh, &Vec3::from(rec.half_extents)).map_err(|source| IndexError::Mesh {
            line,
            path: rec.mesh_path.clone(),
            source,
        })
    }

    /// Loads a JSONL asset manifest. Mesh paths resolve against the
    /// manifest's directory; each OBJ file is parsed once.
    pub fn load(path: impl AsRef<Path>) -> Result<AssetIndex, IndexError> {
        let path = path.as_ref();
        let root = path.parent().unwrap_or(Path::new("."));
        let rows = parse_lines::<AssetRecord>(&read(path)?, |r| &r.id)?;
        let mut cache: HashMap<PathBuf, TriangleMesh> = HashMap::new();
        let mut records = Vec::new();
        let mut meshes = Vec::new();
        let mut by_id = HashMap::new();
        for (line, rec) in rows {
            let file = root.join(&rec.mesh_path);
            if !cache.contains_key(&file) {
                if !file.is_file() {
                    return Err(IndexError::MissingMesh { line, path: file });
                }
                let mesh = TriangleMesh::from_obj(&read(&file)?).map_err(|source| IndexError::Mesh {
                    line,
                    path: file.clone(),
                    source,
                })?;
                cache.insert(file.clone(), mesh);
            }
            let mesh = Self::prepare(&rec, &cache[&file], line)?;
            by_id.insert(rec.id.clone(), records.len());
            records.push(rec);
            meshes.push(Arc::new(mesh));
        }
        let text = TextIndex::new(records.iter().map(|r| (r.id.clone(), r.text())));
        Ok(AssetIndex {
            records,
            meshes,
            by_id,
            text,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[AssetRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&AssetRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    /// Canonical mesh: bottom-centered at the origin, sized to the record.
    pub fn mesh(&self, id: &str) -> Option<Arc<TriangleMesh>> {
        self.by_id.get(id).map(|&i| self.meshes[i].clone())
    }

    pub fn text_index(&self) -> &TextIndex {
        &self.text
    }

    pub fn retrieve(&self, query: &str, top_k: usize) -> RetrievalResult {
        self.text.retrieve(query, top_k)
    }
}

impl MeshResolver for AssetIndex {
    fn asset_mesh(&self, asset_ref: &str) -> Option<Arc<TriangleMesh>> {
        self.mesh(asset_ref)
    }
}

#[derive(Clone, Debug, Default)]
pub struct MaterialIndex {
    records: Vec<MaterialRecord>,
    by_id: HashMap<String, usize>,
    text: TextIndex,
}

impl MaterialIndex {
    pub fn new(records: Vec<MaterialRecord>) -> Result<MaterialIndex, IndexError> {
        let mut by_id = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            if r.description.trim().is_empty() {
                return Err(IndexError::Invalid {
                    line: i + 1,
                    message: format!("{}: empty description", r.id),
                });
            }
            if let Some(first) = by_id.insert(r.id.clone(), i) {
                return Err(IndexError::DuplicateId {
                    id: r.id.clone(),
                    first: first + 1,
                    second: i + 1,
                });
            }
        }
        let text = TextIndex::new(records.iter().map(|r| {
            let mut s = r.description.clone();
            for t in &r.tags {
                s.push(' ');
                s.push_str(t);
            }
            (r.id.clone(), s)
        }));
        Ok(MaterialIndex { records, by_id, text })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MaterialIndex, IndexError> {
        let rows = parse_lines::<MaterialRecord>(&read(path.as_ref())?, |r| &r.id)?;
        let records: Vec<MaterialRecord> = rows.into_iter().map(|(_, r)| r).collect();
        MaterialIndex::new(records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[MaterialRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&MaterialRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    pub fn retrieve(&self, query: &str, top_k: usize) -> RetrievalResult {
        self.text.retrieve(query, top_k)
    }
}
