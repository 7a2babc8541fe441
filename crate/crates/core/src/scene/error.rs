use thiserror::Error;

use crate::geometry::MeshError;

/// Scene validation and serialization errors. Each variant names the
/// offending JSON path, e.g. `lights/L1` or `elements/chair_1/placements/0`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("malformed scene JSON: {0}")]
    Json(String),
    #[error("unknown category {value:?} at {path}")]
    UnknownCategory { path: String, value: String },
    #[error("unknown light kind {value:?} at {path}")]
    UnknownLightKind { path: String, value: String },
    #[error("non-positive scale at {path}")]
    NonPositiveScale { path: String },
    #[error("color channel out of range at {path}")]
    ColorOutOfRange { path: String },
    #[error("duplicate id at {path}")]
    DuplicateId { path: String },
    #[error("non-finite number at {path}")]
    NonFinite { path: String },
    #[error("invalid value at {path}: {message}")]
    Invalid { path: String, message: String },
    #[error("invalid mesh at {path}: {source}")]
    Mesh { path: String, source: MeshError },
    #[error("cannot resolve mesh for element {element}")]
    UnresolvedMesh { element: String },
    #[error("unknown element {0}")]
    UnknownElement(String),
}

impl SceneError {
    /// The JSON path the error refers to, when it has one.
    pub fn path(&self) -> Option<&str> {
        match self {
            SceneError::UnknownCategory { path, .. }
            | SceneError::UnknownLightKind { path, .. }
            | SceneError::NonPositiveScale { path }
            | SceneError::ColorOutOfRange { path }
            | SceneError::DuplicateId { path }
            | SceneError::NonFinite { path }
            | SceneError::Invalid { path, .. }
            | SceneError::Mesh { path, .. } => Some(path),
            _ => None,
        }
    }
}
