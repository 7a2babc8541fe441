//! Procedural room shells from a layout description: floor, ceiling,
//! walls with openings cut out, and door/window fixtures.

mod build;
mod fixtures;
mod validate;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;

pub use build::{build_room, wall_frame, WallFrame};
pub use validate::{validate_layout, Violation};

/// Door frame depth (m), measured from the wall plane into the room.
pub const FRAME_DEPTH: f64 = 0.05;
/// Fold angle of each folding-door leaf.
pub const FOLD_ANGLE_DEG: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpeningKind {
    SingleDoor,
    DoubleDoor,
    SlidingDoor,
    FoldingDoor,
    Window,
}

impl OpeningKind {
    pub fn is_door(self) -> bool {
        self != OpeningKind::Window
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OpeningKind::SingleDoor => "single_door",
            OpeningKind::DoubleDoor => "double_door",
            OpeningKind::SlidingDoor => "sliding_door",
            OpeningKind::FoldingDoor => "folding_door",
            OpeningKind::Window => "window",
        }
    }
}

impl fmt::Display for OpeningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureMaterials {
    pub frame: String,
    pub panel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knob: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Opening {
    /// Edge `wall_index -> wall_index + 1` of the floor polygon.
    pub wall_index: usize,
    /// Distance (m) along the wall from its first vertex.
    pub offset: f64,
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub sill: f64,
    pub kind: OpeningKind,
    pub materials: FixtureMaterials,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomMaterials {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floors: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walls: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceilings: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomLayoutSpec {
    /// Counterclockwise, meters.
    pub floor_polygon: Vec<[f64; 2]>,
    pub wall_height: f64,
    #[serde(default)]
    pub openings: Vec<Opening>,
    #[serde(default)]
    pub materials: RoomMaterials,
}

impl RoomLayoutSpec {
    pub fn rectangle(width: f64, depth: f64, wall_height: f64) -> Self {
        Self {
            floor_polygon: vec![[0.0, 0.0], [width, 0.0], [width, depth], [0.0, depth]],
            wall_height,
            openings: Vec::new(),
            materials: RoomMaterials::default(),
        }
    }

    pub fn ring(&self) -> Vec<Vec2> {
        self.floor_polygon.iter().map(|p| Vec2::new(p[0], p[1])).collect()
    }

    /// Length (m) of wall `i`.
    pub fn wall_length(&self, i: usize) -> f64 {
        let ring = self.ring();
        (ring[(i + 1) % ring.len()] - ring[i]).norm()
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.floor_polygon.len()).map(|i| self.wall_length(i)).sum()
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, RoomError> {
        serde_json::from_slice(bytes).map_err(|e| RoomError::Json(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RoomError> {
        let bytes = std::fs::read(path.as_ref()).map_err(|e| RoomError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&bytes)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoomError {
    #[error("cannot read layout: {0}")]
    Io(String),
    #[error("malformed layout JSON: {0}")]
    Json(String),
    #[error("invalid layout: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}
