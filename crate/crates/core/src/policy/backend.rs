use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{TriangleMesh, Vec3};
use crate::index::AssetRecord;
use crate::scene::Scene;
use crate::view::{Camera, Maps, ViewSet};

use super::library::InContextEntry;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BackendError {
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    #[error("backend returned status {0}")]
    Status(u16),
    #[error("malformed backend response: {0}")]
    Protocol(String),
    #[error("{0}")]
    Other(String),
}

/// Everything a scene-level policy sees for one candidate.
#[derive(Clone, Copy, Debug)]
pub struct ActRequest<'a> {
    pub prompt: &'a str,
    pub step: usize,
    pub sample_index: usize,
    /// Candidates drawn per step.
    pub candidates: usize,
    pub views: &'a ViewSet,
    pub scene_summary: &'a str,
    pub in_context: &'a [&'a InContextEntry],
}

/// Scene-level policy: proposes an action program as text.
pub trait PolicyBackend: Sync {
    fn act(&self, request: &ActRequest) -> Result<String, BackendError>;
}

/// Alignment score of a scene against a prompt, in `[0, 1]`.
pub trait Scorer: Sync {
    fn score(&self, scene: &Scene, prompt: &str) -> Result<f64, BackendError>;
}

/// What a placement policy sees in one round of the asset loop.
#[derive(Clone, Copy, Debug)]
pub struct PlaceRequest<'a> {
    pub prompt: &'a str,
    pub attempt: usize,
    pub receptacle_summary: &'a str,
    pub camera: &'a Camera,
    pub maps: &'a Maps,
}

/// `(p'_k, o'_k)`: what to place and where in the round's image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementAction {
    pub description: String,
    pub pixel: [f64; 2],
}

/// Asset-level policy, queried for the object first and its pixel second.
pub trait PlacementPolicy: Sync {
    fn describe(&self, request: &PlaceRequest) -> Result<String, BackendError>;
    fn locate(&self, request: &PlaceRequest, description: &str) -> Result<[f64; 2], BackendError>;
}

/// Decides whether an asset can host smaller items.
pub trait ReceptacleGate {
    fn is_receptacle(&self, asset: &AssetRecord, mesh: &TriangleMesh) -> bool;
}

/// Cycles through fixed program blocks: candidate `i` at step `t` gets
/// block `(t * N + i) mod len`.
#[derive(Clone, Debug, Default)]
pub struct ScriptedPolicy {
    pub blocks: Vec<String>,
}

impl ScriptedPolicy {
    pub fn new(blocks: Vec<String>) -> Self {
        Self { blocks }
    }

    /// Blocks separated by lines consisting of `---`.
    pub fn parse(text: &str) -> Self {
        let mut blocks = vec![String::new()];
        for line in text.lines() {
            if line.trim() == "---" {
                blocks.push(String::new());
            } else {
                let b = blocks.last_mut().expect("non-empty");
                b.push_str(line);
                b.push('\n');
            }
        }
        blocks.retain(|b| !b.trim().is_empty());
        Self { blocks }
    }
}

impl PolicyBackend for ScriptedPolicy {
    fn act(&self, request: &ActRequest) -> Result<String, BackendError> {
        if self.blocks.is_empty() {
            return Err(BackendError::Other("scripted policy has no blocks".into()));
        }
        let k = (request.step * request.candidates + request.sample_index) % self.blocks.len();
        Ok(self.blocks[k].clone())
    }
}

/// Where a scripted placement answer points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Pixel([f64; 2]),
    /// World point, projected through the round's camera.
    World([f64; 3]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptedAnswer {
    pub description: String,
    pub target: Target,
}

/// Answers round `k` with entry `k mod len`.
#[derive(Clone, Debug, Default)]
pub struct ScriptedPlacement {
    pub answers: Vec<ScriptedAnswer>,
}

impl ScriptedPlacement {
    pub fn new(answers: Vec<ScriptedAnswer>) -> Self {
        Self { answers }
    }

    pub fn world(description: &str, targets: &[Vec3]) -> Self {
        Self::new(
            targets
                .iter()
                .map(|t| ScriptedAnswer {
                    description: description.into(),
                    target: Target::World([t.x, t.y, t.z]),
                })
                .collect(),
        )
    }

    fn answer(&self, attempt: usize) -> Result<&ScriptedAnswer, BackendError> {
        if self.answers.is_empty() {
            return Err(BackendError::Other("scripted placement has no answers".into()));
        }
        Ok(&self.answers[attempt % self.answers.len()])
    }
}

impl PlacementPolicy for ScriptedPlacement {
    fn describe(&self, request: &PlaceRequest) -> Result<String, BackendError> {
        Ok(self.answer(request.attempt)?.description.clone())
    }

    fn locate(&self, request: &PlaceRequest, _description: &str) -> Result<[f64; 2], BackendError> {
        match &self.answer(request.attempt)?.target {
            Target::Pixel(p) => Ok(*p),
            Target::World(w) => request
                .camera
                .project(&Vec3::new(w[0], w[1], w[2]))
                .map(|(u, v)| [u, v])
                .ok_or_else(|| BackendError::Other("target behind camera".into())),
        }
    }
}
