//! The two decision loops and their pluggable backends.
//!
//! The scene loop asks a [`PolicyBackend`] for whole-scene edit programs,
//! scores the results with a [`Scorer`] and keeps the best one when it does
//! not lower the score. The asset loop asks a [`PlacementPolicy`] what to
//! put on a receptacle and where, one ray-cast pixel at a time.

mod asset_loop;
mod backend;
mod library;
pub mod remote;
mod scene_loop;
mod scorer;
mod trajectory;

use thiserror::Error;

use crate::scene::SceneError;
use crate::view::ViewError;

pub use asset_loop::{
    hemisphere_camera, is_receptacle, run_asset_loop, AssetLoopConfig, AssetRun, GeometricGate, PlacementRound,
    RoundOutcome,
};
pub use backend::{
    ActRequest, BackendError, PlaceRequest, PlacementAction, PlacementPolicy, PolicyBackend, ReceptacleGate,
    ScriptedAnswer, ScriptedPlacement, ScriptedPolicy, Scorer, Target,
};
pub use library::{collect_selfimprovement, AdmissionRule, FinetuneRecord, Improvement, InContextEntry, Library};
pub use scene_loop::{candidate_seed, sample_examples, SceneLoop, SceneLoopConfig, SceneRun};
pub use scorer::{scene_summary, LexicalScorer};
pub use trajectory::{scene_path, step_dir, view_paths, Candidate, CandidateStatus, Step, Trajectory};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    View(#[from] ViewError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("{0} is not a receptacle")]
    NotReceptacle(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}
