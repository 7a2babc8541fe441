use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::trajectory::Trajectory;
use super::PolicyError;

/// A (prompt, program) pair whose execution improved the score enough to
/// serve as a few-shot example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InContextEntry {
    pub prompt: String,
    pub action_text: String,
    pub score_before: f64,
    pub score_after: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Improvement {
    /// `(after - before) / max(before, epsilon)`.
    #[default]
    Relative,
    /// `after - before`.
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissionRule {
    pub improvement: Improvement,
    pub threshold: f64,
    pub epsilon: f64,
}

impl Default for AdmissionRule {
    fn default() -> Self {
        Self {
            improvement: Improvement::Relative,
            threshold: 0.10,
            epsilon: 1e-6,
        }
    }
}

/// Slack on the threshold comparison so that decimal boundary cases such
/// as 0.20 -> 0.22 count as exactly +10%.
const BOUNDARY_TOL: f64 = 1e-9;

impl AdmissionRule {
    pub fn gain(&self, before: f64, after: f64) -> f64 {
        match self.improvement {
            Improvement::Relative => (after - before) / before.max(self.epsilon),
            Improvement::Absolute => after - before,
        }
    }

    pub fn admits(&self, before: f64, after: f64) -> bool {
        self.gain(before, after) >= self.threshold - BOUNDARY_TOL
    }
}

/// Append-only in-context library, deduplicated on (prompt, program text).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Library {
    pub entries: Vec<InContextEntry>,
    seen: BTreeSet<(String, String)>,
}

impl Library {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads a JSONL library; a missing file is an empty library. Later
    /// duplicates are dropped.
    pub fn load(path: impl AsRef<Path>) -> Result<Library, PolicyError> {
        let path = path.as_ref();
        let mut lib = Library::new();
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(lib),
            Err(e) => return Err(PolicyError::Io(format!("{}: {e}", path.display()))),
        };
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: InContextEntry = serde_json::from_str(line)
                .map_err(|e| PolicyError::Invalid(format!("{} line {}: {e}", path.display(), i + 1)))?;
            lib.push(entry);
        }
        Ok(lib)
    }

    /// Adds `entry` unless its (prompt, program) pair is already present.
    pub fn push(&mut self, entry: InContextEntry) -> bool {
        let key = (entry.prompt.clone(), entry.action_text.clone());
        if !self.seen.insert(key) {
            return false;
        }
        self.entries.push(entry);
        true
    }

    /// Admits every committed step of `trajectory` that passes `rule`;
    /// returns the entries actually added.
    pub fn update(&mut self, trajectory: &Trajectory, rule: &AdmissionRule) -> Vec<InContextEntry> {
        let mut added = Vec::new();
        for step in &trajectory.steps {
            let Some(text) = step.committed_program() else {
                continue;
            };
            if !rule.admits(step.score_before, step.committed_score) {
                continue;
            }
            let entry = InContextEntry {
                prompt: trajectory.prompt.clone(),
                action_text: text.to_string(),
                score_before: step.score_before,
                score_after: step.committed_score,
            };
            if self.push(entry.clone()) {
                added.push(entry);
            }
        }
        added
    }

    /// Appends `entries` to the file at `path`, one JSON object per line.
    pub fn append(path: impl AsRef<Path>, entries: &[InContextEntry]) -> Result<(), PolicyError> {
        let path = path.as_ref();
        let io = |e: std::io::Error| PolicyError::Io(format!("{}: {e}", path.display()));
        let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        for e in entries {
            let mut line = serde_json::to_vec(e).expect("entry serializes");
            line.push(b'\n');
            f.write_all(&line).map_err(io)?;
        }
        Ok(())
    }
}

/// One supervised fine-tuning example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinetuneRecord {
    pub prompt: String,
    pub step: usize,
    pub views: Vec<String>,
    pub scene_summary: String,
    pub action_text: String,
}

/// Keeps the `top_k` trajectories per prompt by final committed score (ties
/// go to the earlier trajectory) and emits their committed steps.
pub fn collect_selfimprovement(trajectories: &[Trajectory], top_k: usize) -> Vec<FinetuneRecord> {
    let mut by_prompt: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, t) in trajectories.iter().enumerate() {
        by_prompt.entry(&t.prompt).or_default().push(i);
    }
    let mut out = Vec::new();
    for ids in by_prompt.values_mut() {
        ids.sort_by(|&a, &b| {
            trajectories[b]
                .final_score()
                .total_cmp(&trajectories[a].final_score())
                .then(a.cmp(&b))
        });
        for &i in ids.iter().take(top_k) {
            let t = &trajectories[i];
            for step in &t.steps {
                if let Some(text) = step.committed_program() {
                    out.push(FinetuneRecord {
                        prompt: t.prompt.clone(),
                        step: step.step,
                        views: step.views.clone(),
                        scene_summary: step.scene_summary.clone(),
                        action_text: text.to_string(),
                    });
                }
            }
        }
    }
    out
}
