use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "message", rename_all = "snake_case")]
pub enum CandidateStatus {
    Ok,
    BackendError(String),
    ParseError(String),
    ExecError(String),
    ScoreError(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub action_text: String,
    /// Failed candidates carry the step's starting score.
    pub score: f64,
    pub status: CandidateStatus,
    /// Library positions of the in-context examples shown.
    pub in_context: Vec<usize>,
    /// Statements skipped by the interpreter.
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub step: usize,
    /// Relative paths of the view files the candidates were shown.
    pub views: Vec<String>,
    pub scene_summary: String,
    pub score_before: f64,
    pub candidates: Vec<Candidate>,
    /// Highest candidate score, ties to the lowest index; `None` when
    /// there were no candidates.
    pub chosen: Option<usize>,
    /// False for a no-op step.
    pub committed: bool,
    pub committed_scene: String,
    pub committed_score: f64,
}

impl Step {
    /// Program text of the committed candidate, if the step was not a no-op.
    pub fn committed_program(&self) -> Option<&str> {
        if !self.committed {
            return None;
        }
        self.chosen.map(|i| self.candidates[i].action_text.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub prompt: String,
    pub seed: u64,
    pub initial_score: f64,
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn final_score(&self) -> f64 {
        self.steps.last().map_or(self.initial_score, |s| s.committed_score)
    }

    /// One JSON object per step.
    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for s in &self.steps {
            out.extend(serde_json::to_vec(s).expect("step serializes"));
            out.push(b'\n');
        }
        out
    }

    pub fn from_jsonl(prompt: &str, seed: u64, initial_score: f64, text: &str) -> Result<Trajectory, serde_json::Error> {
        let steps = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Trajectory {
            prompt: prompt.into(),
            seed,
            initial_score,
            steps,
        })
    }
}

/// Paths of a step's artifacts inside a run directory.
pub fn step_dir(step: usize) -> String {
    format!("step_{step:03}")
}

pub fn view_paths(step: usize, names: impl IntoIterator<Item = impl AsRef<str>>) -> Vec<String> {
    names
        .into_iter()
        .map(|n| format!("{}/{}.ids", step_dir(step), n.as_ref()))
        .collect()
}

pub fn scene_path(step: usize) -> String {
    format!("{}/scene.json", step_dir(step))
}
