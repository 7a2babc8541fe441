use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::backend::{ActRequest, PolicyBackend, Scorer};
use super::library::{InContextEntry, Library};
use super::scorer::scene_summary;
use super::trajectory::{scene_path, view_paths, Candidate, CandidateStatus, Step, Trajectory};
use super::PolicyError;
use crate::action::{execute, parse, ExecutionContext};
use crate::scene::Scene;
use crate::view::{standard_viewset_with, ViewParams, ViewSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneLoopConfig {
    pub steps: usize,
    pub candidates: usize,
    pub seed: u64,
    /// In-context examples drawn per candidate.
    pub in_context: usize,
    pub views: ViewParams,
}

impl Default for SceneLoopConfig {
    fn default() -> Self {
        Self {
            steps: 10,
            candidates: 4,
            seed: 0,
            in_context: 2,
            views: ViewParams::default(),
        }
    }
}

/// Stateless per-(seed, step, candidate) stream; independent of execution
/// order, so parallel and serial runs agree.
pub fn candidate_seed(seed: u64, step: usize, index: usize) -> u64 {
    let mut z = seed ^ (step as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Library positions shown to candidate `index` at `step`.
pub fn sample_examples(library_len: usize, k: usize, seed: u64, step: usize, index: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(candidate_seed(seed, step, index));
    let mut picks = sample(&mut rng, library_len, k.min(library_len)).into_vec();
    picks.sort_unstable();
    picks
}

/// Everything a run produced: the log plus the per-step artifacts it
/// refers to.
#[derive(Clone, Debug)]
pub struct SceneRun {
    pub trajectory: Trajectory,
    /// Views shown at each step.
    pub views: Vec<ViewSet>,
    /// Committed scene after each step.
    pub scenes: Vec<Scene>,
}

impl SceneRun {
    pub fn final_scene(&self) -> Option<&Scene> {
        self.scenes.last()
    }
}

pub struct SceneLoop<'a> {
    pub policy: &'a dyn PolicyBackend,
    pub scorer: &'a dyn Scorer,
    pub exec: ExecutionContext<'a>,
    pub library: &'a Library,
    pub config: SceneLoopConfig,
}

struct Evaluated {
    candidate: Candidate,
    scene: Option<Scene>,
}

impl SceneLoop<'_> {
    /// Best-of-N refinement: each step samples N programs, runs each on a
    /// copy of the current scene, and commits the best only if it does not
    /// lower the score.
    pub fn run(&self, scene0: &Scene, prompt: &str) -> Result<SceneRun, PolicyError> {
        let cfg = &self.config;
        if cfg.steps == 0 || cfg.candidates == 0 {
            return Err(PolicyError::Invalid("steps and candidates must be at least 1".into()));
        }
        let initial_score = self.scorer.score(scene0, prompt)?;
        let mut scene = scene0.clone();
        let mut score = initial_score;
        let mut run = SceneRun {
            trajectory: Trajectory {
                prompt: prompt.into(),
                seed: cfg.seed,
                initial_score,
                steps: Vec::new(),
            },
            views: Vec::new(),
            scenes: Vec::new(),
        };
        for t in 0..cfg.steps {
            let views = standard_viewset_with(&scene, self.exec.assets, &cfg.views)?;
            let summary = scene_summary(&scene);
            let evaluated: Vec<Evaluated> = (0..cfg.candidates)
                .into_par_iter()
                .map(|i| self.candidate(&scene, score, prompt, t, i, &views, &summary))
                .collect();

            let mut chosen: Option<usize> = None;
            for (i, e) in evaluated.iter().enumerate() {
                if chosen.is_none_or(|c| e.candidate.score > evaluated[c].candidate.score) {
                    chosen = Some(i);
                }
            }
            let before = score;
            let mut committed = false;
            if let Some(c) = chosen {
                let best = &evaluated[c];
                if let (CandidateStatus::Ok, Some(next)) = (&best.candidate.status, &best.scene) {
                    if best.candidate.score >= score {
                        scene = next.clone();
                        score = best.candidate.score;
                        committed = true;
                    }
                }
            }
            run.trajectory.steps.push(Step {
                step: t,
                views: view_paths(t, views.views.iter().map(|v| &v.name)),
                scene_summary: summary,
                score_before: before,
                candidates: evaluated.into_iter().map(|e| e.candidate).collect(),
                chosen,
                committed,
                committed_scene: scene_path(t),
                committed_score: score,
            });
            run.views.push(views);
            run.scenes.push(scene.clone());
        }
        Ok(run)
    }

    #[allow(clippy::too_many_arguments)]
    fn candidate(&self, scene: &Scene, current: f64, prompt: &str, step: usize, index: usize, views: &ViewSet, summary: &str) -> Evaluated {
        let picks = sample_examples(self.library.entries.len(), self.config.in_context, self.config.seed, step, index);
        let examples: Vec<&InContextEntry> = picks.iter().map(|&p| &self.library.entries[p]).collect();
        let request = ActRequest {
            prompt,
            step,
            sample_index: index,
            candidates: self.config.candidates,
            views,
            scene_summary: summary,
            in_context: &examples,
        };
        let mut candidate = Candidate {
            index,
            action_text: String::new(),
            score: current,
            status: CandidateStatus::Ok,
            in_context: picks,
            skipped: 0,
        };
        let failed = |mut c: Candidate, status| {
            c.status = status;
            Evaluated { candidate: c, scene: None }
        };
        let text = match self.policy.act(&request) {
            Ok(t) => t,
            Err(e) => return failed(candidate, CandidateStatus::BackendError(e.to_string())),
        };
        candidate.action_text = text;
        let program = match parse(&candidate.action_text) {
            Ok(p) => p,
            Err(e) => return failed(candidate, CandidateStatus::ParseError(e.to_string())),
        };
        let result = match execute(&program, scene, &self.exec) {
            Ok(r) => r,
            Err(e) => return failed(candidate, CandidateStatus::ExecError(e.to_string())),
        };
        candidate.skipped = result.outcomes.iter().filter(|o| !o.is_ok()).count();
        match self.scorer.score(&result.scene, prompt) {
            Ok(s) => {
                candidate.score = s;
                Evaluated {
                    candidate,
                    scene: Some(result.scene),
                }
            }
            Err(e) => failed(candidate, CandidateStatus::ScoreError(e.to_string())),
        }
    }
}
