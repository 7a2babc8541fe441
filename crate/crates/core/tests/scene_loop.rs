use roomforge::action::{execute, parse, ExecutionContext};
use roomforge::index::{AssetIndex, MaterialIndex};
use roomforge::policy::{
    ActRequest, BackendError, CandidateStatus, InContextEntry, LexicalScorer, Library, PolicyBackend, SceneLoop,
    SceneLoopConfig, ScriptedPolicy, Scorer,
};
use roomforge::scene::{Category, Light, Placement, Scene, SceneElement};
use roomforge::view::ViewParams;
use roomforge::geometry::Vec3;
use roomforge_testkit::fixtures::{demo_room, toy_assets, toy_corpus, toy_materials};
use roomforge_testkit::oracle;

fn small_views() -> ViewParams {
    ViewParams {
        width: 32,
        height: 32,
        pano_height: 16,
        ..ViewParams::default()
    }
}

fn config(steps: usize, candidates: usize, seed: u64) -> SceneLoopConfig {
    SceneLoopConfig {
        steps,
        candidates,
        seed,
        views: small_views(),
        ..SceneLoopConfig::default()
    }
}

struct Fixture {
    assets: AssetIndex,
    materials: MaterialIndex,
    scorer: LexicalScorer,
    library: Library,
}

impl Fixture {
    fn new() -> Self {
        let (assets, materials) = (toy_assets(), toy_materials());
        let scorer = LexicalScorer::new(&assets, &materials);
        Self {
            assets,
            materials,
            scorer,
            library: Library::new(),
        }
    }

    fn run(&self, policy: &dyn PolicyBackend, prompt: &str, cfg: SceneLoopConfig) -> roomforge::policy::SceneRun {
        SceneLoop {
            policy,
            scorer: &self.scorer,
            exec: ExecutionContext::new(&self.assets, &self.materials),
            library: &self.library,
            config: cfg,
        }
        .run(&demo_room(), prompt)
        .unwrap()
    }
}

#[test]
fn lexical_scorer_cases() {
    let f = Fixture::new();
    let room = demo_room();
    assert_eq!(f.scorer.score(&room, "red chair").unwrap(), 0.0);

    let mut scene = room.clone();
    scene
        .insert_element("chair_1", SceneElement::asset(Category::Objects, "red_chair", Placement::at(Vec3::new(1.0, 1.0, 0.0))))
        .unwrap();
    let got = f.scorer.score(&scene, "red chair").unwrap();
    let want = oracle::tfidf_cosine(&toy_corpus(), "red chair", "red wooden chair");
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    // By hand over the 13-document toy corpus: idf(red) = ln(14/4) + 1,
    // idf(wooden) = ln(14/3) + 1, idf(chair) = ln(14/2) + 1, and
    // cos = sqrt((r^2 + c^2) / (r^2 + w^2 + c^2)).
    assert!((want - 0.824_994_297_074_971_4).abs() < 1e-12, "{want}");

    // Scene text identical to the prompt.
    scene.insert_light("light_1", Light::point(1.0, [1.0; 3], Vec3::new(2.0, 2.0, 2.5))).unwrap();
    let text = f.scorer.scene_text(&scene);
    assert_eq!(text, "red wooden chair point");
    assert!((f.scorer.score(&scene, &text).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn adding_the_named_object_raises_the_score() {
    let f = Fixture::new();
    let policy = ScriptedPolicy::new(vec!["add_object(\"red wooden chair\", position=(1.0, 1.0, 0.0))".into()]);
    let run = f.run(&policy, "red chair", config(1, 1, 3));
    let t = &run.trajectory;
    assert_eq!(t.initial_score, 0.0);
    assert!(t.steps[0].committed);
    assert!(t.steps[0].committed_score > t.initial_score);
    let want = oracle::tfidf_cosine(&toy_corpus(), "red chair", "red wooden chair");
    assert!((t.steps[0].committed_score - want).abs() < 1e-12);
}

#[test]
fn unparseable_programs_give_no_op_steps() {
    let f = Fixture::new();
    let policy = ScriptedPolicy::new(vec!["add_object(\"red chair\"".into(), "))((".into()]);
    let run = f.run(&policy, "red chair", config(4, 3, 1));
    for s in &run.trajectory.steps {
        assert!(!s.committed);
        assert_eq!(s.committed_score, run.trajectory.initial_score);
        assert!(s.candidates.iter().all(|c| matches!(c.status, CandidateStatus::ParseError(_))));
        assert!(s.candidates.iter().all(|c| c.score == s.score_before));
    }
    assert_eq!(run.final_scene().unwrap(), &demo_room());
}

struct Failing;

impl PolicyBackend for Failing {
    fn act(&self, _: &ActRequest) -> Result<String, BackendError> {
        Err(BackendError::Unreachable("down".into()))
    }
}

#[test]
fn backend_failures_score_as_neutral() {
    let f = Fixture::new();
    let run = f.run(&Failing, "red chair", config(2, 2, 0));
    for s in &run.trajectory.steps {
        assert!(!s.committed);
        assert!(s.candidates.iter().all(|c| matches!(c.status, CandidateStatus::BackendError(_)) && c.score == s.score_before));
    }
}

/// Scene text built independently, then scored with the hand TF-IDF.
fn oracle_score(scene: &Scene, prompt: &str) -> f64 {
    oracle::lexical_score(scene, prompt)
}

#[test]
fn selection_matches_exhaustive_evaluation() {
    let f = Fixture::new();
    let prompt = "a red velvet sofa with a brass floor lamp and a green plant";
    let blocks = vec![
        "add_object(\"blue fabric sofa\", position=(1.0, 1.0, 0.0))",
        "add_object(\"brass floor lamp\", position=(3.0, 4.0, 0.0))",
        "add_object(\"green potted plant\", position=(0.5, 4.2, 0.0))\nm = retrieve_material(\"red velvet\")\nset_material(\"floors\", m)",
        "add_object(\"red wooden chair\", position=(2.0, 2.0, 0.0))",
        "add_light(\"point\", 800, (1.0, 0.9, 0.8), position=(2.0, 2.5, 2.5))",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let policy = ScriptedPolicy::new(blocks);
    let run = f.run(&policy, prompt, config(4, 3, 11));
    let ctx = ExecutionContext::new(&f.assets, &f.materials);
    let mut start = demo_room();
    for (t, step) in run.trajectory.steps.iter().enumerate() {
        let scores: Vec<f64> = step
            .candidates
            .iter()
            .map(|c| {
                let next = execute(&parse(&c.action_text).unwrap(), &start, &ctx).unwrap().scene;
                oracle_score(&next, prompt)
            })
            .collect();
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] + 1e-12 {
                best = i;
            }
        }
        for (c, s) in step.candidates.iter().zip(&scores) {
            assert!((c.score - s).abs() < 1e-12);
        }
        assert_eq!(step.chosen, Some(best), "step {t}");
        assert!(step.committed_score >= step.score_before);
        start = run.scenes[t].clone();
    }
}

#[test]
fn replay_is_byte_identical() {
    let f = Fixture::new();
    let mut lib = Library::new();
    for i in 0..5 {
        lib.push(InContextEntry {
            prompt: format!("p{i}"),
            action_text: format!("add_object(\"red book\", position=({}.0, 1.0, 0.0))", i % 3 + 1),
            score_before: 0.0,
            score_after: 0.5,
        });
    }
    let policy = ScriptedPolicy::new(vec![
        "add_object(\"red wooden chair\", position=(1.0, 1.0, 0.0))".into(),
        "add_object(\"blue fabric sofa\", position=(2.0, 3.5, 0.0))".into(),
        "m = retrieve_material(\"oak floor\")\nset_material(\"floors\", m)".into(),
    ]);
    let run = |lib: &Library| {
        SceneLoop {
            policy: &policy,
            scorer: &f.scorer,
            exec: ExecutionContext::new(&f.assets, &f.materials),
            library: lib,
            config: config(3, 2, 42),
        }
        .run(&demo_room(), "red chair on an oak floor")
        .unwrap()
    };
    let (a, b) = (run(&lib), run(&lib));
    assert_eq!(a.trajectory.to_jsonl(), b.trajectory.to_jsonl());
    for s in &a.trajectory.steps {
        for c in &s.candidates {
            assert_eq!(c.in_context.len(), 2);
        }
    }
    let mut prev = a.trajectory.initial_score;
    for s in &a.trajectory.steps {
        assert!(s.committed_score >= prev);
        prev = s.committed_score;
    }
}
