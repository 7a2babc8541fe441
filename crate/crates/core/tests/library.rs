use proptest::prelude::*;
use roomforge::policy::{
    collect_selfimprovement, AdmissionRule, Candidate, CandidateStatus, Improvement, InContextEntry, Library, Step,
    Trajectory,
};
use roomforge_testkit::oracle;

fn step(t: usize, before: f64, after: f64, committed: bool, text: &str) -> Step {
    Step {
        step: t,
        views: vec![format!("step_{t:03}/corner.ids")],
        scene_summary: format!("summary {t}"),
        score_before: before,
        candidates: vec![Candidate {
            index: 0,
            action_text: text.into(),
            score: after,
            status: CandidateStatus::Ok,
            in_context: Vec::new(),
            skipped: 0,
        }],
        chosen: Some(0),
        committed,
        committed_scene: format!("step_{t:03}/scene.json"),
        committed_score: if committed { after } else { before },
    }
}

fn trajectory(prompt: &str, scores: &[f64]) -> Trajectory {
    let steps = scores
        .windows(2)
        .enumerate()
        .map(|(t, w)| step(t, w[0], w[1], w[1] > w[0], &format!("program {t}")))
        .collect();
    Trajectory {
        prompt: prompt.into(),
        seed: 0,
        initial_score: scores[0],
        steps,
    }
}

#[test]
fn admission_boundaries() {
    let rule = AdmissionRule::default();
    assert!(rule.admits(0.20, 0.22));
    assert!(!rule.admits(0.20, 0.21));
    assert!(rule.admits(0.0, 0.05));
    // (0.05 - 0) / 1e-6 = 5e4.
    assert!((rule.gain(0.0, 0.05) - 5e4).abs() < 1e-6);
    assert!(!rule.admits(0.5, 0.5));

    let abs = AdmissionRule {
        improvement: Improvement::Absolute,
        ..AdmissionRule::default()
    };
    assert!(!abs.admits(0.20, 0.22));
    assert!(abs.admits(0.20, 0.30));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn admission_matches_independent_predicate(before in 0.0f64..1.0, after in 0.0f64..1.0) {
        prop_assert_eq!(AdmissionRule::default().admits(before, after), oracle::admits(before, after));
    }

    #[test]
    fn admission_on_the_boundary(cents in 1u32..100) {
        let before = cents as f64 / 100.0;
        let after = before * 1.1;
        prop_assert!(AdmissionRule::default().admits(before, after));
        prop_assert!(!AdmissionRule::default().admits(before, before * 1.099));
    }
}

#[test]
fn update_admits_and_dedups() {
    let mut lib = Library::new();
    let t = trajectory("cozy den", &[0.20, 0.22, 0.23, 0.30]);
    let added = lib.update(&t, &AdmissionRule::default());
    // 0.20 -> 0.22 (+10%), 0.22 -> 0.23 (+4.5%), 0.23 -> 0.30 (+30%).
    assert_eq!(added.iter().map(|e| e.action_text.as_str()).collect::<Vec<_>>(), ["program 0", "program 2"]);
    assert!(lib.update(&t, &AdmissionRule::default()).is_empty());
    assert_eq!(lib.entries.len(), 2);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("library.jsonl");
    assert!(Library::load(&path).unwrap().entries.is_empty());
    Library::append(&path, &lib.entries).unwrap();
    Library::append(&path, &lib.entries[..1]).unwrap();
    let loaded = Library::load(&path).unwrap();
    assert_eq!(loaded.entries, lib.entries);
}

#[test]
fn no_op_steps_never_enter_the_library() {
    let mut lib = Library::new();
    let t = trajectory("den", &[0.5, 0.4, 0.4]);
    assert!(lib.update(&t, &AdmissionRule::default()).is_empty());
    let e = InContextEntry {
        prompt: "den".into(),
        action_text: "x".into(),
        score_before: 0.0,
        score_after: 1.0,
    };
    assert!(lib.push(e.clone()));
    assert!(!lib.push(e));
}

#[test]
fn finetune_export_keeps_the_best_runs() {
    let runs = vec![
        trajectory("den", &[0.0, 0.1, 0.2]),
        trajectory("den", &[0.0, 0.3, 0.3, 0.5]),
        trajectory("den", &[0.0, 0.2]),
        trajectory("den", &[0.0, 0.1, 0.5]),
        trajectory("den", &[0.0, 0.4]),
    ];
    let out = collect_selfimprovement(&runs, 1);
    // Runs 1 and 3 tie at 0.5; the earlier one wins. Its committed steps are 0 and 2.
    assert_eq!(out.iter().map(|r| r.step).collect::<Vec<_>>(), [0, 2]);
    assert!(out.iter().all(|r| r.prompt == "den"));
    assert_eq!(out[1].views, ["step_002/corner.ids"]);

    let two = collect_selfimprovement(&runs, 2);
    let committed: usize = [&runs[1], &runs[3]]
        .iter()
        .map(|t| t.steps.iter().filter(|s| s.committed).count())
        .sum();
    assert_eq!(two.len(), committed);

    let mixed = vec![trajectory("a", &[0.0, 0.1]), trajectory("b", &[0.0, 0.2])];
    assert_eq!(collect_selfimprovement(&mixed, 1).len(), 2);
}

#[test]
fn trajectory_jsonl_round_trip() {
    let t = trajectory("den", &[0.0, 0.3, 0.2]);
    let text = String::from_utf8(t.to_jsonl()).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(Trajectory::from_jsonl("den", 0, 0.0, &text).unwrap(), t);
}
