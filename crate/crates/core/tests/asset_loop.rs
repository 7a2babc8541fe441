use roomforge::geometry::{shapes, Vec3};
use roomforge::index::AssetRecord;
use roomforge::policy::{
    is_receptacle, run_asset_loop, AssetLoopConfig, AssetRun, GeometricGate, PlaceRequest, PlacementPolicy,
    BackendError, PolicyError, RoundOutcome, ScriptedAnswer, ScriptedPlacement, Target,
};
use roomforge::scene::verify_scene;
use roomforge_testkit::fixtures::{table_scene, toy_assets};

use proptest::prelude::*;

const TOP: f64 = 0.75;

fn table_top(dx: f64, dy: f64, dz: f64) -> Vec3 {
    Vec3::new(2.0 + dx, 2.5 + dy, TOP + dz)
}

/// Eight spots across the top, then two books stacked on the first and last.
fn spread_targets() -> Vec<Vec3> {
    let mut t = Vec::new();
    for dy in [-0.2, 0.2] {
        for dx in [-0.45, -0.15, 0.15, 0.45] {
            t.push(table_top(dx, dy, 0.0));
        }
    }
    t.push(table_top(-0.45, -0.2, 0.04));
    t.push(table_top(0.45, 0.2, 0.04));
    t
}

fn run(policy: &dyn PlacementPolicy, cfg: AssetLoopConfig) -> AssetRun {
    let assets = toy_assets();
    run_asset_loop(&table_scene(), "table_1", "books on a desk", policy, &assets, &GeometricGate::default(), &cfg).unwrap()
}

fn cfg(seed: u64, max_attempts: usize) -> AssetLoopConfig {
    AssetLoopConfig {
        seed,
        max_attempts,
        width: 128,
        height: 128,
        ..AssetLoopConfig::default()
    }
}

#[test]
fn ten_books_then_halt() {
    let policy = ScriptedPlacement::world("small red book", &spread_targets());
    let assets = toy_assets();
    for seed in 0..3 {
        let out = run(&policy, cfg(seed, 30));
        assert_eq!(out.successes(), 10);
        assert_eq!(out.rounds.len(), 10);
        assert_eq!(out.scene.elements.keys().filter(|k| k.starts_with("book_")).count(), 10);
        let report = verify_scene(&out.scene, &assets).unwrap();
        assert!(report.verified, "{report:?}");
    }
}

#[test]
fn floor_beside_the_table_is_rejected() {
    let policy = ScriptedPlacement::world("small red book", &[Vec3::new(2.0, 4.5, 0.0)]);
    let out = run(&policy, cfg(2, 4));
    assert_eq!(out.successes(), 0);
    assert_eq!(out.scene, table_scene());
    assert!(out.rounds.iter().all(|r| matches!(r.outcome, RoundOutcome::OffSurface { .. } | RoundOutcome::PixelOutsideImage)));
    assert!(out.rounds.iter().any(|r| matches!(r.outcome, RoundOutcome::OffSurface { .. })));
}

#[test]
fn overlapping_footprint_is_rejected() {
    // Books are 0.2 x 0.3 m; centers 0.19 m apart in x overlap by 1 cm.
    let policy = ScriptedPlacement::world("small red book", &[table_top(0.0, 0.0, 0.0), table_top(0.19, 0.0, 0.0)]);
    let out = run(&policy, cfg(2, 2));
    assert_eq!(out.rounds.len(), 2);
    assert!(matches!(out.rounds[0].outcome, RoundOutcome::Placed { .. }));
    assert_eq!(out.rounds[1].outcome, RoundOutcome::Collision { with: "book_1".into() });
    assert_eq!(out.successes(), 1);
    assert_eq!(out.scene.elements.len(), table_scene().elements.len() + 1);
}

#[test]
fn pen_stacks_on_book() {
    let policy = ScriptedPlacement::new(vec![
        ScriptedAnswer {
            description: "small red book".into(),
            target: Target::World(table_top(0.0, 0.0, 0.0).into()),
        },
        ScriptedAnswer {
            description: "black ballpoint pen".into(),
            target: Target::World(table_top(0.0, 0.0, 0.04).into()),
        },
    ]);
    let out = run(&policy, AssetLoopConfig { max_placements: 2, ..cfg(5, 2) });
    let placed: Vec<_> = out
        .rounds
        .iter()
        .map(|r| match &r.outcome {
            RoundOutcome::Placed { element, support, position, .. } => (element.clone(), support.clone(), position[2]),
            other => panic!("{other:?}"),
        })
        .collect();
    assert_eq!(placed[0].0, "book_1");
    assert_eq!(placed[0].1, "table_1");
    assert_eq!(placed[1].0, "pen_1");
    assert_eq!(placed[1].1, "book_1");
    assert!((placed[1].2 - 0.79).abs() < 1e-9);
    assert!(verify_scene(&out.scene, &toy_assets()).unwrap().verified);
}

struct Down;

impl PlacementPolicy for Down {
    fn describe(&self, _: &PlaceRequest) -> Result<String, BackendError> {
        Err(BackendError::Unreachable("down".into()))
    }

    fn locate(&self, _: &PlaceRequest, _: &str) -> Result<[f64; 2], BackendError> {
        unreachable!("locate is only asked after describe")
    }
}

#[test]
fn backend_failures_are_soft() {
    let out = run(&Down, cfg(0, 4));
    assert_eq!(out.rounds.len(), 4);
    assert!(out.rounds.iter().all(|r| matches!(r.outcome, RoundOutcome::BackendFailure { .. })));
}

#[test]
fn other_soft_failures() {
    let policy = ScriptedPlacement::new(vec![
        ScriptedAnswer {
            description: "small red book".into(),
            target: Target::Pixel([-5.0, 10.0]),
        },
        ScriptedAnswer {
            description: "zzz qqq".into(),
            target: Target::World(table_top(0.0, 0.0, 0.0).into()),
        },
    ]);
    let out = run(&policy, cfg(0, 2));
    assert_eq!(out.rounds[0].outcome, RoundOutcome::PixelOutsideImage);
    assert_eq!(out.rounds[1].outcome, RoundOutcome::RetrievalMiss);
}

fn record(id: &str) -> AssetRecord {
    AssetRecord {
        id: id.into(),
        description: id.into(),
        tags: Vec::new(),
        mesh_path: "x.obj".into(),
        half_extents: [0.5; 3],
        receptacle_hint: None,
    }
}

#[test]
fn receptacle_gate() {
    let gate = GeometricGate::default();
    let table = shapes::table(1.2, 0.8, 0.75, 0.04, 0.04);
    assert!(is_receptacle(&record("table"), &table, &gate));
    let sphere = shapes::uv_sphere(Vec3::new(0.0, 0.0, 0.5), 0.5, 16, 32);
    assert!(!is_receptacle(&record("sphere"), &sphere, &gate));
    let pallet = shapes::axis_box(Vec3::new(-0.6, -0.5, 0.0), Vec3::new(0.6, 0.5, 0.05));
    assert!(!is_receptacle(&record("pallet"), &pallet, &gate));

    let assets = toy_assets();
    let mut scene = table_scene();
    scene
        .insert_element(
            "ball_1",
            roomforge::scene::SceneElement::asset(
                roomforge::scene::Category::Objects,
                "red_book",
                roomforge::scene::Placement::at(Vec3::new(0.5, 0.5, 0.0)),
            ),
        )
        .unwrap();
    let policy = ScriptedPlacement::world("pen", &[table_top(0.0, 0.0, 0.0)]);
    // A 4 cm book has no surface 10 cm up.
    let err = run_asset_loop(&scene, "ball_1", "p", &policy, &assets, &gate, &AssetLoopConfig::default()).unwrap_err();
    assert!(matches!(err, PolicyError::NotReceptacle(_)));
    let err = run_asset_loop(&scene, "nope", "p", &policy, &assets, &gate, &AssetLoopConfig::default()).unwrap_err();
    assert!(matches!(err, PolicyError::UnknownElement(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Caps hold and the final scene verifies. Collision-freedom and
    /// containment are per-item and per-pair, so every intermediate scene
    /// (a subset of the final one) verifies as well.
    #[test]
    fn caps_and_validity(
        seed in 0u64..1000,
        cap in 1usize..6,
        attempts in 1usize..12,
        spots in proptest::collection::vec((-0.55f64..0.55, -0.35f64..0.35, 0.0f64..0.1), 1..8),
    ) {
        let targets: Vec<Vec3> = spots.iter().map(|(x, y, z)| table_top(*x, *y, *z)).collect();
        let policy = ScriptedPlacement::world("small red book", &targets);
        let out = run(&policy, AssetLoopConfig { max_placements: cap, ..cfg(seed, attempts) });
        prop_assert!(out.successes() <= cap);
        prop_assert!(out.rounds.len() <= attempts);
        prop_assert!(out.successes() == cap || out.rounds.len() == attempts);
        prop_assert!(verify_scene(&out.scene, &toy_assets()).unwrap().verified);
    }
}
