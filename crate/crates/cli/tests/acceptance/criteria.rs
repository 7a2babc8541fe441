use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roomforge::action::{execute, parse, ExecutionContext};
use roomforge::geometry::{
    detect_placeable_surfaces, shapes, PosedMesh, Ray, SurfaceParams, Transform, TriangleMesh, TriangleSet, Vec3,
};
use roomforge::index::{AssetIndex, MaterialIndex};
use roomforge::policy::remote::{RemoteClient, RemoteConfig, RemotePolicy, RemoteScorer, WireMap};
use roomforge::policy::{
    run_asset_loop, AdmissionRule, AssetLoopConfig, AssetRun, CandidateStatus, GeometricGate, LexicalScorer, Library,
    PlacementPolicy, PolicyBackend, RoundOutcome, SceneLoop, SceneLoopConfig, SceneRun, Scorer, ScriptedAnswer,
    ScriptedPlacement, ScriptedPolicy, Target, BackendError,
};
use roomforge::room::{build_room, FixtureMaterials, Opening, OpeningKind, RoomLayoutSpec};
use roomforge::scene::{verify_scene, MeshResolver, Scene};
use roomforge::view::{render_view, Camera, ViewParams};
use roomforge_testkit::fixtures::{demo_room, table_scene, toy_assets, toy_materials};
use roomforge_testkit::mock::{unreachable_url, MockServer};
use roomforge_testkit::oracle;

use crate::Outcome;

fn check(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

// ---------------------------------------------------------------- loops

const DESCRIPTIONS: [&str; 8] = [
    "red wooden chair",
    "blue fabric sofa",
    "oak dining table",
    "tall wooden bookcase",
    "brass floor lamp",
    "green potted plant",
    "small red book",
    "black ballpoint pen",
];

const PROMPTS: [&str; 5] = [
    "a red chair next to an oak table",
    "a living room with a blue sofa and a brass lamp",
    "a study with a tall bookcase and a green plant",
    "red velvet sofa on a blue tile floor",
    "a dark walnut reading corner with a floor lamp",
];

/// Random action programs over the toy corpus; some collide or leave the
/// room, which the loop must absorb.
fn random_programs(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n)
        .map(|_| match rng.gen_range(0..10) {
            0..=5 => format!(
                "add_object(\"{}\", position=({:.2}, {:.2}, 0.0), rotation={:.3})",
                DESCRIPTIONS[rng.gen_range(0..DESCRIPTIONS.len())],
                rng.gen_range(0.2..3.8),
                rng.gen_range(0.2..4.8),
                rng.gen_range(-PI..PI)
            ),
            6 => {
                let m = ["light oak wood floor", "blue ceramic tile", "dark walnut wood", "red velvet fabric"];
                format!(
                    "m = retrieve_material(\"{}\")\nset_material(\"{}\", m)",
                    m[rng.gen_range(0..m.len())],
                    ["floors", "walls"][rng.gen_range(0..2)]
                )
            }
            7 => format!(
                "add_light(\"point\", {}, (1.0, 1.0, 1.0), position=({:.2}, {:.2}, 2.5))",
                rng.gen_range(100..1000),
                rng.gen_range(0.5..3.5),
                rng.gen_range(0.5..4.5)
            ),
            8 => "add_object(\"chair\", position=(".into(),
            _ => format!(
                "a = add_object(\"{}\", position=({:.2}, {:.2}, 0.0))\nb = add_object(\"{}\", position=({:.2}, {:.2}, 0.0))",
                DESCRIPTIONS[rng.gen_range(0..6)],
                rng.gen_range(0.2..3.8),
                rng.gen_range(0.2..4.8),
                DESCRIPTIONS[rng.gen_range(0..6)],
                rng.gen_range(0.2..3.8),
                rng.gen_range(0.2..4.8)
            ),
        })
        .collect()
}

struct Corpus {
    assets: AssetIndex,
    materials: MaterialIndex,
}

impl Corpus {
    fn new() -> Self {
        Corpus {
            assets: toy_assets(),
            materials: toy_materials(),
        }
    }

    fn scene_run(&self, seed: u64, steps: usize, candidates: usize) -> (SceneRun, String) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = ScriptedPolicy::new(random_programs(&mut rng, 16));
        let prompt = PROMPTS[seed as usize % PROMPTS.len()].to_string();
        let scorer = LexicalScorer::new(&self.assets, &self.materials);
        let mut library = Library::new();
        for p in random_programs(&mut rng, 4) {
            library.push(roomforge::policy::InContextEntry {
                prompt: prompt.clone(),
                action_text: p,
                score_before: 0.1,
                score_after: 0.2,
            });
        }
        let run = SceneLoop {
            policy: &policy,
            scorer: &scorer,
            exec: ExecutionContext::new(&self.assets, &self.materials),
            library: &library,
            config: SceneLoopConfig {
                steps,
                candidates,
                seed,
                views: ViewParams {
                    width: 48,
                    height: 48,
                    pano_height: 24,
                    ..ViewParams::default()
                },
                ..SceneLoopConfig::default()
            },
        }
        .run(&demo_room(), &prompt)
        .expect("scene loop");
        (run, prompt)
    }
}

fn spread_targets() -> Vec<Vec3> {
    let mut t = Vec::new();
    for dy in [-0.2, 0.2] {
        for dx in [-0.45, -0.15, 0.15, 0.45] {
            t.push(Vec3::new(2.0 + dx, 2.5 + dy, 0.75));
        }
    }
    t.push(Vec3::new(1.55, 2.3, 0.79));
    t.push(Vec3::new(2.45, 2.7, 0.79));
    t
}

fn asset_run(policy: &dyn PlacementPolicy, seed: u64, max_placements: usize, max_attempts: usize) -> AssetRun {
    let cfg = AssetLoopConfig {
        seed,
        max_placements,
        max_attempts,
        width: 128,
        height: 128,
        ..AssetLoopConfig::default()
    };
    run_asset_loop(&table_scene(), "table_1", "books on a table", policy, &toy_assets(), &GeometricGate::default(), &cfg)
        .expect("asset loop")
}

/// The scene after each placed round, rebuilt from the final one: placed
/// elements are only ever added, so round `k`'s scene is the final scene
/// without the elements placed later.
fn intermediate_scenes(run: &AssetRun) -> Vec<Scene> {
    let placed: Vec<&String> = run
        .rounds
        .iter()
        .filter_map(|r| match &r.outcome {
            RoundOutcome::Placed { element, .. } => Some(element),
            _ => None,
        })
        .collect();
    (0..=placed.len())
        .map(|k| {
            let mut s = run.scene.clone();
            for id in &placed[k..] {
                s.elements.remove(*id);
            }
            s
        })
        .collect()
}

fn count_violations(scene: &Scene, resolver: &dyn MeshResolver) -> (usize, usize) {
    let r = verify_scene(scene, resolver).expect("verify");
    (r.collisions.len(), r.out_of_bounds.len())
}

pub fn physics_verifiers() -> Outcome {
    let corpus = Corpus::new();
    let mut scenes = 0;
    let (mut cf, mut ib) = (0, 0);
    for seed in 0..8 {
        let (run, _) = corpus.scene_run(seed, 5, 3);
        for s in &run.scenes {
            let (c, b) = count_violations(s, &corpus.assets);
            cf += c;
            ib += b;
            scenes += 1;
        }
    }
    let policy = ScriptedPlacement::world("small red book", &spread_targets());
    for seed in 0..4 {
        for s in intermediate_scenes(&asset_run(&policy, seed, 10, 30)) {
            let (c, b) = count_violations(&s, &corpus.assets);
            cf += c;
            ib += b;
            scenes += 1;
        }
    }
    check(cf == 0 && ib == 0, || format!("{cf} collisions, {ib} out of bounds over {scenes} scenes"))?;
    Ok(format!("CF 100%, IB 100% over {scenes} scenes"))
}

// ------------------------------------------------------------- geometry

fn tilt(mesh: &TriangleMesh, deg: f64) -> TriangleMesh {
    shapes::rotate_x(mesh, deg.to_radians())
}

fn world_tris(mesh: &TriangleMesh) -> Vec<[Vec3; 3]> {
    (0..mesh.triangle_count()).map(|t| mesh.triangle(t)).collect()
}

pub fn surface_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut corpus: Vec<(String, TriangleMesh)> = Vec::new();
    for i in 0..5 {
        let h = Vec3::new(rng.gen_range(0.1..0.8), rng.gen_range(0.1..0.8), rng.gen_range(0.05..0.6));
        let c = Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..1.0));
        corpus.push((format!("cube {i}"), shapes::axis_box(c - h, c + h)));
    }
    for i in 0..5 {
        let m = shapes::table(
            rng.gen_range(0.6..2.0),
            rng.gen_range(0.4..1.2),
            rng.gen_range(0.4..1.1),
            rng.gen_range(0.02..0.06),
            rng.gen_range(0.03..0.08),
        );
        corpus.push((format!("table {i}"), m));
    }
    for i in 0..5 {
        let base = rng.gen_range(0.1..0.4);
        let gap = rng.gen_range(0.25..0.45);
        let tops = [base, base + gap, base + 2.0 * gap];
        let m = shapes::bookcase(rng.gen_range(0.5..1.2), rng.gen_range(0.2..0.45), &tops, rng.gen_range(0.015..0.03));
        corpus.push((format!("bookcase {i}"), m));
    }
    let unit = shapes::axis_box(Vec3::repeat(-0.5), Vec3::repeat(0.5));
    corpus.push(("cube tilted 15".into(), tilt(&unit, 15.0)));
    corpus.push(("cube tilted 5".into(), tilt(&unit, 5.0)));
    corpus.push(("table tilted 12".into(), tilt(&shapes::table(1.2, 0.8, 0.75, 0.04, 0.04), 12.0)));
    corpus.push(("bookcase tilted 20".into(), tilt(&shapes::bookcase(0.8, 0.3, &[0.3, 0.7, 1.1], 0.02), 20.0)));
    corpus.push(("cube tilted 30".into(), tilt(&unit, 30.0)));

    let params = SurfaceParams::default();
    let mut total = 0;
    for (name, mesh) in &corpus {
        let mut got: Vec<(f64, f64)> = detect_placeable_surfaces(mesh, &params)
            .iter()
            .map(|s| (s.height_z, s.area))
            .collect();
        got.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let want = oracle::plane_surfaces(&world_tris(mesh), params.min_area, params.height_tol, 10.0);
        check(got.len() == want.len(), || format!("{name}: {} surfaces, oracle {}", got.len(), want.len()))?;
        for (g, w) in got.iter().zip(&want) {
            check((g.0 - w.0).abs() <= 1e-3, || format!("{name}: height {} vs {}", g.0, w.0))?;
            check((g.1 - w.1).abs() <= 0.01 * w.1, || format!("{name}: area {} vs {}", g.1, w.1))?;
        }
        total += got.len();
    }
    // The normal rule alone: with the height band opened up, a 15° tilt is
    // still rejected and a 9° tilt is not.
    let loose = SurfaceParams {
        height_tol: 10.0,
        ..params
    };
    let n15 = detect_placeable_surfaces(&tilt(&unit, 15.0), &loose).len();
    let n9 = detect_placeable_surfaces(&tilt(&unit, 9.0), &loose).len();
    check(n15 == 0 && n9 == 1, || format!("loose band: 15° gives {n15}, 9° gives {n9}"))?;
    let cube15 = detect_placeable_surfaces(&tilt(&unit, 15.0), &params).len();
    check(cube15 == 0, || format!("15° cube has {cube15} surfaces"))?;
    Ok(format!("{} receptacles, {total} surfaces matched", corpus.len()))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

pub fn ray_cast_oracle() -> Outcome {
    let meshes = [
        ("sphere", shapes::uv_sphere(Vec3::new(0.1, -0.2, 0.4), 0.5, 24, 48)),
        ("table", shapes::table(1.2, 0.8, 0.75, 0.04, 0.04)),
        ("bookcase", shapes::bookcase(0.8, 0.3, &[0.3, 0.7, 1.1], 0.02)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut hits, mut worst) = (0, 0.0f64);
    for (name, mesh) in &meshes {
        let posed = PosedMesh::new(Arc::new(mesh.clone()), Transform::translation(Vec3::zeros()));
        let set = TriangleSet::from_posed(std::slice::from_ref(&posed));
        let soup = world_tris(mesh);
        let b = mesh.aabb();
        for i in 0..1000 {
            let origin = b.center() + random_unit(&mut rng) * rng.gen_range(0.5..3.0) * b.bounding_radius().max(0.5);
            // Half the rays aim at a random vertex, so most of those hit.
            let dir = if i % 2 == 0 {
                let v = mesh.vertices()[rng.gen_range(0..mesh.vertices().len())];
                let jitter = random_unit(&mut rng) * 0.01;
                (v + jitter - origin).normalize()
            } else {
                random_unit(&mut rng)
            };
            let ray = Ray::new(origin, dir).map_err(|e| e.to_string())?;
            let got = set.cast(&ray).map(|h| h.hit.distance);
            let want = oracle::nearest_hit(origin, ray.direction, &soup).map(|(_, t)| t);
            match (got, want) {
                (Some(g), Some(w)) => {
                    worst = worst.max((g - w).abs());
                    check((g - w).abs() <= 1e-6, || format!("{name} ray {i}: {g} vs {w}"))?;
                    hits += 1;
                }
                (None, None) => {}
                _ => return Err(format!("{name} ray {i}: hit disagreement {got:?} vs {want:?}")),
            }
        }
    }
    Ok(format!("3000 rays, {hits} hits, max |Δd| {worst:.1e} m"))
}

fn furnished_room() -> Scene {
    let corpus = Corpus::new();
    let program = "add_object(\"oak dining table\", position=(2.0, 2.5, 0.0), rotation=0.3)\n\
                   add_object(\"tall wooden bookcase\", position=(0.6, 4.6, 0.0))\n\
                   add_object(\"red wooden chair\", position=(2.0, 1.4, 0.0))\n\
                   add_object(\"green potted plant\", position=(3.5, 0.5, 0.0))";
    let ctx = ExecutionContext::new(&corpus.assets, &corpus.materials);
    execute(&parse(program).unwrap(), &demo_room(), &ctx).unwrap().scene
}

fn doors_and_windows() -> Scene {
    let mut spec = RoomLayoutSpec::rectangle(5.0, 4.0, 2.6);
    let materials = FixtureMaterials {
        frame: "white paint".into(),
        panel: "oak".into(),
        knob: Some("brass".into()),
    };
    spec.openings.push(Opening {
        wall_index: 0,
        offset: 1.0,
        width: 0.9,
        height: 2.0,
        sill: 0.0,
        kind: OpeningKind::DoubleDoor,
        materials: materials.clone(),
    });
    spec.openings.push(Opening {
        wall_index: 1,
        offset: 1.2,
        width: 1.4,
        height: 1.1,
        sill: 0.9,
        kind: OpeningKind::Window,
        materials,
    });
    build_room(&spec).unwrap()
}

pub fn projection_duality() -> Outcome {
    let assets = toy_assets();
    let scenes = [
        ("furnished room", furnished_room()),
        ("table with books", asset_run(&ScriptedPlacement::world("small red book", &spread_targets()), 1, 10, 30).scene),
        ("doors and windows", doors_and_windows()),
    ];
    let mut pixels = 0;
    let mut worst = 0.0f64;
    for (name, scene) in &scenes {
        let b = scene.bounds;
        let eye = Vec3::new(b.min.x + 0.3, b.min.y + 0.3, b.max.z - 0.3);
        let cam = Camera::new(eye, b.center(), Vec3::z(), 70f64.to_radians(), 256, 256).map_err(|e| e.to_string())?;
        let maps = render_view(scene, &assets, &cam).map_err(|e| e.to_string())?;
        let mut soup = Vec::new();
        let mut owner = Vec::new();
        for inst in scene.instances(&assets, None).map_err(|e| e.to_string())? {
            let w = inst.posed.to_world();
            for t in 0..w.triangle_count() {
                soup.push(w.triangle(t));
                owner.push(inst.element_id.clone());
            }
        }
        for v in 0..256 {
            for u in 0..256 {
                let ray = cam.pixel_to_ray(u as f64, v as f64);
                let want = oracle::nearest_hit(ray.origin, ray.direction, &soup);
                match (maps.element_at(u, v), want) {
                    (Some(id), Some((t, d))) => {
                        let got = maps.depth_at(u, v);
                        worst = worst.max((got - d).abs());
                        check((got - d).abs() <= 1e-6, || format!("{name} ({u}, {v}): depth {got} vs {d}"))?;
                        // Equal-depth ties on shared edges may name either face.
                        if id != owner[t] {
                            let alt = soup.iter().zip(&owner).any(|(tri, o)| {
                                o == id && oracle::moller_trumbore(ray.origin, ray.direction, tri).is_some_and(|x| (x - d).abs() <= 1e-9)
                            });
                            check(alt, || format!("{name} ({u}, {v}): id {id} vs {}", owner[t]))?;
                        }
                        pixels += 1;
                    }
                    (None, None) => {}
                    (got, want) => return Err(format!("{name} ({u}, {v}): {got:?} vs {want:?}")),
                }
            }
        }
    }
    Ok(format!("{pixels} pixels over 3 scenes, max |Δd| {worst:.1e} m"))
}

// ------------------------------------------------------------------ room

fn random_layout(rng: &mut ChaCha8Rng) -> RoomLayoutSpec {
    let n = rng.gen_range(3..=8);
    // Star-shaped around the origin: sorted angles with a minimum gap.
    let mut angles: Vec<f64> = Vec::new();
    while angles.len() < n {
        let a = rng.gen_range(0.0..2.0 * PI);
        if angles.iter().all(|b: &f64| {
            let d = (a - b).abs();
            d.min(2.0 * PI - d) > 0.35
        }) {
            angles.push(a);
        }
    }
    angles.sort_by(f64::total_cmp);
    let floor_polygon: Vec<[f64; 2]> = angles
        .iter()
        .map(|a| {
            let r = rng.gen_range(2.5..5.0);
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    let wall_height = rng.gen_range(2.4..3.2);
    let mut spec = RoomLayoutSpec {
        floor_polygon,
        wall_height,
        openings: Vec::new(),
        materials: Default::default(),
    };
    let k = rng.gen_range(0..=4usize).min(n);
    let kinds = [
        OpeningKind::SingleDoor,
        OpeningKind::DoubleDoor,
        OpeningKind::SlidingDoor,
        OpeningKind::FoldingDoor,
        OpeningKind::Window,
    ];
    for wall in 0..n {
        if spec.openings.len() == k {
            break;
        }
        let len = spec.wall_length(wall);
        if len < 1.6 {
            continue;
        }
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let width = rng.gen_range(0.6..(len - 0.6).min(1.6));
        let (sill, height) = if kind.is_door() {
            (0.0, rng.gen_range(1.9..2.2))
        } else {
            (rng.gen_range(0.6..1.0), rng.gen_range(0.6..1.2))
        };
        spec.openings.push(Opening {
            wall_index: wall,
            offset: rng.gen_range(0.3..len - width - 0.3),
            width,
            height,
            sill,
            kind,
            materials: FixtureMaterials {
                frame: "white paint".into(),
                panel: "oak".into(),
                knob: None,
            },
        });
    }
    spec
}

pub fn room_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut openings = 0;
    for i in 0..10 {
        let spec = random_layout(&mut rng);
        let scene = build_room(&spec).map_err(|e| format!("layout {i}: {e}"))?;
        let meshes = &scene.room.as_ref().ok_or("no room shell")?.meshes;
        let walls: f64 = (0..spec.floor_polygon.len()).map(|w| meshes[&format!("wall_{w}")].total_area()).sum();
        let ring = &spec.floor_polygon;
        let perimeter: f64 = (0..ring.len())
            .map(|k| {
                let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .sum();
        let cut: f64 = spec.openings.iter().map(|o| o.width * o.height).sum();
        let want = perimeter * spec.wall_height - cut;
        check((walls - want).abs() <= 1e-6 * want, || format!("layout {i}: wall area {walls} vs {want}"))?;
        let floor = meshes["floor_0"].total_area();
        let shoelace = oracle::shoelace(ring);
        check((floor - shoelace).abs() <= 1e-9 * shoelace, || format!("layout {i}: floor {floor} vs {shoelace}"))?;
        openings += spec.openings.len();
    }
    Ok(format!("10 layouts, {openings} openings"))
}

// --------------------------------------------------------------- policy

pub fn scene_loop() -> Outcome {
    let corpus = Corpus::new();
    let ctx = ExecutionContext::new(&corpus.assets, &corpus.materials);
    let mut steps = 0;
    let mut commits = 0;
    for seed in 0..25 {
        let (run, prompt) = corpus.scene_run(seed, 4, 3);
        let (again, _) = corpus.scene_run(seed, 4, 3);
        check(run.trajectory.to_jsonl() == again.trajectory.to_jsonl(), || format!("seed {seed}: replay differs"))?;
        check(run.scenes == again.scenes, || format!("seed {seed}: replayed scenes differ"))?;

        let mut start = demo_room();
        let mut current = oracle::lexical_score(&start, &prompt);
        check((current - run.trajectory.initial_score).abs() < 1e-12, || format!("seed {seed}: initial score"))?;
        for (t, step) in run.trajectory.steps.iter().enumerate() {
            let scores: Vec<f64> = step
                .candidates
                .iter()
                .map(|c| match c.status {
                    CandidateStatus::Ok => {
                        let next = execute(&parse(&c.action_text).unwrap(), &start, &ctx).unwrap().scene;
                        oracle::lexical_score(&next, &prompt)
                    }
                    _ => current,
                })
                .collect();
            let mut best = 0;
            for (i, s) in scores.iter().enumerate() {
                if *s > scores[best] + 1e-12 {
                    best = i;
                }
            }
            for (c, s) in step.candidates.iter().zip(&scores) {
                check((c.score - s).abs() < 1e-12, || format!("seed {seed} step {t}: score {} vs {s}", c.score))?;
            }
            check(step.chosen == Some(best), || format!("seed {seed} step {t}: chose {:?}, oracle {best}", step.chosen))?;
            check(step.committed_score >= step.score_before, || format!("seed {seed} step {t}: score fell"))?;
            check((step.score_before - current).abs() < 1e-12, || format!("seed {seed} step {t}: chain broken"))?;
            current = step.committed_score;
            start = run.scenes[t].clone();
            steps += 1;
            commits += step.committed as usize;
        }
    }
    Ok(format!("25 runs, {steps} steps, {commits} commits"))
}

pub fn library_rule() -> Outcome {
    let rule = AdmissionRule::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut admitted = 0;
    for i in 0..10_000 {
        let (before, after) = match i % 4 {
            0 => (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
            // Near the 10% boundary.
            1 => {
                let b: f64 = rng.gen_range(0.01..0.9);
                (b, b * (1.1 + rng.gen_range(-1e-3..1e-3)))
            }
            // Near the zero guard.
            2 => (rng.gen_range(0.0..2e-6), rng.gen_range(0.0..1e-6)),
            _ => {
                let b = (rng.gen_range(1..100) as f64) / 100.0;
                (b, b * 1.1)
            }
        };
        let got = rule.admits(before, after);
        check(got == oracle::admits(before, after), || format!("({before}, {after}): {got}"))?;
        admitted += got as usize;
    }
    check(rule.admits(0.20, 0.22), || "exact 10% rejected".into())?;
    check(!rule.admits(0.20, 0.21), || "5% admitted".into())?;
    check(rule.admits(0.0, 0.05), || "zero guard".into())?;
    check(!rule.admits(0.0, 0.0), || "no change admitted at zero".into())?;
    Ok(format!("10000 pairs, {admitted} admitted"))
}

pub fn asset_loop() -> Outcome {
    let assets = toy_assets();
    let spread = ScriptedPlacement::world("small red book", &spread_targets());
    let mut verified = 0;
    for seed in 0..5 {
        let run = asset_run(&spread, seed, 10, 30);
        check(run.successes() == 10 && run.rounds.len() == 10, || {
            format!("seed {seed}: {} successes in {} rounds", run.successes(), run.rounds.len())
        })?;
        for s in intermediate_scenes(&run) {
            check(verify_scene(&s, &assets).unwrap().verified, || format!("seed {seed}: intermediate scene fails"))?;
            verified += 1;
        }
    }

    let floor = ScriptedPlacement::world("small red book", &[Vec3::new(2.0, 4.5, 0.0)]);
    let run = asset_run(&floor, 2, 10, 4);
    check(run.scene == table_scene(), || "off-surface round changed the scene".into())?;
    check(run.rounds.iter().any(|r| matches!(r.outcome, RoundOutcome::OffSurface { .. })), || "no off-surface round".into())?;
    check(run.successes() == 0, || "floor point accepted".into())?;

    let overlap = ScriptedPlacement::world("small red book", &[Vec3::new(2.0, 2.5, 0.75), Vec3::new(2.19, 2.5, 0.75)]);
    let run = asset_run(&overlap, 2, 10, 2);
    check(run.rounds[1].outcome == RoundOutcome::Collision { with: "book_1".into() }, || {
        format!("second round: {:?}", run.rounds[1].outcome)
    })?;
    check(run.scene.elements.len() == table_scene().elements.len() + 1, || "collision changed the scene".into())?;

    let stack = ScriptedPlacement::new(vec![
        ScriptedAnswer {
            description: "small red book".into(),
            target: Target::World([2.0, 2.5, 0.75]),
        },
        ScriptedAnswer {
            description: "black ballpoint pen".into(),
            target: Target::World([2.0, 2.5, 0.79]),
        },
    ]);
    let run = asset_run(&stack, 5, 2, 2);
    let supports: Vec<(String, String)> = run
        .rounds
        .iter()
        .filter_map(|r| match &r.outcome {
            RoundOutcome::Placed { element, support, .. } => Some((element.clone(), support.clone())),
            _ => None,
        })
        .collect();
    check(
        supports == [("book_1".to_string(), "table_1".to_string()), ("pen_1".to_string(), "book_1".to_string())],
        || format!("stacking: {supports:?}"),
    )?;
    Ok(format!("5 runs of 10, {verified} intermediate scenes verified, rejections and stacking hold"))
}

// ------------------------------------------------------------------- cli

fn cli(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_roomforge"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("{}: {}", args[0], String::from_utf8_lossy(&o.stderr).trim()));
    }
    Ok(String::from_utf8_lossy(&o.stdout).into_owned())
}

fn p(dir: &Path, rel: &str) -> String {
    dir.join(rel).to_string_lossy().into_owned()
}

pub fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = tmp.path();
    cli(&["demo", "--out", &p(d, "demo")])?;
    cli(&["build-room", "--layout", &p(d, "demo/layout.json"), "--out", &p(d, "room.json")])?;
    let prompt = fs::read_to_string(d.join("demo/prompt.txt")).map_err(|e| e.to_string())?;
    let prompt = prompt.trim();
    let data = ["--assets", &p(d, "demo/assets.jsonl"), "--materials", &p(d, "demo/materials.jsonl")];
    let score = |scene: &str| -> Result<f64, String> {
        let mut args = vec!["score", "--scene", scene, "--prompt", prompt];
        args.extend(data);
        cli(&args)?.trim().parse::<f64>().map_err(|e| e.to_string())
    };
    let room = p(d, "room.json");
    let initial = score(&room)?;
    let mut args = vec![
        "run-scene-policy",
        "--scene",
        &room,
        "--prompt",
        prompt,
        "--policy",
    ];
    let policy = format!("scripted:{}", p(d, "demo/scene_policy.txt"));
    let out1 = p(d, "scene_run");
    args.extend([policy.as_str(), "--steps", "10", "--candidates", "2", "--seed", "7", "--out-dir", &out1]);
    args.extend(data);
    cli(&args)?;
    let steps = fs::read_to_string(d.join("scene_run/trajectory.jsonl")).map_err(|e| e.to_string())?.lines().count();
    check(steps == 10, || format!("{steps} steps"))?;
    let after_scene = score(&p(d, "scene_run/final_scene.json"))?;

    let asset_policy = format!("scripted:{}", p(d, "demo/asset_policy.jsonl"));
    let summary = cli(&[
        "run-asset-policy",
        "--scene",
        &p(d, "scene_run/final_scene.json"),
        "--target",
        "table_1",
        "--prompt",
        "a few small red books on the table",
        "--policy",
        &asset_policy,
        "--seed",
        "3",
        "--max-placements",
        "10",
        "--assets",
        &p(d, "demo/assets.jsonl"),
        "--out-dir",
        &p(d, "asset_run"),
    ])?;
    let summary: serde_json::Value = serde_json::from_str(summary.trim()).map_err(|e| e.to_string())?;
    check(summary["successes"] == 10 && summary["verified"] == true, || format!("asset run: {summary}"))?;
    let last = score(&p(d, "asset_run/final_scene.json"))?;
    check(last > initial, || format!("final {last} not above initial {initial}"))?;
    Ok(format!("score {initial:.4} -> {after_scene:.4} (scene) -> {last:.4} (with 10 books)"))
}

// ---------------------------------------------------------------- remote

pub fn remote_contract() -> Outcome {
    let quick = |url: &str, retries: u32| {
        RemoteClient::new(
            url,
            RemoteConfig {
                retries,
                timeout: Duration::from_secs(5),
                ..RemoteConfig::default()
            },
        )
    };

    // Two server errors, then success: backoff of 1 s then 2 s.
    let flaky = MockServer::start(|_, _, n| {
        if n < 2 {
            (500, serde_json::json!({}))
        } else {
            (200, serde_json::json!({ "score": 0.5 }))
        }
    });
    let t = Instant::now();
    let s = RemoteScorer(quick(&flaky.url, 3)).score(&demo_room(), "den").map_err(|e| e.to_string())?;
    let waited = t.elapsed();
    check(s == 0.5 && flaky.requests().len() == 3, || "retry sequence".into())?;
    check(waited >= Duration::from_secs(3), || format!("backoff too short: {waited:?}"))?;

    let down = unreachable_url();
    let t = Instant::now();
    let err = RemoteScorer(quick(&down, 1)).score(&demo_room(), "den").unwrap_err();
    check(matches!(err, BackendError::Unreachable(_)) && t.elapsed() >= Duration::from_secs(1), || format!("{err:?}"))?;

    // All candidates failing leaves the scene untouched.
    let corpus = Corpus::new();
    let scorer = LexicalScorer::new(&corpus.assets, &corpus.materials);
    let small = ViewParams {
        width: 32,
        height: 32,
        pano_height: 16,
        ..ViewParams::default()
    };
    let loop_with = |policy: &dyn PolicyBackend, steps| {
        SceneLoop {
            policy,
            scorer: &scorer,
            exec: ExecutionContext::new(&corpus.assets, &corpus.materials),
            library: &Library::new(),
            config: SceneLoopConfig {
                steps,
                candidates: 3,
                seed: 0,
                views: small,
                ..SceneLoopConfig::default()
            },
        }
        .run(&demo_room(), "red chair")
    };
    let run = loop_with(&RemotePolicy(quick(&down, 0)), 2).map_err(|e| e.to_string())?;
    check(
        run.trajectory.steps.iter().all(|s| !s.committed)
            && run.final_scene() == Some(&demo_room())
            && run.trajectory.steps.iter().flat_map(|s| &s.candidates).all(|c| matches!(c.status, CandidateStatus::BackendError(_))),
        || "failed candidates changed the scene".into(),
    )?;

    // Wire format: the id map a mock receives decodes to the rendered one.
    let echo = MockServer::fixed_program("add_object(\"red wooden chair\", position=(1.0, 1.0, 0.0))");
    let run = loop_with(&RemotePolicy(quick(&echo.url, 0)), 1).map_err(|e| e.to_string())?;
    check(run.trajectory.steps[0].committed, || "echoed program not committed".into())?;
    let requests = echo.requests();
    let views = requests[0].1["views"].as_array().ok_or("no views on the wire")?;
    for (wire, view) in views.iter().zip(&run.views[0].views) {
        let map: WireMap = serde_json::from_value(wire["id_map"].clone()).map_err(|e| e.to_string())?;
        check(map.decode().map_err(|e| e.to_string())? == view.maps.ids, || format!("{} id map differs", view.name))?;
    }
    Ok(format!("backoff {waited:.1?}, soft failure no-op, {} views round-tripped", views.len()))
}
