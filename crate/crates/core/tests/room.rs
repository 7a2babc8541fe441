use proptest::prelude::*;
use roomforge::geometry::Vec3;
use roomforge::room::{
    build_room, validate_layout, wall_frame, FixtureMaterials, Opening, OpeningKind, RoomLayoutSpec, Violation,
};
use roomforge::scene::{verify_scene, NoAssets, Scene};
use roomforge_testkit::oracle;

fn opening(wall_index: usize, offset: f64, width: f64, height: f64, sill: f64, kind: OpeningKind) -> Opening {
    Opening {
        wall_index,
        offset,
        width,
        height,
        sill,
        kind,
        materials: FixtureMaterials {
            frame: "white paint".into(),
            panel: "oak".into(),
            knob: Some("brass".into()),
        },
    }
}

fn mesh_area(scene: &Scene, name: &str) -> f64 {
    scene.room.as_ref().unwrap().meshes[name].total_area()
}

#[test]
fn rectangle_wall_areas() {
    let spec = RoomLayoutSpec::rectangle(4.0, 5.0, 2.8);
    let s = build_room(&spec).unwrap();
    let total: f64 = (0..4).map(|i| mesh_area(&s, &format!("wall_{i}"))).sum();
    assert!((total - 50.4).abs() < 1e-6);

    let mut spec = spec;
    spec.openings.push(opening(0, 1.0, 1.0, 2.1, 0.0, OpeningKind::SingleDoor));
    let s = build_room(&spec).unwrap();
    assert!((mesh_area(&s, "wall_0") - 9.1).abs() < 1e-6);
}

#[test]
fn l_shaped_floor_matches_shoelace() {
    let ring = [[0.0, 0.0], [6.0, 0.0], [6.0, 2.5], [2.5, 2.5], [2.5, 5.0], [0.0, 5.0]];
    let spec = RoomLayoutSpec {
        floor_polygon: ring.to_vec(),
        ..RoomLayoutSpec::rectangle(1.0, 1.0, 2.7)
    };
    let s = build_room(&spec).unwrap();
    let want = oracle::shoelace(&ring);
    assert!((mesh_area(&s, "floor_0") - want).abs() < 1e-9);
    assert!((mesh_area(&s, "ceiling_0") - want).abs() < 1e-9);
}

#[test]
fn validation_examples() {
    let ok = RoomLayoutSpec::rectangle(4.0, 5.0, 2.8);
    assert!(validate_layout(&ok).is_empty());

    let mut cw = ok.clone();
    cw.floor_polygon.reverse();
    assert!(validate_layout(&cw).contains(&Violation::Orientation));

    let mut two = ok.clone();
    two.openings.push(opening(1, 0.5, 1.0, 1.0, 1.0, OpeningKind::Window));
    two.openings.push(opening(1, 1.3, 1.0, 1.0, 1.0, OpeningKind::Window));
    let v = validate_layout(&two);
    // [0.5, 1.5] and [1.3, 2.3] share 0.2 m.
    assert!(v.iter().any(|x| matches!(x, Violation::OpeningOverlap { openings: (0, 1), amount } if (amount - 0.2).abs() < 1e-9)));
    assert!(build_room(&two).is_err());

    let mut wide = ok.clone();
    wide.openings.push(opening(0, 0.5, 4.0, 1.0, 1.0, OpeningKind::Window));
    assert!(matches!(validate_layout(&wide)[..], [Violation::OpeningRange { opening: 0, .. }]));

    let mut sill = ok;
    sill.openings.push(opening(0, 0.5, 1.0, 2.0, 0.1, OpeningKind::DoubleDoor));
    assert!(validate_layout(&sill).contains(&Violation::DoorSill { opening: 0 }));
}

/// Interval overlap written out directly.
fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

fn arb_layout() -> impl Strategy<Value = RoomLayoutSpec> {
    let kind = prop_oneof![
        Just(OpeningKind::SingleDoor),
        Just(OpeningKind::DoubleDoor),
        Just(OpeningKind::SlidingDoor),
        Just(OpeningKind::FoldingDoor),
        Just(OpeningKind::Window),
    ];
    (
        prop::collection::vec((0.0..1.0f64, 2.0..5.0f64), 3..9),
        2.4..3.2f64,
        prop::collection::vec((0..8usize, 0.0..1.0f64, 0.5..1.4f64, kind), 0..4),
    )
        .prop_map(|(pts, height, ops)| {
            // Star-shaped: evenly spread angles with jitter.
            let n = pts.len();
            let ring: Vec<[f64; 2]> = pts
                .iter()
                .enumerate()
                .map(|(i, (j, r))| {
                    let a = (i as f64 + 0.6 * j) / n as f64 * std::f64::consts::TAU;
                    [r * a.cos(), r * a.sin()]
                })
                .collect();
            let mut spec = RoomLayoutSpec {
                floor_polygon: ring,
                ..RoomLayoutSpec::rectangle(1.0, 1.0, height)
            };
            let mut used = Vec::new();
            for (w, t, width, kind) in ops {
                let w = w % n;
                let len = spec.wall_length(w);
                if used.contains(&w) || len < width + 0.4 {
                    continue;
                }
                used.push(w);
                let offset = 0.2 + t * (len - width - 0.4);
                let (sill, h) = if kind.is_door() { (0.0, 2.0) } else { (0.9, 1.0) };
                spec.openings.push(opening(w, offset, width, h, sill, kind));
            }
            spec
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shell_conserves_area(spec in arb_layout()) {
        let s = build_room(&spec).unwrap();
        let n = spec.floor_polygon.len();
        let walls: f64 = (0..n).map(|i| mesh_area(&s, &format!("wall_{i}"))).sum();
        let cut: f64 = spec.openings.iter().map(|o| o.width * o.height).sum();
        let want = spec.perimeter() * spec.wall_height - cut;
        prop_assert!((walls - want).abs() <= 1e-6 * want);

        let shoelace = oracle::shoelace(&spec.floor_polygon);
        let shell = s.room.as_ref().unwrap();
        let (floor, ceiling) = (&shell.meshes["floor_0"], &shell.meshes["ceiling_0"]);
        prop_assert!((floor.total_area() - shoelace).abs() <= 1e-9 * shoelace);
        prop_assert!((ceiling.total_area() - shoelace).abs() <= 1e-9 * shoelace);
        prop_assert!((0..floor.triangle_count()).all(|t| floor.normal(t).z > 0.999_999));
        prop_assert!((0..ceiling.triangle_count()).all(|t| ceiling.normal(t).z < -0.999_999));
        prop_assert!(verify_scene(&s, &NoAssets).unwrap().verified);
    }

    #[test]
    fn openings_are_empty_and_framed(spec in arb_layout()) {
        let s = build_room(&spec).unwrap();
        let shell = s.room.as_ref().unwrap();
        for (k, o) in spec.openings.iter().enumerate() {
            let w = wall_frame(&spec, o.wall_index);
            let local = |p: &Vec3| {
                let q = p.xy() - w.origin;
                (q.dot(&w.direction), p.z)
            };
            let s_range = (o.offset, o.offset + o.width);
            let z_range = (o.sill, o.sill + o.height);
            // No wall triangle covers any part of the cutout.
            let wall = &shell.meshes[&format!("wall_{}", o.wall_index)];
            for t in 0..wall.triangle_count() {
                let pts = wall.triangle(t).map(|p| local(&p));
                let ts = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.0), a.1.max(p.0)));
                let tz = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.1), a.1.max(p.1)));
                prop_assert!(overlap(ts, s_range) * overlap(tz, z_range) < 1e-12);
            }
            // The frame's outer footprint on the wall is the cutout.
            let prefix = if o.kind.is_door() { "door" } else { "window" };
            let frame = &shell.meshes[&format!("{prefix}_{k}_frame")];
            let pts: Vec<(f64, f64)> = frame.vertices().iter().map(local).collect();
            let fs = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.0), a.1.max(p.0)));
            let fz = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.1), a.1.max(p.1)));
            prop_assert!((fs.0 - s_range.0).abs() < 1e-9 && (fs.1 - s_range.1).abs() < 1e-9, "{:?} vs {:?}", fs, s_range);
            prop_assert!((fz.0 - z_range.0).abs() < 1e-9 && (fz.1 - z_range.1).abs() < 1e-9, "{:?} vs {:?}", fz, z_range);
        }
    }
}
