//! Door and window fixture meshes, built directly in world coordinates.

use super::build::WallFrame;
use super::{Opening, OpeningKind, FOLD_ANGLE_DEG, FRAME_DEPTH};
use crate::geometry::shapes::oriented_box;
use crate::geometry::{TriangleMesh, Vec3};

/// Gap (m) between a folding door's hinge and the jamb, and between
/// double-door leaves.
const LEAF_GAP: f64 = 0.005;
const PANEL_THICKNESS: f64 = 0.03;
const GLASS_THICKNESS: f64 = 0.01;
const KNOB_HEIGHT: f64 = 1.0;

pub(super) struct FixturePart {
    /// `frame`, `panel` or `knob`.
    pub role: &'static str,
    pub mesh: TriangleMesh,
}

/// Box spanning `[s0, s1]` along the wall, `[d0, d1]` into the room and
/// `[z0, z1]` vertically.
fn wall_box(w: &WallFrame, s: [f64; 2], d: [f64; 2], z: [f64; 2]) -> TriangleMesh {
    let center = w.point((s[0] + s[1]) / 2.0, (d[0] + d[1]) / 2.0, (z[0] + z[1]) / 2.0);
    oriented_box(
        center,
        [
            w.along() * ((s[1] - s[0]) / 2.0),
            w.inward() * ((d[1] - d[0]) / 2.0),
            Vec3::z() * ((z[1] - z[0]) / 2.0),
        ],
    )
}

/// Box whose long axis leaves the wall at `angle` (radians, toward the
/// room), centered at wall coordinates `(s, d)`.
fn leaf_box(w: &WallFrame, s: f64, d: f64, angle: f64, half_len: f64, half_thick: f64, z: [f64; 2]) -> TriangleMesh {
    let (sin, cos) = angle.sin_cos();
    let u = w.along() * cos + w.inward() * sin;
    let v = -w.along() * sin + w.inward() * cos;
    oriented_box(
        w.point(s, d, (z[0] + z[1]) / 2.0),
        [u * half_len, v * half_thick, Vec3::z() * ((z[1] - z[0]) / 2.0)],
    )
}

pub(super) fn fixture_parts(w: &WallFrame, o: &Opening) -> Vec<FixturePart> {
    let m = 0.05_f64.min(o.width / 4.0).min(o.height / 4.0);
    let (left, right) = (o.offset, o.offset + o.width);
    let (bottom, top) = (o.sill, o.sill + o.height);
    let frame_d = [0.0, FRAME_DEPTH];

    // The outer rectangle of the frame is exactly the cutout.
    let mut frame = vec![
        wall_box(w, [left, left + m], frame_d, [bottom, top]),
        wall_box(w, [right - m, right], frame_d, [bottom, top]),
        wall_box(w, [left + m, right - m], frame_d, [top - m, top]),
    ];
    let (a, b) = (left + m, right - m);
    let mut z0 = bottom;
    let mut z1 = top - m;
    if o.kind == OpeningKind::Window {
        frame.push(wall_box(w, [a, b], frame_d, [bottom, bottom + m]));
        z0 = bottom + m;
    }
    if o.kind == OpeningKind::SlidingDoor {
        let track = 0.02_f64.min((z1 - z0) / 4.0);
        frame.push(wall_box(w, [a, b], frame_d, [z1 - track, z1]));
        z1 -= track;
    }

    let mid = (a + b) / 2.0;
    let panel_d = [0.01, 0.01 + PANEL_THICKNESS];
    let (panel, knob_d) = match o.kind {
        OpeningKind::SingleDoor => (vec![wall_box(w, [a, b], panel_d, [z0, z1])], [0.04, 0.10]),
        OpeningKind::DoubleDoor => (
            vec![
                wall_box(w, [a, mid - LEAF_GAP / 2.0], panel_d, [z0, z1]),
                wall_box(w, [mid + LEAF_GAP / 2.0, b], panel_d, [z0, z1]),
            ],
            [0.04, 0.10],
        ),
        OpeningKind::SlidingDoor => (
            // Pushed to the back of the frame, riding under the track.
            vec![wall_box(w, [a, b], [FRAME_DEPTH - 0.02, FRAME_DEPTH], [z0, z1])],
            [FRAME_DEPTH, FRAME_DEPTH + 0.06],
        ),
        OpeningKind::FoldingDoor => {
            let angle = FOLD_ANGLE_DEG.to_radians();
            let span = b - a - 2.0 * LEAF_GAP;
            let half_len = span / (4.0 * angle.cos());
            let hinge_d = FRAME_DEPTH / 2.0;
            let half_thick = 0.01;
            let s1 = a + LEAF_GAP + half_len * angle.cos();
            let s2 = a + LEAF_GAP + 3.0 * half_len * angle.cos();
            let d = hinge_d + half_len * angle.sin();
            (
                vec![
                    leaf_box(w, s1, d, angle, half_len, half_thick, [z0, z1]),
                    leaf_box(w, s2, d, -angle, half_len, half_thick, [z0, z1]),
                ],
                [0.06, 0.12],
            )
        }
        OpeningKind::Window => (
            vec![wall_box(w, [a, b], [0.02, 0.02 + GLASS_THICKNESS], [z0, z1])],
            [0.0, 0.0],
        ),
    };

    let mut parts = vec![
        FixturePart {
            role: "frame",
            mesh: TriangleMesh::merge(&frame),
        },
        FixturePart {
            role: "panel",
            mesh: TriangleMesh::merge(&panel),
        },
    ];
    if o.kind.is_door() && o.materials.knob.is_some() {
        let kw = 0.06_f64.min((b - a) / 4.0);
        let edge = if o.kind == OpeningKind::DoubleDoor { mid - LEAF_GAP } else { b } - 0.02;
        let kz = KNOB_HEIGHT.min((z0 + z1) / 2.0);
        let kh = 0.03_f64.min((z1 - z0) / 8.0);
        parts.push(FixturePart {
            role: "knob",
            mesh: wall_box(w, [edge - kw, edge], knob_d, [kz - kh, kz + kh]),
        });
    }
    parts
}
