use std::fmt;

use serde::{Deserialize, Serialize};

use super::RoomLayoutSpec;
use crate::geometry::polygon::{self_intersections, signed_area};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TooFewVertices { count: usize },
    NonFinite,
    DegenerateEdge { wall: usize },
    SelfIntersection { edges: (usize, usize) },
    Orientation,
    WallHeight,
    WallIndex { opening: usize },
    OpeningRange { opening: usize, message: String },
    DoorSill { opening: usize },
    OpeningOverlap { openings: (usize, usize), amount: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewVertices { count } => write!(f, "polygon has {count} vertices, needs at least 3"),
            Violation::NonFinite => write!(f, "non-finite number in layout"),
            Violation::DegenerateEdge { wall } => write!(f, "wall {wall} has zero length"),
            Violation::SelfIntersection { edges: (a, b) } => {
                write!(f, "self-intersection between edges {a} and {b}")
            }
            Violation::Orientation => write!(f, "orientation: floor polygon must be counterclockwise"),
            Violation::WallHeight => write!(f, "wall height must be positive"),
            Violation::WallIndex { opening } => write!(f, "opening {opening} refers to a missing wall"),
            Violation::OpeningRange { opening, message } => write!(f, "opening {opening} out of range: {message}"),
            Violation::DoorSill { opening } => write!(f, "opening {opening} is a door with a non-zero sill"),
            Violation::OpeningOverlap {
                openings: (a, b),
                amount,
            } => write!(f, "opening overlap between openings {a} and {b} ({amount:.3} m)"),
        }
    }
}

/// Lists every problem with `spec`; an empty list means it can be built.
pub fn validate_layout(spec: &RoomLayoutSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let finite = spec.floor_polygon.iter().flatten().all(|c| c.is_finite())
        && spec.wall_height.is_finite()
        && spec
            .openings
            .iter()
            .all(|o| [o.offset, o.width, o.height, o.sill].iter().all(|c| c.is_finite()));
    if !finite {
        out.push(Violation::NonFinite);
        return out;
    }
    let n = spec.floor_polygon.len();
    if n < 3 {
        out.push(Violation::TooFewVertices { count: n });
        return out;
    }
    let ring = spec.ring();
    for i in 0..n {
        if spec.wall_length(i) == 0.0 {
            out.push(Violation::DegenerateEdge { wall: i });
        }
    }
    out.extend(
        self_intersections(&ring)
            .into_iter()
            .map(|edges| Violation::SelfIntersection { edges }),
    );
    if signed_area(&ring) <= 0.0 {
        out.push(Violation::Orientation);
    }
    if spec.wall_height <= 0.0 {
        out.push(Violation::WallHeight);
    }

    for (k, o) in spec.openings.iter().enumerate() {
        if o.wall_index >= n {
            out.push(Violation::WallIndex { opening: k });
            continue;
        }
        let range = |message: &str| Violation::OpeningRange {
            opening: k,
            message: message.into(),
        };
        if o.offset < 0.0 {
            out.push(range("negative offset"));
        }
        if o.width <= 0.0 || o.height <= 0.0 {
            out.push(range("width and height must be positive"));
        }
        if o.sill < 0.0 {
            out.push(range("negative sill"));
        }
        if o.offset + o.width > spec.wall_length(o.wall_index) {
            out.push(range("wider than the wall"));
        }
        if o.sill + o.height > spec.wall_height {
            out.push(range("taller than the wall"));
        }
        if o.kind.is_door() && o.sill != 0.0 {
            out.push(Violation::DoorSill { opening: k });
        }
    }
    for a in 0..spec.openings.len() {
        for b in a + 1..spec.openings.len() {
            let (oa, ob) = (&spec.openings[a], &spec.openings[b]);
            if oa.wall_index != ob.wall_index {
                continue;
            }
            let amount = (oa.offset + oa.width).min(ob.offset + ob.width) - oa.offset.max(ob.offset);
            if amount > 0.0 {
                out.push(Violation::OpeningOverlap {
                    openings: (a, b),
                    amount,
                });
            }
        }
    }
    out
}
