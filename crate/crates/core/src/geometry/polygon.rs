//! Planar polygon helpers: orientation, simplicity, containment and ear
//! clipping.

use super::Vec2;

/// Shoelace signed area; positive for counterclockwise rings.
pub fn signed_area(ring: &[Vec2]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        * 0.5
}

fn cross(o: Vec2, a: Vec2, b: Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: Vec2, a: Vec2, b: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

/// Pairs of non-adjacent edges `(i, j)` that touch or cross. Edge `i` runs
/// from vertex `i` to vertex `i + 1`.
pub fn self_intersections(ring: &[Vec2]) -> Vec<(usize, usize)> {
    let n = ring.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]) {
                out.push((i, j));
            }
        }
    }
    // Adjacent edges may still fold back onto each other.
    for i in 0..n {
        let (a, b, c) = (ring[i], ring[(i + 1) % n], ring[(i + 2) % n]);
        if n > 2 && cross(a, b, c) == 0.0 && (b - a).dot(&(c - b)) < 0.0 {
            out.push((i, (i + 1) % n));
        }
    }
    out
}

/// Even-odd containment of `p` in the union of `rings`.
pub fn contains_point(rings: &[&[Vec2]], p: Vec2) -> bool {
    let mut inside = false;
    for ring in rings {
        let n = ring.len();
        for i in 0..n {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

/// Distance from `p` to the segment `a..b`.
pub fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + ab * t - p).norm()
}

/// Triangulates a simple counterclockwise ring by ear clipping. Returned
/// triangles index into `ring` and are counterclockwise.
///
/// Returns `None` when no ear can be found, which only happens for
/// non-simple input.
pub fn ear_clip(ring: &[Vec2]) -> Option<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..ring.len()).collect();
    // Drop collinear vertices; they would create zero-area ears.
    idx.retain(|&i| {
        let n = ring.len();
        cross(ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]) != 0.0
    });
    let mut out = Vec::with_capacity(idx.len().saturating_sub(2));
    while idx.len() > 3 {
        let n = idx.len();
        let ear = (0..n).find(|&k| {
            let (a, b, c) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let (pa, pb, pc) = (ring[a], ring[b], ring[c]);
            if cross(pa, pb, pc) <= 0.0 {
                return false;
            }
            idx.iter().all(|&j| {
                if j == a || j == b || j == c {
                    return true;
                }
                let p = ring[j];
                !(cross(pa, pb, p) >= 0.0 && cross(pb, pc, p) >= 0.0 && cross(pc, pa, p) >= 0.0)
            })
        })?;
        out.push([idx[(ear + n - 1) % n], idx[ear], idx[(ear + 1) % n]]);
        idx.remove(ear);
    }
    if idx.len() == 3 {
        out.push([idx[0], idx[1], idx[2]]);
    }
    Some(out)
}
