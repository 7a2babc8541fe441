//! Reference implementations that share no code with the library paths
//! they check.

use std::collections::BTreeMap;

use roomforge::geometry::Vec3;

/// Möller-Trumbore ray/triangle test, both faces, `t > 1e-12`.
pub fn moller_trumbore(origin: Vec3, dir: Vec3, tri: &[Vec3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 1e-12).then_some(t)
}

/// Nearest hit over a triangle soup by exhaustive search: (index, distance).
/// `dir` need not be normalized; distances are in units of `|dir|`.
pub fn nearest_hit(origin: Vec3, dir: Vec3, triangles: &[[Vec3; 3]]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, tri) in triangles.iter().enumerate() {
        if let Some(t) = moller_trumbore(origin, dir, tri) {
            if best.is_none_or(|(_, b)| t < b) {
                best = Some((i, t));
            }
        }
    }
    best
}

/// All hit distances along a ray, sorted ascending.
pub fn all_hits(origin: Vec3, dir: Vec3, triangles: &[[Vec3; 3]]) -> Vec<f64> {
    let mut hits: Vec<f64> = triangles.iter().filter_map(|t| moller_trumbore(origin, dir, t)).collect();
    hits.sort_by(f64::total_cmp);
    hits
}

pub fn shoelace(ring: &[[f64; 2]]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

pub fn triangle_area(t: &[Vec3; 3]) -> f64 {
    (t[1] - t[0]).cross(&(t[2] - t[0])).norm() * 0.5
}

fn words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.chars().filter(|c| !c.is_ascii_punctuation()).collect::<String>().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Smoothed TF-IDF cosine between `a` and `b`, with document frequencies
/// taken over `corpus`.
pub fn tfidf_cosine(corpus: &[&str], a: &str, b: &str) -> f64 {
    let n = corpus.len() as f64;
    let docs: Vec<Vec<String>> = corpus.iter().map(|d| words(d)).collect();
    let idf = |w: &str| {
        let df = docs.iter().filter(|d| d.iter().any(|x| x == w)).count() as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    };
    let vec = |text: &str| {
        let mut v: BTreeMap<String, f64> = BTreeMap::new();
        for w in words(text) {
            *v.entry(w).or_default() += 1.0;
        }
        for (w, x) in v.iter_mut() {
            *x *= idf(w);
        }
        v
    };
    let (va, vb) = (vec(a), vec(b));
    let dot: f64 = va.iter().map(|(w, x)| x * vb.get(w).unwrap_or(&0.0)).sum();
    let na = va.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = vb.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// The admission predicate for the in-context library, written out
/// directly.
pub fn admits(before: f64, after: f64) -> bool {
    let denom = if before > 1e-6 { before } else { 1e-6 };
    (after - before) / denom >= 0.1 - 1e-9
}

/// Words describing a scene's contents: materials, asset descriptions and
/// light kinds, gathered straight from the scene maps.
pub fn scene_words(scene: &roomforge::scene::Scene, asset_descriptions: &BTreeMap<String, String>) -> String {
    use roomforge::scene::ElementSource;
    let mut parts: Vec<String> = Vec::new();
    for el in scene.elements.values() {
        if let Some(m) = &el.material {
            parts.push(m.description.clone());
        }
        if let ElementSource::Asset(a) = &el.source {
            parts.push(asset_descriptions[a].clone());
        }
    }
    for l in scene.lights.values() {
        parts.push(format!("{:?}", l.kind).to_lowercase());
    }
    parts.join(" ")
}

/// Lexical score recomputed from scratch over the toy corpus.
pub fn lexical_score(scene: &roomforge::scene::Scene, prompt: &str) -> f64 {
    let descriptions: BTreeMap<String, String> = crate::fixtures::toy_asset_meshes()
        .into_iter()
        .map(|(id, d, _)| (id.to_string(), d.to_string()))
        .collect();
    tfidf_cosine(&crate::fixtures::toy_corpus(), prompt, &scene_words(scene, &descriptions)).clamp(0.0, 1.0)
}

/// Placeable surfaces by exhaustive enumeration: every upward triangle
/// within `max_dev_deg` of +z and flatter than `height_tol` is a plane
/// candidate; candidates sharing an edge (by exact vertex position) at the
/// same height are merged with a quadratic sweep. Returns `(height, area)`
/// sorted by height, then area.
pub fn plane_surfaces(triangles: &[[Vec3; 3]], min_area: f64, height_tol: f64, max_dev_deg: f64) -> Vec<(f64, f64)> {
    let cos = max_dev_deg.to_radians().cos();
    let flat: Vec<usize> = (0..triangles.len())
        .filter(|&i| {
            let t = &triangles[i];
            let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
            let zs = t.map(|v| v.z);
            let spread = zs.iter().cloned().fold(f64::MIN, f64::max) - zs.iter().cloned().fold(f64::MAX, f64::min);
            n.norm() > 0.0 && n.z / n.norm() > cos && spread <= height_tol
        })
        .collect();
    let shares_edge = |a: &[Vec3; 3], b: &[Vec3; 3]| a.iter().filter(|p| b.iter().any(|q| q == *p)).count() >= 2;
    let mean_z = |t: &[Vec3; 3]| (t[0].z + t[1].z + t[2].z) / 3.0;

    let mut group: Vec<usize> = (0..flat.len()).collect();
    let find = |g: &Vec<usize>, mut i: usize| {
        while g[i] != i {
            i = g[i];
        }
        i
    };
    for a in 0..flat.len() {
        for b in a + 1..flat.len() {
            let (ta, tb) = (&triangles[flat[a]], &triangles[flat[b]]);
            if shares_edge(ta, tb) && (mean_z(ta) - mean_z(tb)).abs() <= height_tol {
                let (ra, rb) = (find(&group, a), find(&group, b));
                group[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut acc: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for (k, &i) in flat.iter().enumerate() {
        let e = acc.entry(find(&group, k)).or_default();
        e.0 += mean_z(&triangles[i]);
        e.1 += triangle_area(&triangles[i]);
        e.2 += 1;
    }
    let mut out: Vec<(f64, f64)> = acc
        .values()
        .filter(|(_, area, _)| *area >= min_area)
        .map(|(z, area, n)| (z / *n as f64, *area))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

/// True when an edge of one triangle crosses the other strictly between
/// its endpoints. Coplanar overlap and touching at a vertex do not count.
pub fn triangles_cross(a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    let edge_hits = |s: &[Vec3; 3], t: &[Vec3; 3]| {
        (0..3).any(|i| {
            let (p, q) = (s[i], s[(i + 1) % 3]);
            moller_trumbore(p, q - p, t).is_some_and(|h| h > 1e-9 && h < 1.0 - 1e-9)
        })
    };
    edge_hits(a, b) || edge_hits(b, a)
}

/// All-pairs triangle crossing test between two soups.
pub fn soups_cross(a: &[[Vec3; 3]], b: &[[Vec3; 3]]) -> bool {
    a.iter().any(|x| b.iter().any(|y| triangles_cross(x, y)))
}
