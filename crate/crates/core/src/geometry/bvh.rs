use super::{Aabb, Ray, RayHit, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    /// Leaf: first primitive in `order`. Interior: index of the right child
    /// (the left child always follows its parent).
    start: u32,
    count: u32,
}

/// Bounding volume hierarchy over triangles, split at the centroid median
/// of the widest axis.
#[derive(Clone, Debug, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(triangles: &[[Vec3; 3]]) -> Bvh {
        if triangles.is_empty() {
            return Bvh::default();
        }
        let boxes: Vec<Aabb> = triangles.iter().map(Aabb::from_points).collect();
        let centroids: Vec<Vec3> = boxes.iter().map(Aabb::center).collect();
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1);
        build_node(&mut nodes, &mut order, 0, triangles.len(), &boxes, &centroids);
        Bvh { nodes, order }
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes.first().map_or(Aabb::empty(), |n| n.bounds)
    }

    /// Visits candidate primitives front to back, shrinking the search
    /// interval as `test` reports hits. Returns the nearest primitive hit.
    pub fn nearest(
        &self,
        ray: &Ray,
        mut test: impl FnMut(usize, f64) -> Option<RayHit>,
    ) -> Option<(usize, RayHit)> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z);
        let mut best: Option<(usize, RayHit)> = None;
        let mut t_max = f64::INFINITY;
        let mut stack: Vec<(u32, f64)> = Vec::with_capacity(64);
        if let Some(t) = slab(&self.nodes[0].bounds, ray, &inv, t_max) {
            stack.push((0, t));
        }
        while let Some((idx, t_enter)) = stack.pop() {
            if t_enter > t_max {
                continue;
            }
            let node = &self.nodes[idx as usize];
            if node.count > 0 {
                let start = node.start as usize;
                for &prim in &self.order[start..start + node.count as usize] {
                    if let Some(hit) = test(prim as usize, t_max.next_up()) {
                        // Ties on a shared edge keep the lowest primitive id.
                        let better = match best {
                            Some((p, h)) => {
                                hit.distance < h.distance
                                    || (hit.distance == h.distance && (prim as usize) < p)
                            }
                            None => true,
                        };
                        if better {
                            t_max = hit.distance;
                            best = Some((prim as usize, hit));
                        }
                    }
                }
                continue;
            }
            let (l, r) = (idx + 1, node.start);
            let tl = slab(&self.nodes[l as usize].bounds, ray, &inv, t_max);
            let tr = slab(&self.nodes[r as usize].bounds, ray, &inv, t_max);
            match (tl, tr) {
                (Some(a), Some(b)) => {
                    // Push the farther child first so the nearer pops first.
                    if a <= b {
                        stack.push((r, b));
                        stack.push((l, a));
                    } else {
                        stack.push((l, a));
                        stack.push((r, b));
                    }
                }
                (Some(a), None) => stack.push((l, a)),
                (None, Some(b)) => stack.push((r, b)),
                (None, None) => {}
            }
        }
        best
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    start: usize,
    end: usize,
    boxes: &[Aabb],
    centroids: &[Vec3],
) -> usize {
    let bounds = order[start..end]
        .iter()
        .fold(Aabb::empty(), |b, &i| b.union(&boxes[i as usize]));
    // Padding keeps rays grazing a face from slipping past the slab test.
    let pad = 1e-9 * (1.0 + bounds.extents().amax());
    let idx = nodes.len();
    nodes.push(Node {
        bounds: bounds.expanded(pad),
        start: start as u32,
        count: (end - start) as u32,
    });
    if end - start <= LEAF_SIZE {
        return idx;
    }
    let cbox = order[start..end]
        .iter()
        .fold(Aabb::empty(), |b, &i| b.grow(&centroids[i as usize]));
    let axis = cbox.extents().imax();
    if cbox.extents()[axis] <= 0.0 {
        return idx;
    }
    let mid = start + (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centroids[a as usize][axis].total_cmp(&centroids[b as usize][axis])
    });
    build_node(nodes, order, start, mid, boxes, centroids);
    let right = build_node(nodes, order, mid, end, boxes, centroids);
    nodes[idx].start = right as u32;
    nodes[idx].count = 0;
    idx
}

fn slab(b: &Aabb, ray: &Ray, inv: &Vec3, t_max: f64) -> Option<f64> {
    let mut t0 = 0.0_f64;
    let mut t1 = t_max;
    for i in 0..3 {
        let near = (b.min[i] - ray.origin[i]) * inv[i];
        let far = (b.max[i] - ray.origin[i]) * inv[i];
        let (lo, hi) = if near <= far { (near, far) } else { (far, near) };
        // NaN (origin on a slab plane of a zero-direction axis) keeps the
        // interval open.
        if lo > t0 {
            t0 = lo;
        }
        if hi < t1 {
            t1 = hi;
        }
        if t0 > t1 {
            return None;
        }
    }
    Some(t0)
}
