//! Ray-triangle intersection over a small bounding volume hierarchy.

use crate::vec::Vec3;

#[derive(Clone, Copy, Debug)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    /// Global triangle index.
    pub prim: u32,
    /// Barycentric weights of vertices 1 and 2.
    pub u: f64,
    pub v: f64,
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Aabb {
        Aabb { lo: Vec3::splat(f64::INFINITY), hi: Vec3::splat(f64::NEG_INFINITY) }
    }

    fn grow(&mut self, p: Vec3) {
        self.lo = self.lo.min_elem(p);
        self.hi = self.hi.max_elem(p);
    }

    fn union(&mut self, o: &Aabb) {
        self.lo = self.lo.min_elem(o.lo);
        self.hi = self.hi.max_elem(o.hi);
    }

    #[inline]
    fn hit(&self, o: Vec3, inv: Vec3, tmin: f64, tmax: f64) -> bool {
        let mut t0 = tmin;
        let mut t1 = tmax;
        for a in 0..3 {
            let mut ta = (self.lo[a] - o[a]) * inv[a];
            let mut tb = (self.hi[a] - o[a]) * inv[a];
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            // NaN from 0 * inf keeps the slab open.
            if ta > t0 {
                t0 = ta;
            }
            if tb < t1 {
                t1 = tb;
            }
            if t0 > t1 * (1.0 + 4.0 * f64::EPSILON) {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    bounds: Aabb,
    /// Leaf: first primitive; inner: index of the right child.
    offset: u32,
    /// Zero for inner nodes.
    count: u32,
}

#[derive(Clone, Debug, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    tris: Vec<[Vec3; 3]>,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    pub fn build(tris: Vec<[Vec3; 3]>) -> Bvh {
        let mut bvh = Bvh { nodes: Vec::new(), order: (0..tris.len() as u32).collect(), tris };
        if !bvh.tris.is_empty() {
            let n = bvh.tris.len();
            bvh.build_node(0, n);
        }
        bvh
    }

    pub fn len(&self) -> usize {
        self.tris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    fn centroid(&self, i: u32) -> Vec3 {
        let [a, b, c] = self.tris[i as usize];
        (a + b + c) * (1.0 / 3.0)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let mut bounds = Aabb::empty();
        let mut cb = Aabb::empty();
        for &i in &self.order[start..end] {
            for p in self.tris[i as usize] {
                bounds.grow(p);
            }
            cb.grow(self.centroid(i));
        }
        let id = self.nodes.len();
        self.nodes.push(Node { bounds, offset: start as u32, count: (end - start) as u32 });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let ext = cb.hi - cb.lo;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let mid = (start + end) / 2;
        let mut slice: Vec<u32> = self.order[start..end].to_vec();
        slice.sort_by(|&a, &b| self.centroid(a)[axis].total_cmp(&self.centroid(b)[axis]));
        self.order[start..end].copy_from_slice(&slice);
        self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id].offset = right as u32;
        self.nodes[id].count = 0;
        let mut merged = self.nodes[id + 1].bounds;
        merged.union(&self.nodes[right].bounds);
        self.nodes[id].bounds = merged;
        id
    }

    /// Closest hit with `t` in the open interval `(tmin, tmax)`, skipping
    /// primitives listed in `skip`.
    pub fn intersect(&self, ray: &Ray, tmin: f64, tmax: f64, skip: &[u32]) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z);
        let mut best: Option<Hit> = None;
        let mut tmax = tmax;
        let mut stack = [0usize; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = self.nodes[stack[sp]];
            if !node.bounds.hit(ray.origin, inv, tmin, tmax) {
                continue;
            }
            if node.count > 0 {
                let s = node.offset as usize;
                for &prim in &self.order[s..s + node.count as usize] {
                    if skip.contains(&prim) {
                        continue;
                    }
                    if let Some((t, u, v)) = intersect_triangle(ray, &self.tris[prim as usize]) {
                        if t > tmin && t < tmax {
                            tmax = t;
                            best = Some(Hit { t, prim, u, v });
                        }
                    }
                }
            } else {
                let here = stack[sp];
                stack[sp] = here + 1;
                stack[sp + 1] = node.offset as usize;
                sp += 2;
            }
        }
        best
    }

    /// Whether anything is hit in `(tmin, tmax)`.
    pub fn occluded(&self, ray: &Ray, tmin: f64, tmax: f64, skip: &[u32]) -> bool {
        // Closest-hit traversal is cheap enough at the scene sizes handled here.
        self.intersect(ray, tmin, tmax, skip).is_some()
    }

    /// Reference implementation used to validate traversal.
    pub fn intersect_brute_force(&self, ray: &Ray, tmin: f64, tmax: f64, skip: &[u32]) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        let mut tmax = tmax;
        for (prim, tri) in self.tris.iter().enumerate() {
            if skip.contains(&(prim as u32)) {
                continue;
            }
            if let Some((t, u, v)) = intersect_triangle(ray, tri) {
                if t > tmin && t < tmax {
                    tmax = t;
                    best = Some(Hit { t, prim: prim as u32, u, v });
                }
            }
        }
        best
    }
}

/// Möller-Trumbore; two-sided.
#[inline]
pub fn intersect_triangle(ray: &Ray, tri: &[Vec3; 3]) -> Option<(f64, f64, f64)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = ray.dir.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - tri[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.dir.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some((e2.dot(q) * inv, u, v))
}
