//! Incremental 3D Delaunay tetrahedralization.
//!
//! Bowyer–Watson insertion in Morton order with an infinite vertex closing the
//! hull. Conflicts use exact predicates; cospherical ties are broken by
//! symbolic perturbation ordered by point index.

use std::collections::HashMap;

use crate::convex::{initial_simplex, TET_FACES};
use crate::error::{HullError, Result};
use crate::predicates::{dist2, in_sphere, orient, Point};

const INF: u32 = u32::MAX;
pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Delaunay {
    pub points: Vec<Point>,
    /// Positively oriented finite tetrahedra.
    pub tets: Vec<[u32; 4]>,
    /// Tetrahedron opposite each vertex, or [`NONE`] on the convex hull.
    pub neighbors: Vec<[u32; 4]>,
    /// Input points skipped because they coincide with an earlier point.
    pub duplicates: Vec<u32>,
}

struct Builder<'a> {
    pts: &'a [Point],
    v: Vec<[u32; 4]>,
    n: Vec<[u32; 4]>,
    dead: Vec<bool>,
    free: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
    rng: u64,
    last: u32,
}

impl<'a> Builder<'a> {
    fn p(&self, i: u32) -> &Point {
        &self.pts[i as usize]
    }

    fn next_rand(&mut self) -> u64 {
        self.rng ^= self.rng << 13;
        self.rng ^= self.rng >> 7;
        self.rng ^= self.rng << 17;
        self.rng
    }

    fn alloc(&mut self, v: [u32; 4]) -> u32 {
        if let Some(id) = self.free.pop() {
            self.v[id as usize] = v;
            self.n[id as usize] = [NONE; 4];
            self.dead[id as usize] = false;
            id
        } else {
            self.v.push(v);
            self.n.push([NONE; 4]);
            self.dead.push(false);
            self.stamp.push(0);
            self.v.len() as u32 - 1
        }
    }

    fn orient_with(&self, v: [u32; 4], slot: usize, q: u32) -> f64 {
        let mut w = v;
        w[slot] = q;
        orient(self.p(w[0]), self.p(w[1]), self.p(w[2]), self.p(w[3]))
    }

    /// Perturbed in-sphere test of `q` against finite tetrahedron `t`.
    fn inside_sphere(&self, t: u32, q: u32) -> bool {
        let v = self.v[t as usize];
        let s = in_sphere(self.p(v[0]), self.p(v[1]), self.p(v[2]), self.p(v[3]), self.p(q));
        if s != 0.0 {
            return s > 0.0;
        }
        let mut order = [v[0], v[1], v[2], v[3], q];
        order.sort_unstable();
        for &top in order[2..].iter().rev() {
            if top == q {
                return false;
            }
            let slot = v.iter().position(|&x| x == top).unwrap();
            let o = self.orient_with(v, slot, q);
            if o != 0.0 {
                return o > 0.0;
            }
        }
        false
    }

    fn in_conflict(&self, t: u32, q: u32) -> bool {
        let v = self.v[t as usize];
        match v.iter().position(|&x| x == INF) {
            None => self.inside_sphere(t, q),
            Some(i) => {
                let o = self.orient_with(v, i, q);
                if o != 0.0 {
                    o > 0.0
                } else {
                    self.inside_sphere(self.n[t as usize][i], q)
                }
            }
        }
    }

    /// Visibility walk to a finite tetrahedron containing `q` or a ghost
    /// whose hull face `q` lies strictly beyond.
    fn locate(&mut self, q: u32) -> u32 {
        let mut t = self.last;
        let limit = 4 * self.v.len() + 64;
        'walk: for _ in 0..limit {
            let v = self.v[t as usize];
            if v.contains(&INF) {
                return t;
            }
            let r = (self.next_rand() % 4) as usize;
            for k in 0..4 {
                let i = (r + k) % 4;
                if self.orient_with(v, i, q) < 0.0 {
                    t = self.n[t as usize][i];
                    continue 'walk;
                }
            }
            return t;
        }
        // A walk this long means a degenerate cycle; fall back to a scan.
        (0..self.v.len() as u32)
            .find(|&t| !self.dead[t as usize] && self.in_conflict(t, q))
            .expect("some tetrahedron conflicts with a new point")
    }

    /// Inserts `q`; returns false if it duplicates an existing vertex.
    fn insert(&mut self, q: u32, cavity: &mut Vec<u32>, boundary: &mut Vec<(u32, usize, u32, usize)>) -> bool {
        let mut t = self.locate(q);
        let v = self.v[t as usize];
        if v.iter().any(|&x| x != INF && self.p(x) == self.p(q)) {
            return false;
        }
        if !self.in_conflict(t, q) {
            t = (0..self.v.len() as u32)
                .find(|&t| !self.dead[t as usize] && self.in_conflict(t, q))
                .expect("some tetrahedron conflicts with a new point");
        }

        self.epoch += 2;
        let (inside, outside) = (self.epoch, self.epoch + 1);
        cavity.clear();
        boundary.clear();
        self.stamp[t as usize] = inside;
        cavity.push(t);
        let mut head = 0;
        while head < cavity.len() {
            let c = cavity[head];
            head += 1;
            for i in 0..4 {
                let nb = self.n[c as usize][i];
                let s = self.stamp[nb as usize];
                if s == inside {
                    continue;
                }
                if s != outside && self.in_conflict(nb, q) {
                    self.stamp[nb as usize] = inside;
                    cavity.push(nb);
                } else {
                    self.stamp[nb as usize] = outside;
                    let back = self.n[nb as usize].iter().position(|&x| x == c).unwrap();
                    boundary.push((c, i, nb, back));
                }
            }
        }

        let old: Vec<[u32; 4]> = boundary.iter().map(|&(c, ..)| self.v[c as usize]).collect();
        for &c in cavity.iter() {
            self.dead[c as usize] = true;
            self.free.push(c);
        }
        let mut open: HashMap<(u32, u32), (u32, usize)> = HashMap::with_capacity(boundary.len() * 2);
        for (&(_, i, nb, back), &w0) in boundary.iter().zip(&old) {
            let mut w = w0;
            w[i] = q;
            let id = self.alloc(w);
            self.n[id as usize][i] = nb;
            self.n[nb as usize][back] = id;
            for j in 0..4 {
                if j == i {
                    continue;
                }
                let mut e = [0u32; 2];
                let mut m = 0;
                for (k, &x) in w.iter().enumerate() {
                    if k != i && k != j {
                        e[m] = x;
                        m += 1;
                    }
                }
                let key = (e[0].min(e[1]), e[0].max(e[1]));
                if let Some((other, slot)) = open.remove(&key) {
                    self.n[id as usize][j] = other;
                    self.n[other as usize][slot] = id;
                } else {
                    open.insert(key, (id, j));
                }
            }
            if !w.contains(&INF) {
                self.last = id;
            }
        }
        debug_assert!(open.is_empty());
        true
    }
}

/// Interleaves the low 21 bits of three integers.
fn morton(x: u64, y: u64, z: u64) -> u64 {
    fn spread(mut v: u64) -> u64 {
        v &= 0x1f_ffff;
        v = (v | v << 32) & 0x1f00000000ffff;
        v = (v | v << 16) & 0x1f0000ff0000ff;
        v = (v | v << 8) & 0x100f00f00f00f00f;
        v = (v | v << 4) & 0x10c30c30c30c30c3;
        v = (v | v << 2) & 0x1249249249249249;
        v
    }
    spread(x) | spread(y) << 1 | spread(z) << 2
}

fn morton_order(pts: &[Point]) -> Vec<u32> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in pts {
        for i in 0..3 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let scale: Vec<f64> = (0..3)
        .map(|i| {
            if hi[i] > lo[i] {
                2097151.0 / (hi[i] - lo[i])
            } else {
                0.0
            }
        })
        .collect();
    let mut keyed: Vec<(u64, u32)> = pts
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let c = |i: usize| ((p[i] - lo[i]) * scale[i]) as u64;
            (morton(c(0), c(1), c(2)), k as u32)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, k)| k).collect()
}

impl Delaunay {
    pub fn new(points: &[Point]) -> Result<Self> {
        if points.len() >= u32::MAX as usize - 1 || points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(HullError::Domain {
                quantity: "point coordinates",
                value: f64::NAN,
                range: "finite, fewer than 2^32 - 1 points",
            });
        }
        let s = initial_simplex(points).map_err(|dimension| HullError::Degenerate { dimension })?;
        let s = s.map(|k| k as u32);
        let mut b = Builder {
            pts: points,
            v: Vec::with_capacity(points.len() * 7),
            n: Vec::with_capacity(points.len() * 7),
            dead: Vec::new(),
            free: Vec::new(),
            stamp: Vec::new(),
            epoch: 0,
            rng: 0x9e37_79b9_7f4a_7c15,
            last: 0,
        };
        let root = b.alloc(s);
        for (i, f) in TET_FACES.iter().enumerate() {
            let g = b.alloc([s[f[0]], s[f[1]], s[f[2]], INF]);
            b.n[root as usize][i] = g;
            b.n[g as usize][3] = root;
        }
        for g in 1..5u32 {
            for j in 0..3 {
                let face: Vec<u32> = (0..4).filter(|&k| k != j).map(|k| b.v[g as usize][k]).collect();
                let other = (1..5u32)
                    .find(|&h| h != g && face.iter().all(|x| b.v[h as usize].contains(x)))
                    .unwrap();
                b.n[g as usize][j] = other;
            }
        }

        let mut duplicates = Vec::new();
        let mut cavity = Vec::new();
        let mut boundary = Vec::new();
        for q in morton_order(points) {
            if s.contains(&q) {
                continue;
            }
            if !b.insert(q, &mut cavity, &mut boundary) {
                duplicates.push(q);
            }
        }
        duplicates.sort_unstable();

        let mut remap = vec![NONE; b.v.len()];
        let mut tets = Vec::new();
        for (t, v) in b.v.iter().enumerate() {
            if !b.dead[t] && !v.contains(&INF) {
                remap[t] = tets.len() as u32;
                tets.push(*v);
            }
        }
        let neighbors =
            b.v.iter()
                .enumerate()
                .filter(|&(t, v)| !b.dead[t] && !v.contains(&INF))
                .map(|(t, _)| b.n[t].map(|x| remap[x as usize]))
                .collect();
        Ok(Self {
            points: points.to_vec(),
            tets,
            neighbors,
            duplicates,
        })
    }

    pub fn corners(&self, t: usize) -> [&Point; 4] {
        self.tets[t].map(|i| &self.points[i as usize])
    }

    /// Distance from every point to its nearest other input point; duplicates
    /// report zero.
    pub fn nearest_neighbor_distances(&self) -> Vec<f64> {
        let mut best = vec![f64::INFINITY; self.points.len()];
        for t in &self.tets {
            for a in 0..4 {
                for b in a + 1..4 {
                    let (i, j) = (t[a] as usize, t[b] as usize);
                    let d = dist2(&self.points[i], &self.points[j]);
                    best[i] = best[i].min(d);
                    best[j] = best[j].min(d);
                }
            }
        }
        for &d in &self.duplicates {
            best[d as usize] = 0.0;
            // The surviving copy is at distance zero as well.
            let p = self.points[d as usize];
            if let Some(k) = self.points.iter().position(|x| *x == p) {
                best[k] = 0.0;
            }
        }
        best.into_iter().map(f64::sqrt).collect()
    }

    /// Faces on the convex hull, outward.
    pub fn hull_faces(&self) -> Vec<[u32; 3]> {
        let mut out = Vec::new();
        for (t, nb) in self.neighbors.iter().enumerate() {
            for i in 0..4 {
                if nb[i] == NONE {
                    out.push(TET_FACES[i].map(|k| self.tets[t][k]));
                }
            }
        }
        out
    }
}
