//! Quickhull in three dimensions with exact visibility tests.

use robust::Coord;

use crate::error::{HullError, Result};
use crate::mesh::TriangleMesh;
use crate::predicates::{cross, dist2, dot, orient, sub, Point};

const NONE: u32 = u32::MAX;

/// Outward faces of a positively oriented tetrahedron, indexed by the
/// opposite vertex.
pub(crate) const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

struct Face {
    v: [u32; 3],
    /// Neighbor across edge `(v[k], v[k+1])`.
    nbr: [u32; 3],
    outside: Vec<u32>,
    alive: bool,
    normal: Point,
    offset: f64,
}

impl Face {
    fn new(v: [u32; 3], pts: &[Point]) -> Self {
        let (a, b, c) = (&pts[v[0] as usize], &pts[v[1] as usize], &pts[v[2] as usize]);
        let normal = cross(&sub(b, a), &sub(c, a));
        Self {
            v,
            nbr: [NONE; 3],
            outside: Vec::new(),
            alive: true,
            offset: dot(&normal, a),
            normal,
        }
    }

    fn above(&self, pts: &[Point], p: &Point) -> bool {
        orient(
            &pts[self.v[0] as usize],
            &pts[self.v[1] as usize],
            &pts[self.v[2] as usize],
            p,
        ) > 0.0
    }

    fn height(&self, p: &Point) -> f64 {
        dot(&self.normal, p) - self.offset
    }
}

fn collinear(a: &Point, b: &Point, c: &Point) -> bool {
    let proj = |p: &Point, i: usize, j: usize| Coord { x: p[i], y: p[j] };
    [(0, 1), (1, 2), (2, 0)]
        .iter()
        .all(|&(i, j)| robust::orient2d(proj(a, i, j), proj(b, i, j), proj(c, i, j)) == 0.0)
}

/// Four affinely independent points, or the affine dimension of the set.
pub(crate) fn initial_simplex(pts: &[Point]) -> std::result::Result<[usize; 4], usize> {
    if pts.is_empty() {
        return Err(0);
    }
    let i0 = (0..pts.len())
        .min_by(|&i, &j| pts[i].partial_cmp(&pts[j]).unwrap())
        .unwrap();
    let p0 = pts[i0];
    let i1 = (0..pts.len())
        .max_by(|&i, &j| dist2(&pts[i], &p0).total_cmp(&dist2(&pts[j], &p0)))
        .unwrap();
    if pts[i1] == p0 {
        return Err(0);
    }
    let p1 = pts[i1];
    let d01 = sub(&p1, &p0);
    let spread = |p: &Point| {
        let c = cross(&d01, &sub(p, &p0));
        dot(&c, &c)
    };
    let mut i2 = (0..pts.len())
        .max_by(|&i, &j| spread(&pts[i]).total_cmp(&spread(&pts[j])))
        .unwrap();
    if collinear(&p0, &p1, &pts[i2]) {
        i2 = (0..pts.len()).find(|&i| !collinear(&p0, &p1, &pts[i])).ok_or(1usize)?;
    }
    let p2 = pts[i2];
    let n = cross(&d01, &sub(&p2, &p0));
    let mut i3 = (0..pts.len())
        .max_by(|&i, &j| {
            dot(&n, &sub(&pts[i], &p0))
                .abs()
                .total_cmp(&dot(&n, &sub(&pts[j], &p0)).abs())
        })
        .unwrap();
    if orient(&p0, &p1, &p2, &pts[i3]) == 0.0 {
        i3 = (0..pts.len())
            .find(|&i| orient(&p0, &p1, &p2, &pts[i]) != 0.0)
            .ok_or(2usize)?;
    }
    if orient(&p0, &p1, &p2, &pts[i3]) > 0.0 {
        Ok([i0, i1, i2, i3])
    } else {
        Ok([i0, i2, i1, i3])
    }
}

/// Affine dimension of a point set (0 to 3).
pub fn affine_dimension(points: &[Point]) -> usize {
    match initial_simplex(points) {
        Ok(_) => 3,
        Err(d) => d,
    }
}

/// Convex hull as a closed outward triangle mesh over the hull vertices.
/// Coplanar hull regions come out triangulated.
pub fn convex_hull(points: &[Point]) -> Result<TriangleMesh> {
    let faces = convex_hull_faces(points)?;
    Ok(TriangleMesh {
        vertices: points.to_vec(),
        faces,
    }
    .compacted())
}

/// Hull faces indexing into `points`.
pub fn convex_hull_faces(pts: &[Point]) -> Result<Vec<[u32; 3]>> {
    let simplex = initial_simplex(pts).map_err(|dimension| HullError::Degenerate { dimension })?;
    let mut faces: Vec<Face> = TET_FACES
        .iter()
        .map(|f| Face::new(f.map(|k| simplex[k] as u32), pts))
        .collect();
    // Link the four initial faces through their shared edges.
    for i in 0..4 {
        for k in 0..3 {
            let (a, b) = (faces[i].v[k], faces[i].v[(k + 1) % 3]);
            let j = (0..4)
                .find(|&j| j != i && (0..3).any(|m| faces[j].v[m] == b && faces[j].v[(m + 1) % 3] == a))
                .unwrap();
            faces[i].nbr[k] = j as u32;
        }
    }
    for (i, p) in pts.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.above(pts, p)) {
            f.outside.push(i as u32);
        }
    }

    let mut stack: Vec<u32> = (0..4).filter(|&i| !faces[i as usize].outside.is_empty()).collect();
    let mut visible = Vec::new();
    let mut horizon: Vec<(u32, u32, u32)> = Vec::new();
    let mut dfs = Vec::new();
    let mut mark: Vec<u32> = Vec::new();
    let mut epoch = 0u32;
    while let Some(fi) = stack.pop() {
        let f = &faces[fi as usize];
        if !f.alive || f.outside.is_empty() {
            continue;
        }
        let eye = *f
            .outside
            .iter()
            .max_by(|&&a, &&b| f.height(&pts[a as usize]).total_cmp(&f.height(&pts[b as usize])))
            .unwrap();
        let ep = pts[eye as usize];

        epoch += 1;
        mark.resize(faces.len(), 0);
        visible.clear();
        horizon.clear();
        dfs.clear();
        dfs.push(fi);
        mark[fi as usize] = epoch;
        while let Some(g) = dfs.pop() {
            visible.push(g);
            for k in 0..3 {
                let h = faces[g as usize].nbr[k];
                if mark[h as usize] == epoch {
                    continue;
                }
                if faces[h as usize].above(pts, &ep) {
                    mark[h as usize] = epoch;
                    dfs.push(h);
                } else {
                    let v = faces[g as usize].v;
                    horizon.push((v[k], v[(k + 1) % 3], h));
                }
            }
        }

        // New cone faces (a, b, eye); edge k=0 faces the old neighbor.
        let first = faces.len() as u32;
        let mut start_at = std::collections::HashMap::with_capacity(horizon.len());
        let mut end_at = std::collections::HashMap::with_capacity(horizon.len());
        for (n, &(a, b, h)) in horizon.iter().enumerate() {
            let id = first + n as u32;
            let mut face = Face::new([a, b, eye], pts);
            face.nbr[0] = h;
            let hf = &mut faces[h as usize];
            let slot = (0..3).find(|&m| hf.v[m] == b && hf.v[(m + 1) % 3] == a).unwrap();
            hf.nbr[slot] = id;
            start_at.insert(a, id);
            end_at.insert(b, id);
            faces.push(face);
        }
        for n in 0..horizon.len() {
            let id = (first as usize) + n;
            let (a, b) = (faces[id].v[0], faces[id].v[1]);
            faces[id].nbr[1] = start_at[&b];
            faces[id].nbr[2] = end_at[&a];
        }

        let mut orphans = Vec::new();
        for &g in &visible {
            let g = &mut faces[g as usize];
            g.alive = false;
            orphans.append(&mut g.outside);
        }
        let new_ids = first..faces.len() as u32;
        for q in orphans {
            if q == eye {
                continue;
            }
            let p = &pts[q as usize];
            if let Some(id) = new_ids.clone().find(|&id| faces[id as usize].above(pts, p)) {
                faces[id as usize].outside.push(q);
            }
        }
        stack.extend(new_ids.filter(|&id| !faces[id as usize].outside.is_empty()));
    }
    Ok(faces.iter().filter(|f| f.alive).map(|f| f.v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::mesh_volume;

    fn cube_corners() -> Vec<Point> {
        (0..8)
            .map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64])
            .collect()
    }

    #[test]
    fn cube_corners_give_twelve_triangles() {
        let m = convex_hull(&cube_corners()).unwrap();
        assert_eq!(m.faces.len(), 12);
        assert!(m.is_closed() && m.is_two_manifold());
        assert!((mesh_volume(&m).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interior_and_face_points_are_not_vertices() {
        let mut p = cube_corners();
        p.extend([[0.5, 0.5, 0.5], [0.5, 0.5, 0.0], [1.0, 0.3, 0.7], [0.5, 0.0, 0.0]]);
        let m = convex_hull(&p).unwrap();
        assert!((mesh_volume(&m).unwrap() - 1.0).abs() < 1e-14);
        assert!(m.is_closed());
    }

    #[test]
    fn degenerate_inputs_report_dimension() {
        let dim = |p: &[Point]| match convex_hull(p) {
            Err(HullError::Degenerate { dimension }) => dimension,
            other => panic!("{other:?}"),
        };
        assert_eq!(dim(&[]), 0);
        assert_eq!(dim(&[[1.0, 2.0, 3.0]; 5]), 0);
        assert_eq!(dim(&[[0.0; 3], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [0.5, 0.5, 0.5]]), 1);
        let plane: Vec<Point> = (0..20)
            .map(|i| [i as f64 * 0.37 % 1.0, (i * i) as f64 * 0.11 % 1.0, 0.25])
            .collect();
        assert_eq!(dim(&plane), 2);
        assert_eq!(dim(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), 2);
    }
}
