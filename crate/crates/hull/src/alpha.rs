//! α-shapes from the Delaunay tetrahedralization and data-driven α selection.

use serde::{Deserialize, Serialize};

use crate::convex::TET_FACES;
use crate::delaunay::{Delaunay, NONE};
use crate::error::{HullError, Result};
use crate::mesh::TriangleMesh;
use crate::predicates::{circumradius, dist2, signed_volume, Point};
use crate::voxel::{default_voxel_resolution, voxel_volume};

/// Candidate multiples of the median nearest-neighbor distance.
pub const ALPHA_MULTIPLIERS: [f64; 5] = [4.0, 6.0, 8.0, 12.0, 16.0];
pub const DEFAULT_MULTIPLIER: f64 = 8.0;
/// Relative α-shape/voxel volume gap accepted by [`auto_alpha`].
pub const VOXEL_AGREEMENT: f64 = 0.10;

#[derive(Debug, Clone)]
pub struct AlphaShape {
    pub mesh: TriangleMesh,
    pub volume: f64,
    pub alpha: f64,
    pub tets_kept: usize,
    pub components_discarded: usize,
}

/// Delaunay tetrahedralization with per-tetrahedron circumradii and volumes.
#[derive(Debug, Clone)]
pub struct AlphaComplex {
    pub delaunay: Delaunay,
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
}

impl AlphaComplex {
    pub fn new(points: &[Point]) -> Result<Self> {
        Ok(Self::from_delaunay(Delaunay::new(points)?))
    }

    pub fn from_delaunay(delaunay: Delaunay) -> Self {
        let (radii, volumes) = (0..delaunay.tets.len())
            .map(|t| {
                let [a, b, c, d] = delaunay.corners(t);
                (circumradius(a, b, c, d), signed_volume(a, b, c, d))
            })
            .unzip();
        Self {
            delaunay,
            radii,
            volumes,
        }
    }

    /// Volume of the union of all Delaunay tetrahedra, i.e. the convex hull.
    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn median_nn_distance(&self) -> f64 {
        median(self.delaunay.nearest_neighbor_distances())
    }

    pub fn default_voxel_resolution(&self) -> f64 {
        default_voxel_resolution(&self.delaunay.nearest_neighbor_distances())
    }

    /// Boundary of the largest (by volume) face-connected component of the
    /// tetrahedra with circumradius ≤ `alpha`.
    pub fn shape(&self, alpha: f64) -> Result<AlphaShape> {
        if !(alpha > 0.0) {
            return Err(HullError::Domain {
                quantity: "alpha",
                value: alpha,
                range: "(0, inf]",
            });
        }
        let n = self.radii.len();
        let kept: Vec<bool> = self.radii.iter().map(|&r| r <= alpha).collect();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(p: &mut [u32], mut x: u32) -> u32 {
            while p[x as usize] != x {
                p[x as usize] = p[p[x as usize] as usize];
                x = p[x as usize];
            }
            x
        }
        for t in 0..n {
            if !kept[t] {
                continue;
            }
            for &nb in &self.delaunay.neighbors[t] {
                if nb != NONE && kept[nb as usize] {
                    let (a, b) = (find(&mut parent, t as u32), find(&mut parent, nb));
                    if a != b {
                        parent[a.max(b) as usize] = a.min(b);
                    }
                }
            }
        }
        let mut comp_volume = vec![0.0; n];
        let mut roots = 0;
        for t in 0..n {
            if kept[t] {
                let r = find(&mut parent, t as u32) as usize;
                if r == t {
                    roots += 1;
                }
                comp_volume[r] += self.volumes[t];
            }
        }
        if roots == 0 {
            return Err(HullError::EmptyShape { alpha });
        }
        // Largest volume; ties go to the component whose first tetrahedron
        // comes first.
        let best = (0..n)
            .filter(|&t| kept[t] && parent[t] == t as u32)
            .fold(None, |acc: Option<usize>, t| match acc {
                Some(b) if comp_volume[b] >= comp_volume[t] => Some(b),
                _ => Some(t),
            })
            .unwrap() as u32;

        let mut faces = Vec::new();
        let mut volume = 0.0;
        let mut tets_kept = 0;
        for t in 0..n {
            if !kept[t] || find(&mut parent, t as u32) != best {
                continue;
            }
            tets_kept += 1;
            volume += self.volumes[t];
            for i in 0..4 {
                let nb = self.delaunay.neighbors[t][i];
                let inside = nb != NONE && kept[nb as usize] && find(&mut parent, nb) == best;
                if !inside {
                    faces.push(TET_FACES[i].map(|k| self.delaunay.tets[t][k]));
                }
            }
        }
        let mesh = TriangleMesh {
            vertices: self.delaunay.points.clone(),
            faces,
        }
        .compacted();
        Ok(AlphaShape {
            mesh,
            volume,
            alpha,
            tets_kept,
            components_discarded: roots - 1,
        })
    }
}

pub fn alpha_shape(points: &[Point], alpha: f64) -> Result<AlphaShape> {
    AlphaComplex::new(points)?.shape(alpha)
}

pub(crate) fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSelection {
    pub alpha: f64,
    pub multiplier: f64,
    pub median_nn: f64,
    pub alpha_volume: f64,
    pub voxel_volume: f64,
    pub voxel_resolution: f64,
    /// Whether the chosen α-shape volume lies within [`VOXEL_AGREEMENT`] of
    /// the voxel volume. When no candidate does, the closest one is used.
    pub matched: bool,
}

/// Picks the smallest multiplier in [`ALPHA_MULTIPLIERS`] whose α-shape volume
/// agrees with the voxel estimate.
pub fn select_alpha(complex: &AlphaComplex, voxel_resolution: f64) -> Result<AlphaSelection> {
    let points = &complex.delaunay.points;
    let median_nn = complex.median_nn_distance();
    let voxel = voxel_volume(points, voxel_resolution)?.volume;
    let mut best: Option<(f64, AlphaSelection)> = None;
    for &m in &ALPHA_MULTIPLIERS {
        let alpha = m * median_nn;
        let v = match complex.shape(alpha) {
            Ok(s) => s.volume,
            Err(HullError::EmptyShape { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        let gap = (v - voxel).abs() / voxel;
        let sel = AlphaSelection {
            alpha,
            multiplier: m,
            median_nn,
            alpha_volume: v,
            voxel_volume: voxel,
            voxel_resolution,
            matched: gap <= VOXEL_AGREEMENT,
        };
        if sel.matched {
            return Ok(sel);
        }
        if best.map_or(true, |(g, _)| gap < g) {
            best = Some((gap, sel));
        }
    }
    let (_, sel) = best.expect("at least one multiplier");
    log::warn!(
        "no alpha multiplier within {:.0}% of the voxel volume; using {} (gap {:.1}%)",
        VOXEL_AGREEMENT * 100.0,
        sel.multiplier,
        (sel.alpha_volume - sel.voxel_volume).abs() / sel.voxel_volume * 100.0
    );
    Ok(sel)
}

/// α for a raw point set. Sets that cannot be tetrahedralized fall back to the
/// default multiplier of their median nearest-neighbor distance.
pub fn auto_alpha(points: &[Point]) -> Result<AlphaSelection> {
    if points.len() < 2 {
        return Err(HullError::Degenerate { dimension: 0 });
    }
    match AlphaComplex::new(points) {
        Ok(c) => select_alpha(&c, c.default_voxel_resolution()),
        Err(HullError::Degenerate { .. }) => {
            let nn: Vec<f64> = points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    points
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, q)| dist2(p, q))
                        .fold(f64::INFINITY, f64::min)
                        .sqrt()
                })
                .collect();
            let median_nn = median(nn);
            Ok(AlphaSelection {
                alpha: DEFAULT_MULTIPLIER * median_nn,
                multiplier: DEFAULT_MULTIPLIER,
                median_nn,
                alpha_volume: 0.0,
                voxel_volume: 0.0,
                voxel_resolution: 0.0,
                matched: false,
            })
        }
        Err(e) => Err(e),
    }
}
