//! Occupancy-grid volume estimate used to cross-check α-shapes.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};
use crate::predicates::Point;

/// Voxel edge as a multiple of the nearest-neighbor distance quantile
/// [`VOXEL_NN_QUANTILE`]. Sparse regions set the scale so that sampling gaps
/// do not open holes.
pub const VOXEL_SPACING_FACTOR: f64 = 1.15;
pub const VOXEL_NN_QUANTILE: f64 = 0.99;
/// Empty cells with at least this many occupied face neighbors are filled.
pub const CLOSING_NEIGHBORS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoxelVolume {
    pub volume: f64,
    pub resolution: f64,
    pub occupied: usize,
    pub filled: usize,
}

const FACE_OFFSETS: [[i64; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];

/// Counts cells of edge `resolution` (on the grid through the origin) that
/// contain a point, then fills empty cells with at least
/// [`CLOSING_NEIGHBORS`] occupied face neighbors in a single pass.
pub fn voxel_volume(points: &[Point], resolution: f64) -> Result<VoxelVolume> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(HullError::Domain {
            quantity: "voxel resolution",
            value: resolution,
            range: "(0, inf)",
        });
    }
    let cell = |p: &Point| p.map(|x| (x / resolution).floor() as i64);
    let occupied: HashSet<[i64; 3]> = points.iter().map(cell).collect();
    let mut counts: HashMap<[i64; 3], usize> = HashMap::new();
    for c in &occupied {
        for o in FACE_OFFSETS {
            let n = [c[0] + o[0], c[1] + o[1], c[2] + o[2]];
            if !occupied.contains(&n) {
                *counts.entry(n).or_default() += 1;
            }
        }
    }
    let filled = counts.values().filter(|&&k| k >= CLOSING_NEIGHBORS).count();
    Ok(VoxelVolume {
        volume: (occupied.len() + filled) as f64 * resolution.powi(3),
        resolution,
        occupied: occupied.len(),
        filled,
    })
}

/// Resolution derived from per-point nearest-neighbor distances.
pub fn default_voxel_resolution(nn_distances: &[f64]) -> f64 {
    let mut d = nn_distances.to_vec();
    if d.is_empty() {
        return f64::NAN;
    }
    d.sort_by(f64::total_cmp);
    let i = ((d.len() - 1) as f64 * VOXEL_NN_QUANTILE).round() as usize;
    VOXEL_SPACING_FACTOR * d[i]
}
