//! Activation redundancy: how far apart, in activation space, are the
//! activations that reach the same neighborhood.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{worker_pool, ReachCloud};
use crate::error::{ModelError, Result};
use crate::stats::{quantile_sorted, QUANTILE_LEVELS};

pub const ISOLATED_COLOR: [u8; 3] = [200, 200, 200];

/// Uniform grid over point positions with cubic cells.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cell: f64,
    points: Vec<[f64; 3]>,
    /// Point indices grouped by cell.
    order: Vec<u32>,
    cells: HashMap<[i64; 3], (u32, u32)>,
}

impl SpatialIndex {
    pub fn build(points: &[[f64; 3]], cell: f64) -> Result<Self> {
        if !(cell > 0.0 && cell.is_finite()) {
            return Err(ModelError::Domain {
                quantity: "index cell size",
                value: cell,
                range: "(0, inf)".into(),
            });
        }
        let key = |p: &[f64; 3]| p.map(|x| (x / cell).floor() as i64);
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        order.sort_by_key(|&i| (key(&points[i as usize]), i));
        let mut cells = HashMap::new();
        let mut start = 0;
        while start < order.len() {
            let k = key(&points[order[start] as usize]);
            let mut end = start + 1;
            while end < order.len() && key(&points[order[end] as usize]) == k {
                end += 1;
            }
            cells.insert(k, (start as u32, end as u32));
            start = end;
        }
        Ok(Self {
            cell,
            points: points.to_vec(),
            order,
            cells,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Calls `f` for every point with `|p − q|² ≤ r²`, in no particular order.
    pub fn for_each_within(&self, q: &[f64; 3], r: f64, mut f: impl FnMut(u32)) {
        let r2 = r * r;
        let lo = q.map(|x| ((x - r) / self.cell).floor() as i64);
        let hi = q.map(|x| ((x + r) / self.cell).floor() as i64);
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    let Some(&(s, e)) = self.cells.get(&[i, j, k]) else {
                        continue;
                    };
                    for &idx in &self.order[s as usize..e as usize] {
                        if dist2(&self.points[idx as usize], q) <= r2 {
                            f(idx);
                        }
                    }
                }
            }
        }
    }

    /// Indices within `r` of `q`, sorted.
    pub fn within(&self, q: &[f64; 3], r: f64) -> Vec<u32> {
        let mut out = Vec::new();
        self.for_each_within(q, r, |i| out.push(i));
        out.sort_unstable();
        out
    }
}

pub fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

fn activation_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    /// Mean activation distance to the neighbors; `None` when isolated.
    pub d_bar: Option<f64>,
    pub k: u32,
}

impl Neighborhood {
    pub fn isolated(&self) -> bool {
        self.k == 0
    }
}

/// Mean activation-space distance from point `i` to the other points within
/// `r_s` of it. The point itself is not a neighbor.
pub fn mean_activation_distance(cloud: &ReachCloud, index: &SpatialIndex, i: usize, r_s: f64) -> Neighborhood {
    let gi = cloud.activation(i);
    let mut sum = 0.0;
    let mut k = 0u32;
    let mut neighbors = index.within(&cloud.positions[i], r_s);
    neighbors.retain(|&j| j as usize != i);
    for j in neighbors {
        sum += activation_distance(gi, cloud.activation(j as usize));
        k += 1;
    }
    Neighborhood {
        d_bar: (k > 0).then(|| sum / k as f64),
        k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    /// D̄ at the 5/25/50/75/95 % levels over non-isolated points.
    pub quantiles: [f64; 5],
    pub mean: f64,
    pub n_valid: usize,
    pub n_isolated: usize,
}

impl FieldSummary {
    pub fn median(&self) -> f64 {
        self.quantiles[2]
    }

    pub fn percentile_95(&self) -> f64 {
        self.quantiles[4]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationDistanceField {
    pub subset_indices: Vec<u32>,
    pub d_bar: Vec<Option<f64>>,
    pub k_neighbors: Vec<u32>,
    pub r_s: f64,
    pub seed: u64,
}

impl ActivationDistanceField {
    pub fn len(&self) -> usize {
        self.subset_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subset_indices.is_empty()
    }

    pub fn valid_values(&self) -> Vec<f64> {
        self.d_bar.iter().flatten().copied().collect()
    }

    pub fn summary(&self) -> FieldSummary {
        let mut v = self.valid_values();
        v.sort_by(f64::total_cmp);
        FieldSummary {
            quantiles: QUANTILE_LEVELS.map(|q| quantile_sorted(&v, q)),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            n_valid: v.len(),
            n_isolated: self.d_bar.len() - v.len(),
        }
    }

    /// Mean D̄ per cell of a `bins³` grid over the cloud's bounding box,
    /// for cells holding at least `min_count` non-isolated subset points.
    pub fn regional_means(&self, cloud: &ReachCloud, bins: usize, min_count: usize) -> Vec<Region> {
        let b = &cloud.bounds;
        let ext = b.extent();
        let mut acc: HashMap<[usize; 3], (f64, usize)> = HashMap::new();
        for (&i, d) in self.subset_indices.iter().zip(&self.d_bar) {
            let Some(d) = d else { continue };
            let p = cloud.positions[i as usize];
            let cell = [0, 1, 2].map(|a| {
                if ext[a] > 0.0 {
                    (((p[a] - b.min[a]) / ext[a] * bins as f64) as usize).min(bins - 1)
                } else {
                    0
                }
            });
            let e = acc.entry(cell).or_default();
            e.0 += d;
            e.1 += 1;
        }
        let mut regions: Vec<Region> = acc
            .into_iter()
            .filter(|(_, (_, n))| *n >= min_count)
            .map(|(cell, (s, n))| Region {
                cell,
                center: [0, 1, 2].map(|a| b.min[a] + ext[a] * (cell[a] as f64 + 0.5) / bins as f64),
                mean: s / n as f64,
                count: n,
            })
            .collect();
        regions.sort_by_key(|r| r.cell);
        regions
    }

    /// Mean D̄ over `sectors` equal azimuthal wedges about the rod axis, the
    /// first starting at the +x direction. Wedges without points are `None`.
    pub fn sector_means(&self, cloud: &ReachCloud, sectors: usize) -> Vec<Option<SectorMean>> {
        let mut acc = vec![(0.0, 0usize); sectors];
        for (&i, d) in self.subset_indices.iter().zip(&self.d_bar) {
            let Some(d) = d else { continue };
            let p = cloud.positions[i as usize];
            let theta = p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU);
            let k = ((theta / std::f64::consts::TAU * sectors as f64) as usize).min(sectors - 1);
            acc[k].0 += d;
            acc[k].1 += 1;
        }
        acc.into_iter()
            .map(|(s, n)| {
                (n > 0).then(|| SectorMean {
                    mean: s / n as f64,
                    count: n,
                })
            })
            .collect()
    }

    /// Header `index,x,y,z,d_bar,k,isolated`; isolated rows leave `d_bar` empty.
    pub fn write_csv<W: Write>(&self, cloud: &ReachCloud, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,x,y,z,d_bar,k,isolated")?;
        for ((&i, d), k) in self.subset_indices.iter().zip(&self.d_bar).zip(&self.k_neighbors) {
            let p = cloud.positions[i as usize];
            let d = d.map(|d| d.to_string()).unwrap_or_default();
            writeln!(w, "{i},{},{},{},{d},{k},{}", p[0], p[1], p[2], *k == 0)?;
        }
        w.flush()
    }

    /// Subset positions colored by D̄ through [`colormap`], scaled so that
    /// `d_max` maps to the top entry; isolated points are [`ISOLATED_COLOR`].
    pub fn write_ply<W: Write>(&self, cloud: &ReachCloud, d_max: f64, mut w: W) -> std::io::Result<()> {
        writeln!(w, "ply\nformat binary_little_endian 1.0")?;
        writeln!(
            w,
            "comment activation distance field r_s {:?} seed {}",
            self.r_s, self.seed
        )?;
        writeln!(w, "comment color scale 0 to {d_max:?}")?;
        writeln!(w, "element vertex {}", self.len())?;
        writeln!(w, "property double x\nproperty double y\nproperty double z")?;
        writeln!(w, "property uchar red\nproperty uchar green\nproperty uchar blue")?;
        writeln!(w, "property float d_bar\nproperty uint k")?;
        writeln!(w, "end_header")?;
        for ((&i, d), &k) in self.subset_indices.iter().zip(&self.d_bar).zip(&self.k_neighbors) {
            for x in cloud.positions[i as usize] {
                w.write_all(&x.to_le_bytes())?;
            }
            let rgb = match d {
                Some(d) => colormap(d / d_max),
                None => ISOLATED_COLOR,
            };
            w.write_all(&rgb)?;
            w.write_all(&(d.unwrap_or(f64::NAN) as f32).to_le_bytes())?;
            w.write_all(&k.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn save(&self, cloud: &ReachCloud, csv: Option<&Path>, ply: Option<&Path>, d_max: f64) -> Result<()> {
        fn to_file(p: &Path, f: impl FnOnce(std::io::BufWriter<std::fs::File>) -> std::io::Result<()>) -> Result<()> {
            std::fs::File::create(p)
                .and_then(|file| f(std::io::BufWriter::new(file)))
                .map_err(|source| ModelError::Io {
                    path: p.display().to_string(),
                    source,
                })
        }
        if let Some(p) = csv {
            to_file(p, |w| self.write_csv(cloud, w))?;
        }
        if let Some(p) = ply {
            to_file(p, |w| self.write_ply(cloud, d_max, w))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub cell: [usize; 3],
    pub center: [f64; 3],
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorMean {
    pub mean: f64,
    pub count: usize,
}

/// D̄ at a seeded random subset of `subset_size` cloud points, with neighbors
/// taken from the whole cloud. The subset is listed in increasing index order.
pub fn distance_field(
    cloud: &ReachCloud,
    subset_size: usize,
    r_s: f64,
    seed: u64,
    workers: usize,
) -> Result<ActivationDistanceField> {
    if subset_size > cloud.len() {
        return Err(ModelError::Parameter(format!(
            "subset of {subset_size} exceeds the cloud's {} points",
            cloud.len()
        )));
    }
    if !(r_s > 0.0) {
        return Err(ModelError::Domain {
            quantity: "r_s",
            value: r_s,
            range: "(0, inf)".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subset_indices: Vec<u32> = rand::seq::index::sample(&mut rng, cloud.len(), subset_size)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    subset_indices.sort_unstable();
    let index = SpatialIndex::build(&cloud.positions, r_s)?;
    let stats: Vec<Neighborhood> = worker_pool(workers)?.install(|| {
        subset_indices
            .par_iter()
            .map(|&i| mean_activation_distance(cloud, &index, i as usize, r_s))
            .collect()
    });
    Ok(ActivationDistanceField {
        subset_indices,
        d_bar: stats.iter().map(|s| s.d_bar).collect(),
        k_neighbors: stats.iter().map(|s| s.k).collect(),
        r_s,
        seed,
    })
}

/// Anchors of the D̄ colormap at t = 0, 0.25, 0.5, 0.75, 1: dark blue, blue,
/// teal, yellow-green, yellow.
const COLORMAP_ANCHORS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

/// 256-entry table interpolated linearly between [`COLORMAP_ANCHORS`].
pub fn colormap_table() -> [[u8; 3]; 256] {
    let mut t = [[0u8; 3]; 256];
    for (i, e) in t.iter_mut().enumerate() {
        let s = i as f64 / 255.0 * 4.0;
        let k = (s.floor() as usize).min(3);
        let f = s - k as f64;
        for c in 0..3 {
            let v = COLORMAP_ANCHORS[k][c] + f * (COLORMAP_ANCHORS[k + 1][c] - COLORMAP_ANCHORS[k][c]);
            e[c] = v.round() as u8;
        }
    }
    t
}

/// Entry of [`colormap_table`] for `t` in [0, 1] (clamped; NaN maps to 0).
pub fn colormap(t: f64) -> [u8; 3] {
    let i = if t.is_nan() {
        0
    } else {
        (t.clamp(0.0, 1.0) * 255.0).round() as usize
    };
    colormap_table()[i]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Aabb;
    use crate::sampling::SamplerConfig;
    use rand::Rng;

    pub(crate) fn synthetic(positions: Vec<[f64; 3]>, activations: Vec<f32>, bundles: usize) -> ReachCloud {
        ReachCloud {
            bounds: Aabb::of(&positions),
            colors: vec![[0; 3]; positions.len()],
            positions,
            activations,
            bundles,
            design_digest: String::new(),
            sampler: SamplerConfig::default(),
            design_json: None,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn index_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<[f64; 3]> = (0..100).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
        let idx = SpatialIndex::build(&pts, 0.2).unwrap();
        for _ in 0..50 {
            let q: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
            let r = rng.gen_range(0.0..0.5);
            let brute: Vec<u32> = (0..100u32).filter(|&i| dist2(&pts[i as usize], &q) <= r * r).collect();
            assert_eq!(idx.within(&q, r), brute);
        }
    }

    #[test]
    fn single_point_and_zero_radius() {
        let idx = SpatialIndex::build(&[[0.3, 0.1, 0.2]], 0.1).unwrap();
        assert_eq!(idx.within(&[0.3, 0.1, 0.2], 0.05), vec![0]);
        let idx = SpatialIndex::build(&[[0.0; 3], [0.0; 3], [1e-9, 0.0, 0.0]], 0.1).unwrap();
        assert_eq!(idx.within(&[0.0; 3], 0.0), vec![0, 1]);
    }

    #[test]
    fn isolated_and_coincident_points() {
        let c = synthetic(vec![[0.0; 3]], vec![0.0, 0.0], 2);
        let idx = SpatialIndex::build(&c.positions, 0.1).unwrap();
        assert_eq!(
            mean_activation_distance(&c, &idx, 0, 0.1),
            Neighborhood { d_bar: None, k: 0 }
        );

        let c = synthetic(vec![[0.5; 3], [0.5; 3]], vec![-1.0, 0.0, 0.0, -0.5, -1.0, 0.0], 3);
        let f = distance_field(&c, 2, 0.01, 0, 1).unwrap();
        let expected = (0.25f64 + 1.0).sqrt();
        assert_eq!(f.d_bar, vec![Some(expected), Some(expected)]);
        assert_eq!(f.k_neighbors, vec![1, 1]);
    }

    #[test]
    fn field_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pos: Vec<[f64; 3]> = (0..1000).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
        let act: Vec<f32> = (0..3000).map(|_| rng.gen_range(-1.6..0.0)).collect();
        let c = synthetic(pos, act, 3);
        let f = distance_field(&c, 20, 0.15, 4, 2).unwrap();
        for (&i, d) in f.subset_indices.iter().zip(&f.d_bar) {
            let i = i as usize;
            let (mut s, mut k) = (0.0, 0);
            for j in 0..c.len() {
                if j != i && dist2(&c.positions[i], &c.positions[j]) <= 0.15 * 0.15 {
                    s += activation_distance(c.activation(i), c.activation(j));
                    k += 1;
                }
            }
            let brute = (k > 0).then(|| s / k as f64);
            match (d, brute) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12 * b.max(1.0)),
                (a, b) => assert_eq!(*a, b),
            }
        }
        let g = distance_field(&c, 20, 0.15, 4, 1).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn sectors_split_by_azimuth() {
        let c = synthetic(
            vec![[1.0, 0.1, 0.0], [1.0, 0.1, 0.001], [-1.0, 0.1, 0.0], [-1.0, 0.1, 0.001]],
            vec![0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -2.0],
            2,
        );
        let f = distance_field(&c, 4, 0.01, 0, 1).unwrap();
        let s = f.sector_means(&c, 4);
        assert_eq!(s[0].unwrap(), SectorMean { mean: 1.0, count: 2 });
        assert_eq!(s[1].unwrap(), SectorMean { mean: 2.0, count: 2 });
        assert!(s[2].is_none() && s[3].is_none());
    }

    #[test]
    fn colormap_is_monotone_in_brightness() {
        let t = colormap_table();
        assert_eq!(t[0], [68, 1, 84]);
        assert_eq!(t[255], [253, 231, 37]);
        assert_eq!(colormap(f64::NAN), t[0]);
        assert_eq!(colormap(2.0), t[255]);
    }
}
