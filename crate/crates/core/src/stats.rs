//! Curvature distributions along the rod and a two-sample test for clouds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::ActivationCoefficients;
use crate::cloud::worker_pool;
use crate::design::ManipulatorDesign;
use crate::error::{ModelError, Result};
use crate::fields::{bending_curvature, flat_coefficients, FieldTable};
use crate::sampling::SamplerConfig;

pub const HISTOGRAM_BINS: usize = 100;
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.50, 0.75, 0.95];

/// Six evenly spaced stations over the distal half, `Z/L = 0.5, …, 1.0`.
pub fn distal_stations(length: f64) -> Vec<f64> {
    (5..=10).map(|k| length * k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]` of the data; the top edge is closed.
    /// Constant data lands entirely in the first bin.
    pub fn of(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0u64; bins];
        if values.is_empty() {
            return Self {
                lo: 0.0,
                hi: 0.0,
                counts,
            };
        }
        let width = (hi - lo) / bins as f64;
        for &v in values {
            let b = if width > 0.0 { ((v - lo) / width) as usize } else { 0 };
            counts[b.min(bins - 1)] += 1;
        }
        Self { lo, hi, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / n as f64)
            .collect()
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let (i, f) = (h.floor() as usize, h.fract());
    if i + 1 < sorted.len() {
        sorted[i] + f * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationStatistics {
    pub z: f64,
    /// Histogram of the dimensionless curvature κL.
    pub histogram: Histogram,
    /// κL at [`QUANTILE_LEVELS`].
    pub quantiles: [f64; 5],
    pub min: f64,
    pub max: f64,
}

impl StationStatistics {
    pub fn percentile_95(&self) -> f64 {
        self.quantiles[4]
    }

    pub fn support(&self) -> f64 {
        self.max - self.min
    }
}

/// κL at each station for every sample of `sampler`.
pub fn curvature_statistics(
    design: &ManipulatorDesign,
    sampler: &SamplerConfig,
    stations: &[f64],
    workers: usize,
) -> Result<Vec<StationStatistics>> {
    let design = design.clone().validated()?;
    sampler.validate()?;
    let length = design.geometry.length;
    if let Some(&z) = stations.iter().find(|&&z| !(0.0..=length).contains(&z)) {
        return Err(ModelError::Domain {
            quantity: "station",
            value: z,
            range: format!("[0, {length}]"),
        });
    }
    let table = FieldTable::new(&design, stations)?;
    let bundles = design.bundle_count();
    let ns = stations.len();
    let mut kappa = vec![0.0; sampler.n_samples * ns];
    worker_pool(workers)?.install(|| {
        kappa.par_chunks_mut(256 * ns.max(1)).enumerate().for_each(|(c, out)| {
            let mut gamma = vec![0.0; bundles];
            let mut coeffs: Vec<ActivationCoefficients> = Vec::new();
            for (j, row) in out.chunks_mut(ns.max(1)).enumerate() {
                sampler.sample_into((c * 256 + j) as u64, &mut gamma);
                flat_coefficients(&design, &gamma, &mut coeffs);
                for (s, k) in row.iter_mut().enumerate() {
                    *k = bending_curvature(&table.fields(s, &coeffs)) * length;
                }
            }
        });
    });
    Ok((0..ns)
        .map(|s| {
            let mut v: Vec<f64> = kappa.iter().skip(s).step_by(ns).copied().collect();
            let histogram = Histogram::of(&v, HISTOGRAM_BINS);
            v.sort_by(f64::total_cmp);
            StationStatistics {
                z: stations[s],
                quantiles: QUANTILE_LEVELS.map(|q| quantile_sorted(&v, q)),
                min: histogram.lo,
                max: histogram.hi,
                histogram,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleTest {
    /// Energy distance `2E|X−Y| − E|X−X'| − E|Y−Y'|` (V-statistic).
    pub statistic: f64,
    pub p_value: f64,
    pub permutations: usize,
}

impl TwoSampleTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Energy distance between the points labelled `false` and `true`.
fn energy_for_labels(pooled: &[[f64; 3]], labels: &[bool]) -> f64 {
    let sums = pooled
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut s = [0.0; 3];
            for j in i + 1..pooled.len() {
                let d = dist(p, &pooled[j]);
                s[labels[i] as usize + labels[j] as usize] += d;
            }
            s
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold([0.0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    let m = labels.iter().filter(|&&l| l).count() as f64;
    let n = labels.len() as f64 - m;
    2.0 * sums[1] / (n * m) - 2.0 * sums[0] / (n * n) - 2.0 * sums[2] / (m * m)
}

pub fn energy_distance(x: &[[f64; 3]], y: &[[f64; 3]]) -> f64 {
    let pooled: Vec<[f64; 3]> = x.iter().chain(y).copied().collect();
    let labels: Vec<bool> = (0..pooled.len()).map(|i| i >= x.len()).collect();
    energy_for_labels(&pooled, &labels)
}

/// Permutation test of equal distributions. The p-value counts the observed
/// labelling as one of the permutations, so it is never below
/// `1/(permutations+1)`.
pub fn energy_test(x: &[[f64; 3]], y: &[[f64; 3]], permutations: usize, seed: u64) -> Result<TwoSampleTest> {
    if x.is_empty() || y.is_empty() {
        return Err(ModelError::Parameter("both samples must be nonempty".into()));
    }
    let pooled: Vec<[f64; 3]> = x.iter().chain(y).copied().collect();
    let mut labels: Vec<bool> = (0..pooled.len()).map(|i| i >= x.len()).collect();
    let statistic = energy_for_labels(&pooled, &labels);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exceed = 0;
    for _ in 0..permutations {
        labels.shuffle(&mut rng);
        if energy_for_labels(&pooled, &labels) >= statistic {
            exceed += 1;
        }
    }
    Ok(TwoSampleTest {
        statistic,
        p_value: (exceed + 1) as f64 / (permutations + 1) as f64,
        permutations,
    })
}

/// Tests whether `points` are distributed symmetrically about `x = 0`: the
/// first half is compared against the mirror image of the second half, so
/// the two samples are independent.
pub fn reflection_test(points: &[[f64; 3]], permutations: usize, seed: u64) -> Result<TwoSampleTest> {
    let half = points.len() / 2;
    let mirrored: Vec<[f64; 3]> = points[half..].iter().map(|p| [-p[0], p[1], p[2]]).collect();
    energy_test(&points[..half], &mirrored, permutations, seed)
}
