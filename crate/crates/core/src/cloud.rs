//! Reachability clouds: end-effector positions over sampled activations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::ActivationCoefficients;
use crate::design::ManipulatorDesign;
use crate::error::{ModelError, Result};
use crate::fields::{flat_coefficients, FieldTable};
use crate::kinematics::tip_from_table;
use crate::sampling::SamplerConfig;

/// Activation magnitude mapped to full channel intensity.
pub const COLOR_FULL_SCALE: f64 = 5.0 / 3.0;

/// Samples handed to a worker at a time; fixed so the partition never depends
/// on the thread count.
const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct CloudPoint {
    pub position: [f64; 3],
    pub activation: Vec<f32>,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn of(points: &[[f64; 3]]) -> Self {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for p in points {
            for i in 0..3 {
                min[i] = min[i].min(p[i]);
                max[i] = max[i].max(p[i]);
            }
        }
        Self { min, max }
    }

    pub fn extent(&self) -> [f64; 3] {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }
}

/// Cloud stored column-wise; [`ReachCloud::point`] gives the row view.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachCloud {
    pub positions: Vec<[f64; 3]>,
    /// Row-major, `bundles` values per point.
    pub activations: Vec<f32>,
    pub colors: Vec<[u8; 3]>,
    pub bundles: usize,
    pub design_digest: String,
    pub sampler: SamplerConfig,
    pub bounds: Aabb,
    /// Canonical JSON of the generating design, when known.
    pub design_json: Option<String>,
    /// Integrity warnings raised while loading.
    pub warnings: Vec<String>,
}

impl ReachCloud {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn activation(&self, i: usize) -> &[f32] {
        &self.activations[i * self.bundles..(i + 1) * self.bundles]
    }

    pub fn point(&self, i: usize) -> CloudPoint {
        CloudPoint {
            position: self.positions[i],
            activation: self.activation(i).to_vec(),
            color: self.colors[i],
        }
    }

    pub fn design(&self) -> Option<ManipulatorDesign> {
        self.design_json.as_deref().and_then(|j| serde_json::from_str(j).ok())
    }

    /// Records a warning when the cloud was not generated by `design`.
    pub fn check_design(&mut self, design: &ManipulatorDesign) -> bool {
        let digest = design.digest();
        if digest == self.design_digest {
            return true;
        }
        self.warnings.push(format!(
            "design digest mismatch: cloud {} vs expected {}",
            self.design_digest, digest
        ));
        false
    }

    /// Mirror image across the `x = 0` plane.
    pub fn reflected_positions(&self) -> Vec<[f64; 3]> {
        self.positions.iter().map(|p| [-p[0], p[1], p[2]]).collect()
    }
}

/// Colors from the first three bundles: channel `round(255·|γ|/(5/3))`,
/// halves rounded up and clamped to 255. Missing bundles give 0.
pub fn color_map(activation: &[f64]) -> [u8; 3] {
    let mut rgb = [0u8; 3];
    for (c, g) in rgb.iter_mut().zip(activation) {
        *c = (255.0 * g.abs() / COLOR_FULL_SCALE + 0.5).floor().min(255.0) as u8;
    }
    rgb
}

/// Rayon pool with exactly `workers` threads (0 means rayon's default).
pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ModelError::Parameter(format!("cannot build worker pool: {e}")))
}

/// Evaluates every sample; output order is the sample index order for any
/// worker count.
pub fn generate_cloud(design: &ManipulatorDesign, sampler: &SamplerConfig, workers: usize) -> Result<ReachCloud> {
    let design = design.clone().validated()?;
    sampler.validate()?;
    let bundles = design.bundle_count();
    let n = sampler.n_samples;
    let table = FieldTable::half_step_grid(&design, sampler.steps)?;
    let length = design.geometry.length;

    let mut positions = vec![[0.0; 3]; n];
    let mut activations = vec![0f32; n * bundles];
    let mut colors = vec![[0u8; 3]; n];

    let pool = worker_pool(workers)?;
    pool.install(|| {
        positions
            .par_chunks_mut(CHUNK)
            .zip(activations.par_chunks_mut(CHUNK * bundles))
            .zip(colors.par_chunks_mut(CHUNK))
            .enumerate()
            .for_each(|(c, ((pos, act), col))| {
                let mut gamma = vec![0.0; bundles];
                let mut coeffs: Vec<ActivationCoefficients> = Vec::with_capacity(design.architectures.len());
                for j in 0..pos.len() {
                    let k = (c * CHUNK + j) as u64;
                    sampler.sample_into(k, &mut gamma);
                    flat_coefficients(&design, &gamma, &mut coeffs);
                    let tip = tip_from_table(&table, &coeffs, length, sampler.steps);
                    pos[j] = [tip.x, tip.y, tip.z];
                    for (dst, &g) in act[j * bundles..(j + 1) * bundles].iter_mut().zip(&gamma) {
                        *dst = g as f32;
                    }
                    col[j] = color_map(&gamma);
                }
            });
    });

    if bundles != 3 {
        log::info!("color map uses the first three of {bundles} bundles");
    }
    let bounds = Aabb::of(&positions);
    Ok(ReachCloud {
        positions,
        activations,
        colors,
        bundles,
        design_digest: design.digest(),
        sampler: *sampler,
        bounds,
        design_json: Some(serde_json::to_string(&design).expect("design serializes")),
        warnings: Vec::new(),
    })
}

/// Position reached by one stored activation, integrated exactly as during
/// generation.
pub fn reintegrate(design: &ManipulatorDesign, activation: &[f32], steps: usize) -> Result<[f64; 3]> {
    if activation.len() != design.bundle_count() {
        return Err(ModelError::Shape(format!(
            "design has {} bundles, activation has {}",
            design.bundle_count(),
            activation.len()
        )));
    }
    let gamma: Vec<f64> = activation.iter().map(|&g| g as f64).collect();
    let table = FieldTable::half_step_grid(design, steps)?;
    let mut coeffs = Vec::new();
    flat_coefficients(design, &gamma, &mut coeffs);
    let tip = tip_from_table(&table, &coeffs, design.geometry.length, steps);
    Ok([tip.x, tip.y, tip.z])
}
