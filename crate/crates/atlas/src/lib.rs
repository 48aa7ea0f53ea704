//! Sweeps of the minimal design over fiber revolution Ω and taper angle φ,
//! with per-cell hull metrics, volume optimum and UNR trend statistics.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use reachcloud_core::{
    generate_cloud, helical_angle_from_revolution, minimal_design, validate_design, ManipulatorDesign, SamplerConfig,
};
use reachcloud_hull::{analyze_points, AlphaChoice, HullMetrics};

pub mod error;
pub mod export;
pub mod manifest;
pub mod trend;

pub use error::{AtlasError, Result};
pub use export::{export_atlas, read_atlas_csv, write_atlas_csv, AtlasRow};
pub use manifest::{sha256_file, RunManifest};
pub use trend::{spearman, trend_statistics, TrendReport};

/// Inclusive uniform grid of `n` values from `lo` to `hi`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasSpec {
    /// Fiber revolutions, radians.
    pub omega_values: Vec<f64>,
    /// Taper angles, radians.
    pub phi_values: Vec<f64>,
    /// Template whose helical architectures take `±α(Ω, φ)` by the sign of
    /// their own α; longitudinal ones (α = 0) stay longitudinal.
    pub base_design: ManipulatorDesign,
    pub sampler: SamplerConfig,
    pub alpha: AlphaChoice,
}

impl AtlasSpec {
    /// Minimal-design sweep over `[0°, omega_max] × [0°, phi_max]`.
    pub fn uniform(n_omega: usize, n_phi: usize, omega_max_deg: f64, phi_max_deg: f64, sampler: SamplerConfig) -> Self {
        Self {
            omega_values: uniform_grid(0.0, omega_max_deg, n_omega)
                .into_iter()
                .map(f64::to_radians)
                .collect(),
            phi_values: uniform_grid(0.0, phi_max_deg, n_phi)
                .into_iter()
                .map(f64::to_radians)
                .collect(),
            base_design: minimal_design(108f64.to_radians(), 0.0),
            sampler,
            alpha: AlphaChoice::Auto,
        }
    }

    /// Full 16×16 grid over [0°, 108°] × [0°, 3°] with 4·10⁵ samples per cell.
    pub fn full(seed: u64) -> Self {
        Self::uniform(
            16,
            16,
            108.0,
            3.0,
            SamplerConfig {
                seed,
                ..Default::default()
            },
        )
    }

    /// Reduced 8×8 grid with 5·10⁴ samples per cell.
    pub fn desk(seed: u64) -> Self {
        Self::uniform(
            8,
            8,
            108.0,
            3.0,
            SamplerConfig {
                n_samples: 50_000,
                seed,
                ..Default::default()
            },
        )
    }

    pub fn cell_count(&self) -> usize {
        self.omega_values.len() * self.phi_values.len()
    }

    pub fn cell_design(&self, omega: f64, phi: f64) -> ManipulatorDesign {
        let mut d = self.base_design.clone();
        d.geometry.phi = phi;
        let alpha = helical_angle_from_revolution(&d.geometry, omega);
        for a in &mut d.architectures {
            if a.alpha != 0.0 {
                a.alpha = alpha.copysign(a.alpha);
            }
        }
        d
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("omega_values", &self.omega_values), ("phi_values", &self.phi_values)] {
            if grid.is_empty() {
                return Err(AtlasError::Spec(format!("{name} is empty")));
            }
            if grid.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(AtlasError::Spec(format!("{name} must be strictly increasing")));
            }
        }
        self.sampler.validate()?;
        for &o in &self.omega_values {
            for &p in &self.phi_values {
                let v = validate_design(&self.cell_design(o, p));
                if !v.is_empty() {
                    return Err(AtlasError::Spec(format!(
                        "cell (omega {:.3}°, phi {:.3}°) is invalid: {}",
                        o.to_degrees(),
                        p.to_degrees(),
                        v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasCell {
    pub omega_index: usize,
    pub phi_index: usize,
    pub omega: f64,
    pub phi: f64,
    pub length: f64,
    pub design_digest: String,
    pub sampler_digest: String,
    pub n_points: usize,
    pub metrics: Option<HullMetrics>,
    pub error: Option<String>,
    #[serde(skip)]
    pub runtime_s: f64,
}

impl AtlasCell {
    /// Concave volume in units of L³.
    pub fn v_norm(&self) -> Option<f64> {
        self.metrics.as_ref().map(|m| m.v_concave / self.length.powi(3))
    }

    pub fn unr(&self) -> Option<f64> {
        self.metrics.as_ref().map(|m| m.unr)
    }

    pub fn dir_name(&self) -> String {
        format!("omega_{}_phi_{}", self.omega_index, self.phi_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasResult {
    pub spec: AtlasSpec,
    /// Row-major: all φ for the first Ω, then the next Ω.
    pub cells: Vec<AtlasCell>,
}

impl AtlasResult {
    pub fn cell(&self, omega_index: usize, phi_index: usize) -> &AtlasCell {
        &self.cells[omega_index * self.spec.phi_values.len() + phi_index]
    }

    pub fn failed(&self) -> Vec<&AtlasCell> {
        self.cells.iter().filter(|c| c.error.is_some()).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Cells evaluated at once (0: one per available core).
    pub workers: usize,
    /// Finished cells are stored here and reused on later runs.
    pub cache_dir: Option<PathBuf>,
    /// When set, each cell's cloud and concave hull are written under
    /// `<dir>/cells/omega_<i>_phi_<j>/`.
    pub retain_dir: Option<PathBuf>,
}

fn cache_key(design_digest: &str, sampler_digest: &str, alpha: &AlphaChoice) -> String {
    use sha2::{Digest, Sha256};
    let alpha = serde_json::to_string(alpha).expect("alpha serializes");
    let h = Sha256::digest(format!(
        "{design_digest}:{sampler_digest}:{alpha}:{}",
        reachcloud_core::TOOL_VERSION
    ));
    hex::encode(h)
}

/// Generates and analyzes one cell. Failures are recorded on the cell.
pub fn run_cell(spec: &AtlasSpec, omega_index: usize, phi_index: usize, options: &RunOptions) -> AtlasCell {
    let (omega, phi) = (spec.omega_values[omega_index], spec.phi_values[phi_index]);
    let design = spec.cell_design(omega, phi);
    let mut cell = AtlasCell {
        omega_index,
        phi_index,
        omega,
        phi,
        length: design.geometry.length,
        design_digest: design.digest(),
        sampler_digest: spec.sampler.digest(),
        n_points: 0,
        metrics: None,
        error: None,
        runtime_s: 0.0,
    };
    let key = cache_key(&cell.design_digest, &cell.sampler_digest, &spec.alpha);
    let cached = options.cache_dir.as_ref().map(|d| d.join(format!("{key}.json")));
    if let Some(path) = &cached {
        if let Some(hit) = std::fs::read_to_string(path)
            .ok()
            .and_then(|s| serde_json::from_str::<AtlasCell>(&s).ok())
        {
            if hit.design_digest == cell.design_digest && hit.omega_index == omega_index && hit.phi_index == phi_index {
                log::debug!("cell {} from cache", cell.dir_name());
                return hit;
            }
        }
    }
    let t = Instant::now();
    let outcome = (|| -> Result<HullMetrics> {
        let cloud = generate_cloud(&design, &spec.sampler, 1)?;
        cell.n_points = cloud.len();
        let hull = analyze_points(&cloud.positions, spec.alpha)?;
        if let Some(dir) = &options.retain_dir {
            let cdir = dir.join("cells").join(cell.dir_name());
            std::fs::create_dir_all(&cdir).map_err(error::io_error(&cdir))?;
            reachcloud_core::write_cloud(&cloud, &cdir.join("cloud.ply"))?;
            hull.concave_mesh.write_ply(&cdir.join("hull.ply"))?;
        }
        Ok(hull.metrics())
    })();
    cell.runtime_s = t.elapsed().as_secs_f64();
    match outcome {
        Ok(m) => cell.metrics = Some(m),
        Err(e) => {
            log::warn!("cell {} failed: {e}", cell.dir_name());
            cell.error = Some(e.to_string());
        }
    }
    if let (Some(path), None) = (&cached, &cell.error) {
        let stored = std::fs::create_dir_all(path.parent().unwrap())
            .and_then(|_| std::fs::write(path, serde_json::to_string(&cell).expect("cell serializes")));
        if let Err(e) = stored {
            log::warn!("cannot cache cell {}: {e}", cell.dir_name());
        }
    }
    cell
}

pub fn run_atlas(spec: &AtlasSpec, options: &RunOptions) -> Result<AtlasResult> {
    spec.validate()?;
    let n_phi = spec.phi_values.len();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| AtlasError::Spec(format!("cannot build worker pool: {e}")))?;
    let cells: Vec<AtlasCell> = pool.install(|| {
        (0..spec.cell_count())
            .into_par_iter()
            .map(|k| run_cell(spec, k / n_phi, k % n_phi, options))
            .collect()
    });
    let failed = cells.iter().filter(|c| c.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} cells failed", cells.len());
    }
    Ok(AtlasResult {
        spec: spec.clone(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeOptimum {
    pub phi_star: f64,
    pub omega_star: f64,
    pub v_norm: f64,
    pub omega_index: usize,
    pub phi_index: usize,
}

/// Cell with the largest `v_concave/L³`; ties go to the smaller φ, then the
/// smaller Ω. `None` when no cell succeeded.
pub fn find_volume_optimum(result: &AtlasResult) -> Option<VolumeOptimum> {
    let mut order: Vec<&AtlasCell> = result.cells.iter().filter(|c| c.metrics.is_some()).collect();
    order.sort_by(|a, b| a.phi.total_cmp(&b.phi).then(a.omega.total_cmp(&b.omega)));
    let mut best: Option<(&AtlasCell, f64)> = None;
    for c in order {
        let v = c.v_norm().unwrap();
        if best.map_or(true, |(_, bv)| v > bv) {
            best = Some((c, v));
        }
    }
    best.map(|(c, v)| VolumeOptimum {
        phi_star: c.phi,
        omega_star: c.omega,
        v_norm: v,
        omega_index: c.omega_index,
        phi_index: c.phi_index,
    })
}

/// Path of a cell's output directory below an atlas directory.
pub fn cell_dir(root: &Path, cell: &AtlasCell) -> PathBuf {
    root.join("cells").join(cell.dir_name())
}
