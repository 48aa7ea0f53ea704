//! Concave/convex volume pair and the unreachability fraction.

use serde::{Deserialize, Serialize};

use crate::alpha::{select_alpha, AlphaComplex, AlphaSelection};
use crate::convex::convex_hull;
use crate::error::{HullError, Result};
use crate::mesh::{mesh_volume, TriangleMesh};
use crate::predicates::Point;

/// `1 − v_concave/v_convex`, clamped to [0, 1].
pub fn unreachability(v_concave: f64, v_convex: f64) -> Result<f64> {
    for (quantity, value) in [("v_concave", v_concave), ("v_convex", v_convex)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(HullError::Domain {
                quantity,
                value,
                range: "(0, inf)",
            });
        }
    }
    let unr = 1.0 - v_concave / v_convex;
    if !(0.0..=1.0).contains(&unr) {
        log::warn!("unreachability {unr:e} clamped to [0, 1]");
    }
    Ok(unr.clamp(0.0, 1.0))
}

#[derive(Debug, Clone)]
pub struct HullResult {
    pub v_concave: f64,
    pub v_convex: f64,
    pub unr: f64,
    pub alpha_used: f64,
    /// Multiple of the median nearest-neighbor distance, when α was selected
    /// automatically.
    pub alpha_multiplier: Option<f64>,
    pub selection: Option<AlphaSelection>,
    pub median_nn: f64,
    pub thinness_flag: bool,
    pub components_discarded: usize,
    pub concave_mesh: TriangleMesh,
    pub convex_mesh: TriangleMesh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullMetrics {
    pub v_concave: f64,
    pub v_convex: f64,
    pub unr: f64,
    pub alpha_used: f64,
    pub thinness_flag: bool,
    pub components_discarded: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voxel_volume: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voxel_resolution: Option<f64>,
    pub median_nn: f64,
}

impl HullResult {
    pub fn metrics(&self) -> HullMetrics {
        HullMetrics {
            v_concave: self.v_concave,
            v_convex: self.v_convex,
            unr: self.unr,
            alpha_used: self.alpha_used,
            thinness_flag: self.thinness_flag,
            components_discarded: self.components_discarded,
            alpha_multiplier: self.alpha_multiplier,
            voxel_volume: self.selection.map(|s| s.voxel_volume),
            voxel_resolution: self.selection.map(|s| s.voxel_resolution),
            median_nn: self.median_nn,
        }
    }
}

/// How α is chosen for [`analyze_points`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaChoice {
    /// Voxel-calibrated multiple of the median nearest-neighbor distance.
    Auto,
    /// Fixed multiple of the median nearest-neighbor distance.
    Multiplier(f64),
    Absolute(f64),
}

pub fn analyze_points(points: &[Point], choice: AlphaChoice) -> Result<HullResult> {
    let convex_mesh = convex_hull(points)?;
    let v_convex = mesh_volume(&convex_mesh)?;
    let complex = AlphaComplex::new(points)?;
    let median_nn = complex.median_nn_distance();
    let (alpha, selection) = match choice {
        AlphaChoice::Auto => {
            let s = select_alpha(&complex, complex.default_voxel_resolution())?;
            (s.alpha, Some(s))
        }
        AlphaChoice::Multiplier(m) => (m * median_nn, None),
        AlphaChoice::Absolute(a) => (a, None),
    };
    let shape = complex.shape(alpha)?;
    let v_concave = shape.volume;
    assert!(
        v_concave <= v_convex * (1.0 + 1e-9),
        "concave volume {v_concave} exceeds convex volume {v_convex}"
    );
    let unr = unreachability(v_concave, v_convex)?;
    let thinness_flag = v_concave < median_nn * convex_mesh.surface_area();
    if thinness_flag {
        log::info!("thin cloud: concave volume {v_concave:e} below spacing × hull area");
    }
    Ok(HullResult {
        v_concave,
        v_convex,
        unr,
        alpha_used: alpha,
        alpha_multiplier: match choice {
            AlphaChoice::Auto => selection.map(|s| s.multiplier),
            AlphaChoice::Multiplier(m) => Some(m),
            AlphaChoice::Absolute(_) => None,
        },
        selection,
        median_nn,
        thinness_flag,
        components_discarded: shape.components_discarded,
        concave_mesh: shape.mesh,
        convex_mesh,
    })
}
