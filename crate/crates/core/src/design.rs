//! Manipulator designs, their invariants, and the two reference presets.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::activation::{ActivationState, FiberArchitecture};
use crate::error::{ModelError, Result};
use crate::geometry::TaperedGeometry;
use crate::rotation::helical_angle_from_revolution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulatorDesign {
    pub geometry: TaperedGeometry,
    pub nu: f64,
    pub architectures: Vec<FiberArchitecture>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

fn violation(field: impl Into<String>, constraint: impl Into<String>) -> Violation {
    Violation {
        field: field.into(),
        constraint: constraint.into(),
    }
}

/// Checks every design invariant; an empty list means the design is valid.
pub fn validate_design(design: &ManipulatorDesign) -> Vec<Violation> {
    let mut out = Vec::new();
    let g = &design.geometry;
    let finite = [g.length, g.r1_0, g.r2_0, g.phi, design.nu]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        out.push(violation("geometry", "all parameters must be finite"));
        return out;
    }
    if g.length <= 0.0 {
        out.push(violation("geometry.length", "must be positive"));
    }
    if g.r1_0 <= 0.0 {
        out.push(violation("geometry.r1_0", "must be positive"));
    }
    if g.r1_0 >= g.r2_0 {
        out.push(violation(
            "geometry.r1_0",
            "inner radius must be smaller than outer radius r2_0",
        ));
    }
    if g.r2_0 >= g.length {
        out.push(violation(
            "geometry.r2_0",
            "outer radius must be smaller than length (slenderness)",
        ));
    }
    if g.phi < 0.0 || g.phi >= PI / 2.0 {
        out.push(violation("geometry.phi", "taper angle must lie in [0, pi/2)"));
    } else if g.tip_radius() <= 0.0 {
        out.push(violation(
            "geometry.phi",
            "tip radius nonpositive: length * tan(phi) >= r2_0",
        ));
    }
    if !(design.nu > 0.0 && design.nu <= 0.5) {
        out.push(violation("nu", "Poisson ratio must lie in (0, 0.5]"));
    }
    if design.architectures.is_empty() {
        out.push(violation(
            "architectures",
            "at least one fiber architecture is required",
        ));
    }
    for (i, a) in design.architectures.iter().enumerate() {
        let field = |name: &str| format!("architectures[{i}].{name}");
        if !(a.alpha.is_finite() && a.alpha.abs() < PI / 2.0) {
            out.push(violation(field("alpha"), "helical angle must satisfy |alpha| < pi/2"));
        }
        if !(a.sigma.is_finite() && a.sigma > 0.0) {
            out.push(violation(field("sigma"), "bundle extent must be positive"));
        }
        if !a.theta0.is_finite() {
            out.push(violation(field("theta0"), "must be finite"));
        }
        if a.n == 0 {
            out.push(violation(field("n"), "at least one bundle is required"));
        } else if a.n as f64 * a.sigma > 2.0 * PI * (1.0 + 1e-12) {
            out.push(violation(field("sigma"), "bundles overlap: n * sigma > 2 pi"));
        }
    }
    out
}

impl ManipulatorDesign {
    pub fn validated(self) -> Result<Self> {
        let v = validate_design(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(ModelError::Validation(v))
        }
    }

    /// Bundle counts per architecture.
    pub fn layout(&self) -> Vec<usize> {
        self.architectures.iter().map(|a| a.n).collect()
    }

    pub fn bundle_count(&self) -> usize {
        self.architectures.iter().map(|a| a.n).sum()
    }

    pub fn check_activation(&self, act: &ActivationState) -> Result<()> {
        if act.gamma.len() != self.architectures.len() {
            return Err(ModelError::Shape(format!(
                "design has {} architectures, activation has {}",
                self.architectures.len(),
                act.gamma.len()
            )));
        }
        for (i, (row, arch)) in act.gamma.iter().zip(&self.architectures).enumerate() {
            if row.len() != arch.n {
                return Err(ModelError::Shape(format!(
                    "architecture {i} has {} bundles, activation has {}",
                    arch.n,
                    row.len()
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("design serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Returns a copy with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            geometry: self.geometry.scaled(s),
            ..self.clone()
        }
    }
}

/// Three-bundle design: two opposite-handed helical fibers at 66° and 114°
/// and one longitudinal fiber at 270°, all 48° wide.
pub fn minimal_design(omega: f64, phi: f64) -> ManipulatorDesign {
    let geometry = TaperedGeometry::reference(phi);
    let alpha = helical_angle_from_revolution(&geometry, omega);
    let sigma = 48f64.to_radians();
    let arch = |alpha: f64, theta0: f64| FiberArchitecture {
        alpha,
        sigma,
        theta0: theta0.to_radians(),
        n: 1,
    };
    ManipulatorDesign {
        geometry,
        nu: 0.5,
        architectures: vec![arch(-alpha, 66.0), arch(alpha, 114.0), arch(0.0, 270.0)],
    }
}

/// Four-bundle variant: the longitudinal fiber split into two adjacent
/// independent halves of 24° at 258° and 282°.
pub fn redundant_design(omega: f64, phi: f64) -> ManipulatorDesign {
    let mut d = minimal_design(omega, phi);
    let half = 24f64.to_radians();
    d.architectures.truncate(2);
    for theta0 in [258.0f64, 282.0] {
        d.architectures.push(FiberArchitecture {
            alpha: 0.0,
            sigma: half,
            theta0: theta0.to_radians(),
            n: 1,
        });
    }
    d
}
